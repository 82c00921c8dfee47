#pragma once

// Small file I/O helpers shared by the exporters and the CLI: a CSV writer
// that prints doubles with 17 significant digits (lossless round-trip, and
// byte-identical across reruns for the determinism checks), a CSV reader
// for trajectory files, JSON convenience wrappers around nlohmann::json,
// and FNV-1a 64-bit checksums for run manifests.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace subwave::io {

std::string format_double(double v);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::span<const char* const> columns);
    CsvWriter(const std::filesystem::path& path, std::initializer_list<const char*> columns);
    void row(std::initializer_list<double> values);
    void row(std::span<const double> values);

private:
    std::ofstream out_;
    std::size_t n_cols_;
};

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data; // data[c][row], column-major

    std::span<const double> column(const std::string& name) const;
};

// Reads a strictly numeric CSV with a header line.  Throws
// std::runtime_error on malformed input.
CsvTable read_csv(const std::filesystem::path& path);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

// FNV-1a 64-bit over raw bytes / file contents.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

} // namespace subwave::io
