#include "subwave/io.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace subwave::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::span<const char* const> columns)
    : out_(path), n_cols_(columns.size()) {
    if (!out_)
        throw std::runtime_error("CsvWriter: cannot open " + path.string());
    for (std::size_t i = 0; i < columns.size(); ++i)
        out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::initializer_list<const char*> columns)
    : CsvWriter(path, std::span<const char* const>(columns.begin(), columns.size())) {}

void CsvWriter::row(std::span<const double> values) {
    if (values.size() != n_cols_)
        throw std::invalid_argument("CsvWriter::row: column count mismatch");
    for (std::size_t i = 0; i < values.size(); ++i)
        out_ << (i ? "," : "") << format_double(values[i]);
    out_ << "\n";
}

void CsvWriter::row(std::initializer_list<double> values) {
    row(std::span<const double>(values.begin(), values.size()));
}

std::span<const double> CsvTable::column(const std::string& name) const {
    for (std::size_t c = 0; c < columns.size(); ++c)
        if (columns[c] == name) return data[c];
    throw std::runtime_error("CsvTable: no column named '" + name + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("read_csv: cannot open " + path.string());
    CsvTable t;
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("read_csv: empty file " + path.string());
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            t.columns.push_back(cell);
    }
    t.data.resize(t.columns.size());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            if (c >= t.columns.size())
                throw std::runtime_error("read_csv: too many cells at line " +
                                         std::to_string(lineno) + " of " + path.string());
            t.data[c].push_back(std::stod(cell));
            ++c;
        }
        if (c != t.columns.size())
            throw std::runtime_error("read_csv: short row at line " +
                                     std::to_string(lineno) + " of " + path.string());
    }
    return t;
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("write_json: cannot open " + path.string());
    out << j.dump(2) << "\n";
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("read_json: cannot open " + path.string());
    return nlohmann::json::parse(in);
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("fnv1a64_file: cannot open " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
        if (got < static_cast<std::streamsize>(sizeof(buf))) break;
    }
    return h;
}

} // namespace subwave::io
