#pragma once

// Command-line front end.  `run` is the whole program: it parses
// `subwave <command> [--config file] [--flag value ...]`, validates every
// field against the owning module's preconditions (exit 1 on any violation,
// before numerics start), dispatches, writes the artifacts into one
// directory per run, and finishes with a manifest listing each output file
// with its FNV-1a checksum so identical configs can be byte-compared.
//
// Commands
//   profile     solve one self-similar profile       -> profile.csv/.json
//   shoot       scan G(a) for bounded-profile roots  -> roots.json
//   stationary  build a stationary profile           -> stationary.csv/.json
//   simulate    evolve an exterior solution          -> trajectory/NNNN.csv,
//                                                       probe_K.csv,
//                                                       trajectory.json
//   diagnose    channel report from a saved run      -> report.json/.csv
//   sweep       scalar outputs over a parameter grid -> sweep.csv
//
// Config files are flat `key = value` lines; `[section]` headers are
// allowed for readability and ignored; `#` starts a comment.  Command-line
// flags override file values.  The default output root is $SUBWAVE_OUT
// (falling back to ./runs), overridden per run by --out.
//
// Exit codes: 0 success, 1 validation/configuration error, 2 numerical
// failure (blow-up inside a run, adaptive step collapse).

#include <string>
#include <vector>

namespace subwave::cli {

inline constexpr const char* kVersion = "0.1.0";

// argv without the program name.
int run(const std::vector<std::string>& args);

} // namespace subwave::cli
