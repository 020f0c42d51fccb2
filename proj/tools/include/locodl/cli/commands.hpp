#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace locodl::cli {

/// Environment variable consulted when --out is not given.
inline constexpr const char* kOutDirEnv = "LOCODL_OUT_DIR";

struct RunOptions {
  std::string config;
  std::string out_dir;  // empty: $LOCODL_OUT_DIR, then "locodl_out"
  std::vector<std::uint64_t> seeds;  // empty: seeds from the config file
};

struct SweepOptions {
  RunOptions run;
  std::string vary;  // "kappa=1e2,1e3,1e4" or "n=6,37,73"
};

struct CertifyOptions {
  std::string compressor;
  std::size_t dim = 16;
  std::size_t k = 1;
  std::size_t trials = 100'000;
  std::uint64_t seed = 1;
  std::string probe = "gaussian";  // gaussian | ones
  std::optional<double> declared_omega;
};

struct PlotOptions {
  std::vector<std::string> inputs;
  std::string x = "bits_per_client";
  std::string y = "sqdist_mean";
  std::string out = "plot.svg";
};

/// Each command returns a process exit code (see locodl::ExitCode); library
/// errors propagate as exceptions and are mapped by run_cli.
int cmd_run(const RunOptions& options, std::ostream& out);
int cmd_sweep(const SweepOptions& options, std::ostream& out);
int cmd_certify(const CertifyOptions& options, std::ostream& out);
int cmd_plot(const PlotOptions& options, std::ostream& out);

/// Parses argv, dispatches, and converts exceptions to exit codes (messages go to err).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Writes content to path through a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace locodl::cli
