#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace locodl {

/// One recorded point of a trajectory.
struct TraceRow {
  std::uint64_t t = 0;
  std::uint64_t rounds = 0;
  double bits_per_client = 0.0;  // mean cumulative uplink bits per client
  double sqdist_mean = 0.0;      // (1/n) sum_i ||x_i - x*||^2
  double sqdist_ybar = 0.0;      // ||server model - x*||^2 (y for LoCoDL)
  double obj_gap = 0.0;          // F(server model) - F*
  double lyapunov = 0.0;         // NaN for methods without a Lyapunov function
};

/// Recorded trajectory of one (configuration, seed) run.
struct ExperimentTrace {
  std::string algorithm;
  std::string dataset;
  std::string compressor;
  std::size_t n = 0;
  std::size_t d = 0;
  double kappa = 0.0;
  std::uint64_t seed = 0;
  std::vector<TraceRow> rows;
  /// Ordered key/value pairs written to the sidecar file.
  std::vector<std::pair<std::string, std::string>> metadata;

  bool reached_target = false;
  /// max over iterations of ||(1/n) sum u_i + v||_inf / (1 + max_i ||u_i||_inf); 0 for baselines.
  double max_dual_violation = 0.0;
  std::uint64_t saturation_events = 0;

  const TraceRow& initial() const { return rows.front(); }
  const TraceRow& final() const { return rows.back(); }
};

inline constexpr std::array<std::string_view, 14> kTraceColumns = {
    "algorithm", "dataset", "n", "d", "kappa", "compressor", "seed", "t",
    "rounds", "bits_per_client", "sqdist_mean", "sqdist_ybar", "obj_gap", "lyapunov",
};

/// Header line (no trailing newline).
std::string trace_csv_header();
/// Full CSV document: header plus one line per row, '\n' line endings.
std::string trace_to_csv(const ExperimentTrace& trace);
/// "key=value" lines for the metadata sidecar.
std::string trace_metadata_text(const ExperimentTrace& trace);

/// Shortest decimal text that reads back to the same double ("nan" for NaN).
std::string format_double(double value);

/// A parsed trace CSV (used by plotting); every column kept as text.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index or throws InputError.
  std::size_t column(std::string_view name) const;
};

/// Splits comma-separated lines; throws ParseError on ragged rows.
CsvTable parse_csv(const std::string& text);

}  // namespace locodl
