#include "locodl/cli/commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "locodl/certification.hpp"
#include "locodl/cli/config_file.hpp"
#include "locodl/cli/svg_chart.hpp"
#include "locodl/error.hpp"
#include "locodl/harness.hpp"
#include "locodl/trace.hpp"

namespace locodl::cli {

namespace fs = std::filesystem;

namespace {

std::string out_dir_for(const RunOptions& options) {
  if (!options.out_dir.empty()) return options.out_dir;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return "locodl_out";
}

std::string meta_value(const ExperimentTrace& trace, const std::string& key) {
  for (const auto& [k, v] : trace.metadata) {
    if (k == key) return v;
  }
  return "nan";
}

std::string trace_stem(const ExperimentTrace& trace) {
  return trace.algorithm + "_" + trace.compressor + "_seed" + std::to_string(trace.seed);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

constexpr const char* kParamKeys[] = {"gamma", "chi", "rho", "p", "omega", "omega_av", "tau"};

struct ResolvedRow {
  std::string label;
  const ExperimentTrace* trace = nullptr;
  bool varies_by_seed = false;
};

std::string resolved_table(const std::vector<ResolvedRow>& rows) {
  std::ostringstream out;
  out << "method\talgorithm\tcompressor";
  for (const char* key : kParamKeys) out << '\t' << key;
  out << '\n';
  for (const auto& row : rows) {
    out << row.label << '\t' << row.trace->algorithm << '\t' << row.trace->compressor;
    for (const char* key : kParamKeys) out << '\t' << meta_value(*row.trace, key);
    out << '\n';
  }
  return out.str();
}

std::string seed_list(const std::vector<std::uint64_t>& seeds) {
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) out += (i ? "," : "") + std::to_string(seeds[i]);
  return out;
}

/// Config text with every schedule parameter pinned to the resolved value.
std::string resolved_config(const std::vector<MethodBlock>& blocks, const std::vector<ResolvedRow>& rows) {
  const ExperimentConfig& c = blocks.front().config;
  std::ostringstream out;
  out << "[problem]\n";
  out << "source = " << to_string(c.source.kind) << '\n';
  if (!c.source.path.empty()) out << "path = " << fs::absolute(c.source.path).lexically_normal().string() << '\n';
  if (!c.source.name.empty()) out << "name = " << c.source.name << '\n';
  out << "dim = " << c.source.dim << '\n';
  out << "samples_per_client = " << c.source.samples_per_client << '\n';
  out << "alpha = " << format_double(c.source.alpha) << '\n';
  out << "clients = " << c.clients << '\n';
  out << "kappa = " << format_double(c.kappa) << '\n';
  if (c.source.data_seed) out << "data_seed = " << *c.source.data_seed << '\n';
  out << "g_zero = " << (c.source.g_zero ? "true" : "false") << '\n';
  out << "\n[run]\n";
  out << "seeds = " << seed_list(c.seeds) << '\n';
  out << "max_iterations = " << c.stop.max_iterations << '\n';
  if (c.stop.lyapunov_ratio) out << "stop_lyapunov_ratio = " << format_double(*c.stop.lyapunov_ratio) << '\n';
  if (c.stop.sqdist_ratio) out << "stop_sqdist_ratio = " << format_double(*c.stop.sqdist_ratio) << '\n';
  out << "record_every = " << c.record.every_iterations << '\n';
  out << "record_rounds = " << (c.record.every_round ? "true" : "false") << '\n';
  out << "participation = " << format_double(c.participation) << '\n';

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const ExperimentConfig& m = blocks[b].config;
    const ExperimentTrace& t = *rows[b].trace;
    out << "\n[method:" << blocks[b].label << "]\n";
    out << "algorithm = " << to_string(m.algorithm) << '\n';
    out << "compressor = " << to_string(m.compressor) << '\n';
    if (m.compressor == CompressorKind::rand_k || m.compressor == CompressorKind::rand_k_natural) {
      out << "k = " << meta_value(t, "k") << '\n';
    }
    out << "gamma = " << meta_value(t, "gamma") << '\n';
    if (m.algorithm == Algorithm::locodl) {
      out << "chi = " << meta_value(t, "chi") << '\n';
      out << "rho = " << meta_value(t, "rho") << '\n';
    }
    if (m.algorithm == Algorithm::locodl || m.algorithm == Algorithm::scaffnew) {
      out << "p = " << meta_value(t, "p") << '\n';
    }
    if (m.algorithm == Algorithm::diana) out << "alpha = " << meta_value(t, "alpha") << '\n';
  }
  return out.str();
}

bool same_params(const ExperimentTrace& a, const ExperimentTrace& b) {
  for (const char* key : kParamKeys) {
    if (meta_value(a, key) != meta_value(b, key)) return false;
  }
  return true;
}

ConfigFile load_with_seeds(const RunOptions& options) {
  ConfigFile file = load_config(options.config);
  if (!options.seeds.empty()) {
    for (auto& block : file.methods) block.config.seeds = options.seeds;
  }
  return file;
}

std::vector<double> parse_value_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end != item.c_str() + item.size() || !std::isfinite(v)) {
      throw InputError("--vary: '" + item + "' is not a number");
    }
    values.push_back(v);
  }
  return values;
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw InputError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

int cmd_run(const RunOptions& options, std::ostream& out) {
  const ConfigFile file = load_with_seeds(options);
  const fs::path dir = out_dir_for(options);

  std::vector<std::vector<ExperimentTrace>> all;
  for (const auto& block : file.methods) all.push_back(run_experiment(block.config));

  std::set<std::string> stems;
  std::vector<ResolvedRow> rows;
  for (std::size_t b = 0; b < all.size(); ++b) {
    ResolvedRow row{file.methods[b].label, &all[b].front(), false};
    for (const auto& trace : all[b]) {
      if (!stems.insert(trace_stem(trace)).second) {
        throw InputError("two runs would write '" + trace_stem(trace) +
                         ".csv'; give method blocks distinct algorithm/compressor pairs");
      }
      if (!same_params(trace, *row.trace)) row.varies_by_seed = true;
    }
    rows.push_back(row);
  }

  std::ostringstream manifest;
  manifest << "config=" << fs::absolute(file.path).lexically_normal().string() << '\n';
  manifest << "config_hash=" << file.content_hash << '\n';
  manifest << "out_dir=" << fs::absolute(dir).lexically_normal().string() << '\n';
  for (std::size_t b = 0; b < all.size(); ++b) {
    for (const auto& trace : all[b]) {
      const std::string stem = trace_stem(trace);
      write_file_atomic((dir / (stem + ".csv")).string(), trace_to_csv(trace));
      write_file_atomic((dir / (stem + ".meta.txt")).string(), trace_metadata_text(trace));
      manifest << "run=" << file.methods[b].label << ',' << stem << ".csv,reached_target="
               << (trace.reached_target ? "true" : "false") << '\n';
    }
  }
  const std::string table = resolved_table(rows);
  manifest << "\n" << table;
  write_file_atomic((dir / "manifest.txt").string(), manifest.str());
  write_file_atomic((dir / "resolved.ini").string(), resolved_config(file.methods, rows));

  out << table;
  for (const auto& row : rows) {
    if (row.varies_by_seed) {
      out << "note: parameters of '" << row.label
          << "' differ across seeds (problem rebuilt per seed); set data_seed to pin them\n";
    }
  }
  out << "wrote " << stems.size() << " trace(s) to " << dir.string() << '\n';
  return static_cast<int>(ExitCode::ok);
}

int cmd_sweep(const SweepOptions& options, std::ostream& out) {
  const auto eq = options.vary.find('=');
  if (eq == std::string::npos) throw InputError("--vary expects key=v1,v2,...");
  const SweepKey key = parse_sweep_key(options.vary.substr(0, eq));
  const std::vector<double> values = parse_value_list(options.vary.substr(eq + 1));
  if (values.empty()) throw InputError("--vary: empty list of values");

  const ConfigFile file = load_with_seeds(options.run);
  const fs::path dir = out_dir_for(options.run);
  const std::string key_name = key == SweepKey::kappa ? "kappa" : "n";

  std::ostringstream summary;
  summary << "method,algorithm,compressor," << key_name << ",median_bits_to_target,reached,seeds\n";
  std::ostringstream exponents;
  bool all_reached = true;
  for (const auto& block : file.methods) {
    const std::vector<SweepCell> cells = sweep(block.config, key, values);
    std::map<double, double> bits_by_kappa;
    for (const auto& cell : cells) {
      const ExperimentTrace& first = cell.traces.front();
      summary << block.label << ',' << first.algorithm << ',' << first.compressor << ',' << format_double(cell.value)
              << ',' << format_double(cell.median_bits) << ',' << cell.reached << ',' << cell.seeds << '\n';
      for (const auto& trace : cell.traces) {
        const std::string stem =
            block.label + "_" + key_name + format_double(cell.value) + "_seed" + std::to_string(trace.seed);
        write_file_atomic((dir / "cells" / (stem + ".csv")).string(), trace_to_csv(trace));
      }
      bits_by_kappa[cell.value] = cell.median_bits;
      if (!std::isfinite(cell.median_bits)) all_reached = false;
    }
    if (key == SweepKey::kappa) {
      std::string slope = "nan";
      if (cells.size() >= 3 && all_reached) slope = format_double(fit_communication_exponent(bits_by_kappa));
      exponents << "exponent[" << block.label << "]=" << slope << '\n';
    }
  }
  write_file_atomic((dir / "summary.csv").string(), summary.str());
  if (key == SweepKey::kappa) write_file_atomic((dir / "exponent.txt").string(), exponents.str());

  out << summary.str() << exponents.str();
  if (!all_reached) {
    out << "some cells did not reach the stop target within max_iterations\n";
    return static_cast<int>(ExitCode::convergence);
  }
  return static_cast<int>(ExitCode::ok);
}

int cmd_certify(const CertifyOptions& options, std::ostream& out) {
  if (options.trials < 10'000) throw InputError("certify: trials must be >= 10000");
  const CompressorKind kind = parse_compressor_kind(options.compressor);
  const CompressorSpec spec{kind, options.dim, options.k};
  spec.validate();

  RandomStream probe_rng(derive_seed(options.seed, {stream_tag::probe}));
  Vector probe(static_cast<Eigen::Index>(options.dim));
  if (options.probe == "ones") {
    probe.setOnes();
  } else if (options.probe == "gaussian") {
    for (Eigen::Index j = 0; j < probe.size(); ++j) probe[j] = probe_rng.normal();
  } else {
    throw InputError("certify: probe must be 'ones' or 'gaussian'");
  }
  RandomStream rng(derive_seed(options.seed, {stream_tag::client, 0}));
  const CertificationReport r = certify_compressor(spec, probe, options.trials, rng, options.declared_omega);

  out << "compressor=" << spec.label() << '\n';
  out << "d=" << options.dim << '\n';
  out << "trials=" << r.trials << '\n';
  out << "bits_per_message=" << bit_cost(spec) << '\n';
  out << "declared_omega=" << format_double(r.declared_omega) << '\n';
  out << "max_standard_errors=" << format_double(r.max_standard_errors) << " (limit "
      << format_double(kUnbiasedStandardErrors) << ")\n";
  out << "variance_ratio=" << format_double(r.variance_ratio) << " (limit " << format_double(r.variance_limit)
      << ")\n";
  out << "unbiased=" << (r.unbiased ? "pass" : "fail") << '\n';
  out << "variance=" << (r.variance_ok ? "pass" : "fail") << '\n';
  out << (r.passed() ? "PASS" : "FAIL") << '\n';
  return static_cast<int>(r.passed() ? ExitCode::ok : ExitCode::certification_failed);
}

int cmd_plot(const PlotOptions& options, std::ostream& out) {
  if (options.inputs.empty()) throw InputError("plot: no input files");
  std::vector<Series> series;
  std::set<std::string> seen;
  for (const auto& path : options.inputs) {
    const CsvTable table = parse_csv(read_file(path));
    if (table.header.size() != kTraceColumns.size() ||
        !std::equal(table.header.begin(), table.header.end(), kTraceColumns.begin())) {
      throw InputError("plot: '" + path + "' does not have the trace schema");
    }
    const std::size_t xc = table.column(options.x);
    const std::size_t yc = table.column(options.y);
    const std::size_t ac = table.column("algorithm");
    const std::size_t cc = table.column("compressor");
    if (table.rows.empty()) throw InputError("plot: '" + path + "' has no rows");
    const std::string label = table.rows.front()[ac] + " " + table.rows.front()[cc];
    if (!seen.insert(label).second) continue;
    Series s{label, {}};
    for (const auto& row : table.rows) {
      s.points.emplace_back(std::strtod(row[xc].c_str(), nullptr), std::strtod(row[yc].c_str(), nullptr));
    }
    series.push_back(std::move(s));
  }
  write_file_atomic(options.out, render_line_chart(series, ChartOptions{options.x, options.y}));
  out << "wrote " << options.out << " (" << series.size() << " series)\n";
  return static_cast<int>(ExitCode::ok);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"locodl: compressed local-training experiments"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "run every method block of a config file");
  run_cmd->add_option("config", run.config, "experiment config")->required();
  run_cmd->add_option("--out", run.out_dir, std::string("output directory (default $") + kOutDirEnv + " or locodl_out)");
  run_cmd->add_option("--seeds", run.seeds, "override the config seeds")->delimiter(',');

  SweepOptions sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "rerun a config over kappa or n");
  sweep_cmd->add_option("config", sw.run.config, "experiment config")->required();
  sweep_cmd->add_option("--vary", sw.vary, "kappa=1e2,1e3,1e4 or n=6,37,73")->required();
  sweep_cmd->add_option("--out", sw.run.out_dir, "output directory");
  sweep_cmd->add_option("--seeds", sw.run.seeds, "override the config seeds")->delimiter(',');

  CertifyOptions cert;
  double declared = 0.0;
  auto* cert_cmd = app.add_subcommand("certify", "Monte-Carlo check of a compressor");
  cert_cmd->add_option("compressor", cert.compressor, "identity|rand_k|natural|rand_k_natural|l1_selection")->required();
  cert_cmd->add_option("-d,--dim", cert.dim, "dimension")->capture_default_str();
  cert_cmd->add_option("-k", cert.k, "coordinates kept by rand_k")->capture_default_str();
  cert_cmd->add_option("--trials", cert.trials, "number of draws (>= 10000)")->capture_default_str();
  cert_cmd->add_option("--seed", cert.seed, "seed")->capture_default_str();
  cert_cmd->add_option("--probe", cert.probe, "gaussian|ones")->capture_default_str();
  auto* declared_opt = cert_cmd->add_option("--declared-omega", declared, "omega to check against");

  PlotOptions plot;
  auto* plot_cmd = app.add_subcommand("plot", "SVG chart of trace CSVs");
  plot_cmd->add_option("csv", plot.inputs, "trace files")->required();
  plot_cmd->add_option("--x", plot.x, "x column")->capture_default_str();
  plot_cmd->add_option("--y", plot.y, "y column (log scale)")->capture_default_str();
  plot_cmd->add_option("--out", plot.out, "output SVG")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::input);
  }

  try {
    if (*run_cmd) return cmd_run(run, out);
    if (*sweep_cmd) return cmd_sweep(sw, out);
    if (*cert_cmd) {
      if (*declared_opt) cert.declared_omega = declared;
      return cmd_certify(cert, out);
    }
    if (*plot_cmd) return cmd_plot(plot, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::input);
  }
  return static_cast<int>(ExitCode::input);
}

}  // namespace locodl::cli
