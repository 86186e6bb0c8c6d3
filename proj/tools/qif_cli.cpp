// Command-line front end: detuning sweeps, single points, peak reports and
// analytic-vs-numeric comparisons.
//
// Exit codes: 0 success, 1 validation error, 2 solver failure, 3 I/O error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qif/qif.hpp"

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kSolver = 2, kIo = 3 };

// Every flag is kept as text so that flags override the config file, which
// overrides the preset.
struct CommonOptions {
  std::optional<std::string> preset;
  std::optional<std::string> config;
  std::map<std::string, std::string> settings;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--preset", o.preset, "figure preset (see preset-list)");
  cmd->add_option("--config", o.config, "key = value file applied after the preset");
  cmd->add_option("--threads", o.threads, "worker threads for sweeps (0 = all cores)");
  const std::pair<const char*, const char*> flags[] = {
      {"omega-ab", "one-photon Rabi frequency b <-> a1,a2"},
      {"omega-bc", "one-photon Rabi frequency c <-> b"},
      {"q", "two-photon Rabi frequency c <-> a1,a2"},
      {"omega12", "upper-doublet splitting"},
      {"delta-2ph", "two-photon detuning (point only, physical units)"},
      {"delta-1ph", "intermediate-level offset"},
      {"gamma-u", "upper-level decay rate to d"},
      {"gamma-v", "upper-level decay rate to b"},
      {"gamma-b", "decay rate b -> c"},
      {"gamma-d", "decay rate d -> c (default gamma-b)"},
      {"p-u", "mutual polarization, ultraviolet branch"},
      {"p-v", "mutual polarization, visible branch"},
      {"delta-min", "sweep start, units of gamma_u + gamma_v"},
      {"delta-max", "sweep end, units of gamma_u + gamma_v"},
      {"points", "number of grid points (>= 3)"},
      {"mode", "numeric | analytic_2ph | analytic_cascade | cascade_solver | compare"},
      {"transcription", "corrected | literal closed forms"},
      {"out", "output CSV path"},
  };
  for (const auto& [flag, help] : flags) {
    std::string key = flag;
    for (char& ch : key) {
      if (ch == '-') ch = '_';
    }
    cmd->add_option_function<std::string>(
        std::string("--") + flag, [&o, key](const std::string& v) { o.settings[key] = v; }, help);
  }
}

std::vector<qif::SweepConfig> resolve(const CommonOptions& o) {
  std::vector<qif::SweepConfig> configs =
      o.preset ? qif::preset(*o.preset).sweeps : std::vector<qif::SweepConfig>{qif::SweepConfig{}};
  for (auto& c : configs) {
    if (o.config) qif::apply_config_file(c, *o.config);
    for (const auto& [k, v] : o.settings) qif::apply_setting(c, k, v);
  }
  return configs;
}

std::string tagged_path(const std::string& path, const std::string& tag) {
  if (tag.empty()) return path;
  std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + "_" + tag + p.extension().string())).string();
}

void emit_csv(const qif::SweepResult& r, const qif::SweepConfig& c, std::size_t n_configs) {
  if (c.output_path.empty()) {
    if (n_configs > 1) throw qif::ValidationError("multi-sweep presets need --out");
    qif::write_csv(r, std::cout);
    return;
  }
  const std::string path = tagged_path(c.output_path, c.tag);
  qif::write_csv(r, path);
  std::cerr << "wrote " << r.rows.size() << " rows to " << path << '\n';
}

void print_peaks(const qif::PeakReport& report, const std::string& tag) {
  std::cout << (tag.empty() ? "" : tag + " ") << qif::to_string(report.trace_id) << ": "
            << report.peaks.size() << " peak(s)\n";
  for (const auto& p : report.peaks) {
    std::cout << "  delta=" << p.delta_location << " height=" << p.height
              << " prominence=" << p.prominence;
    if (!p.label.empty()) std::cout << " label=" << p.label;
    std::cout << '\n';
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Steady-state fluorescence of a driven five-level molecule"};
  app.require_subcommand(1);

  CommonOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "sweep the two-photon detuning and write CSV");
  add_common(sweep, sweep_opts);

  CommonOptions point_opts;
  double point_delta = 0.0;
  bool point_physical = false;
  auto* point = app.add_subcommand("point", "solve one detuning and print the state");
  add_common(point, point_opts);
  point->add_option("--delta", point_delta, "detuning in units of gamma_u + gamma_v");
  point->add_flag("--physical", point_physical, "use --delta-2ph as given instead of --delta");

  CommonOptions peak_opts;
  std::optional<std::string> peak_input;
  std::optional<std::string> peak_trace;
  double prominence = qif::kDefaultProminence;
  auto* peaks = app.add_subcommand("peaks", "detect intensity maxima of a sweep");
  add_common(peaks, peak_opts);
  peaks->add_option("--in", peak_input, "read the sweep from CSV instead of computing it");
  peaks->add_option("--trace", peak_trace, "i_u | i_v | i_p0 (default: all three)");
  peaks->add_option("--prominence", prominence, "minimum prominence as a fraction of the maximum");

  CommonOptions cmp_opts;
  std::optional<std::string> analytic_mode;
  std::optional<std::string> analytic_out;
  double floor_fraction = 0.01;
  auto* compare = app.add_subcommand("compare", "numeric steady state vs a closed form");
  add_common(compare, cmp_opts);
  compare->add_option("--analytic-mode", analytic_mode,
                      "analytic_2ph | analytic_cascade | cascade_solver");
  compare->add_option("--analytic-out", analytic_out, "write the analytic sweep here");
  compare->add_option("--floor", floor_fraction,
                      "ignore points below this fraction of the column maximum");

  auto* list = app.add_subcommand("preset-list", "list figure presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  if (list->parsed()) {
    for (const auto& name : qif::preset_names()) {
      const qif::Preset p = qif::preset(name);
      std::cout << name << " - " << p.description << '\n';
    }
    return kOk;
  }

  if (sweep->parsed()) {
    const auto configs = resolve(sweep_opts);
    for (const auto& c : configs) emit_csv(qif::run_sweep(c, sweep_opts.threads), c, configs.size());
    return kOk;
  }

  if (point->parsed()) {
    for (auto c : resolve(point_opts)) {
      qif::ModelParams p = c.params;
      if (!point_physical) p.delta_2ph = point_delta * qif::detuning_unit(p);
      const qif::PointSolution s = qif::solve_point(p);
      if (!c.tag.empty()) std::cout << "# " << c.tag << '\n';
      std::cout << std::setprecision(10) << "delta_2ph=" << p.delta_2ph << '\n';
      for (qif::Level i : qif::kAllLevels) {
        std::cout << "rho_" << qif::short_name(i) << " =";
        for (qif::Level j : qif::kAllLevels) {
          const qif::cplx v = s.rho(i, j);
          std::cout << ' ' << v.real() << (v.imag() < 0 ? "" : "+") << v.imag() << 'i';
        }
        std::cout << '\n';
      }
      std::cout << "i_u=" << s.intensities.i_u << "\ni_v=" << s.intensities.i_v
                << "\ni_p0=" << s.intensities.i_p0 << "\nresidual=" << s.residual << '\n';
    }
    return kOk;
  }

  if (peaks->parsed()) {
    std::vector<qif::Trace> traces = {qif::Trace::i_u, qif::Trace::i_v, qif::Trace::i_p0};
    if (peak_trace) traces = {qif::parse_trace(*peak_trace)};
    for (const auto& c : resolve(peak_opts)) {
      const qif::SweepResult r = peak_input ? qif::read_csv(*peak_input) : qif::run_sweep(c, peak_opts.threads);
      const double step = r.rows.size() > 1 ? r.rows[1].delta - r.rows[0].delta : 0.0;
      for (qif::Trace t : traces) {
        qif::PeakReport report = qif::detect_peaks(r, t, prominence);
        qif::label_peaks(report, c.params, step);
        print_peaks(report, c.tag);
      }
      if (peak_input) break;
    }
    return kOk;
  }

  if (compare->parsed()) {
    std::optional<qif::SweepMode> mode;
    if (analytic_mode) mode = qif::parse_mode(*analytic_mode);
    for (const auto& c : resolve(cmp_opts)) {
      const qif::CompareOutcome out = qif::compare_sweep(c, mode, cmp_opts.threads, floor_fraction);
      if (!c.tag.empty()) std::cout << "# " << c.tag << '\n';
      std::cout << "numeric vs " << qif::to_string(out.analytic_mode) << '\n';
      for (const auto& col : out.deviation.columns) {
        std::cout << "  " << col.column << ": max relative deviation " << col.max_rel
                  << " at delta=" << col.at_delta << '\n';
      }
      if (!c.output_path.empty()) qif::write_csv(out.numeric, tagged_path(c.output_path, c.tag));
      if (analytic_out) qif::write_csv(out.analytic, tagged_path(*analytic_out, c.tag));
    }
    return kOk;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const qif::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const qif::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const qif::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolver;
  }
}
