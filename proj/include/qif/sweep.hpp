#pragma once

// Detuning sweeps, peak detection, CSV persistence and the figure presets.
//
// The delta column of a sweep is in units of gamma_u + gamma_v; the model is
// evaluated at delta_2ph = delta * (gamma_u + gamma_v).

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "qif/analytic.hpp"
#include "qif/model.hpp"

namespace qif {

enum class SweepMode { numeric, analytic_2ph, analytic_cascade, cascade_solver, compare };

inline std::string_view to_string(SweepMode m) {
  switch (m) {
    case SweepMode::numeric: return "numeric";
    case SweepMode::analytic_2ph: return "analytic_2ph";
    case SweepMode::analytic_cascade: return "analytic_cascade";
    case SweepMode::cascade_solver: return "cascade_solver";
    case SweepMode::compare: return "compare";
  }
  return "?";
}

inline SweepMode parse_mode(std::string_view s) {
  for (SweepMode m : {SweepMode::numeric, SweepMode::analytic_2ph, SweepMode::analytic_cascade,
                      SweepMode::cascade_solver, SweepMode::compare}) {
    if (to_string(m) == s) return m;
  }
  throw ValidationError("unknown mode '" + std::string(s) +
                        "'; expected numeric, analytic_2ph, analytic_cascade, cascade_solver or "
                        "compare");
}

struct SweepConfig {
  ModelParams params;  ///< delta_2ph is overwritten per grid point
  double delta_min = -6.0;
  double delta_max = 6.0;
  int points = 241;
  SweepMode mode = SweepMode::numeric;
  Transcription transcription = Transcription::corrected;
  std::string output_path;
  std::string tag;  ///< distinguishes the members of a multi-sweep preset
};

inline void validate(const SweepConfig& c) {
  validate(c.params);
  if (!std::isfinite(c.delta_min) || !std::isfinite(c.delta_max) || !(c.delta_min < c.delta_max)) {
    throw ValidationError("delta_min must be < delta_max");
  }
  if (c.points < 3) throw ValidationError("points must be >= 3, got " + std::to_string(c.points));
}

inline double detuning_unit(const ModelParams& p) { return p.gamma_u + p.gamma_v; }

/// Uniform grid including both endpoints.
inline std::vector<double> delta_grid(double lo, double hi, int points) {
  std::vector<double> g(static_cast<std::size_t>(points));
  const double step = (hi - lo) / (points - 1);
  for (int k = 0; k < points; ++k) g[static_cast<std::size_t>(k)] = lo + k * step;
  g.back() = hi;
  return g;
}

struct SweepRow {
  double delta = 0.0;
  double rho11 = 0.0;
  double rho22 = 0.0;
  double re_rho12 = 0.0;
  double rho_bb = 0.0;
  double rho_cc = 0.0;
  double rho_dd = 0.0;
  double i_u = 0.0;
  double i_v = 0.0;
  double i_p0 = 0.0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepResult {
  std::vector<SweepRow> rows;

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

/// Evaluates one grid point; `delta` is in units of gamma_u + gamma_v.
inline SweepRow evaluate_point(const SweepConfig& c, double delta) {
  ModelParams p = c.params;
  p.delta_2ph = delta * detuning_unit(p);
  SweepRow r;
  r.delta = delta;
  if (c.mode == SweepMode::numeric || c.mode == SweepMode::compare) {
    using enum Level;
    const PointSolution s = solve_point(p);
    r.rho11 = s.rho.population(a1);
    r.rho22 = s.rho.population(a2);
    r.re_rho12 = s.rho(a1, a2).real();
    r.rho_bb = s.rho.population(b);
    r.rho_cc = s.rho.population(c);
    r.rho_dd = s.rho.population(d);
    r.i_u = s.intensities.i_u;
    r.i_v = s.intensities.i_v;
    r.i_p0 = s.intensities.i_p0;
    return r;
  }
  WeakFieldSolution w;
  switch (c.mode) {
    case SweepMode::analytic_2ph:
      // The closed form labels the -omega12/2 resonance rho11; in this basis it is a2.
      w = two_photon_weak(p);
      std::swap(w.rho11, w.rho22);
      break;
    case SweepMode::analytic_cascade: w = cascade_weak(p, c.transcription); break;
    case SweepMode::cascade_solver: w = cascade_solver(p); break;
    default: break;
  }
  r.rho11 = w.rho11;
  r.rho22 = w.rho22;
  r.re_rho12 = w.re_rho12;
  r.rho_bb = w.rho_bb;
  r.rho_cc = 1.0 - w.rho11 - w.rho22 - w.rho_bb;
  r.rho_dd = 0.0;
  r.i_u = intensity_from(w.rho11, w.rho22, w.re_rho12, p.gamma_u, p.p_u);
  r.i_v = intensity_from(w.rho11, w.rho22, w.re_rho12, p.gamma_v, p.p_v);
  r.i_p0 = intensity_from(w.rho11, w.rho22, w.re_rho12, p.gamma_u, 0.0);
  return r;
}

/// Evaluates every grid point, concurrently when `threads` != 1
/// (0 = hardware concurrency). Rows come back ordered by delta regardless of
/// evaluation order. Any failed point aborts the sweep; the error lists every
/// offending delta.
inline SweepResult run_sweep(const SweepConfig& c, unsigned threads = 0) {
  validate(c);
  const std::vector<double> grid = delta_grid(c.delta_min, c.delta_max, c.points);
  std::vector<SweepRow> rows(grid.size());

  struct Failure {
    double delta;
    std::string message;
    bool validation;
  };
  std::vector<Failure> failures;
  std::mutex failures_mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t k = next++; k < grid.size(); k = next++) {
      try {
        rows[k] = evaluate_point(c, grid[k]);
      } catch (const Error& e) {
        const bool validation = dynamic_cast<const ValidationError*>(&e) != nullptr;
        std::lock_guard lock(failures_mutex);
        failures.push_back({grid[k], e.what(), validation});
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(grid.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end(),
              [](const Failure& a, const Failure& b) { return a.delta < b.delta; });
    std::ostringstream os;
    os << "sweep failed at delta =";
    for (std::size_t k = 0; k < failures.size(); ++k) os << (k ? ", " : " ") << failures[k].delta;
    os << ": " << failures.front().message;
    const bool validation = std::any_of(failures.begin(), failures.end(),
                                        [](const Failure& f) { return f.validation; });
    if (validation) throw ValidationError(os.str());
    throw SolverError(os.str());
  }
  return SweepResult{std::move(rows)};
}

// ---------------------------------------------------------------------------
// Peaks

enum class Trace { i_u, i_v, i_p0 };

inline std::string_view to_string(Trace t) {
  switch (t) {
    case Trace::i_u: return "i_u";
    case Trace::i_v: return "i_v";
    case Trace::i_p0: return "i_p0";
  }
  return "?";
}

inline Trace parse_trace(std::string_view s) {
  for (Trace t : {Trace::i_u, Trace::i_v, Trace::i_p0}) {
    if (to_string(t) == s) return t;
  }
  throw ValidationError("unknown trace '" + std::string(s) + "'; expected i_u, i_v or i_p0");
}

inline std::vector<double> trace_values(const SweepResult& r, Trace t) {
  std::vector<double> y;
  y.reserve(r.rows.size());
  for (const auto& row : r.rows) {
    y.push_back(t == Trace::i_u ? row.i_u : t == Trace::i_v ? row.i_v : row.i_p0);
  }
  return y;
}

inline std::vector<double> delta_values(const SweepResult& r) {
  std::vector<double> x;
  x.reserve(r.rows.size());
  for (const auto& row : r.rows) x.push_back(row.delta);
  return x;
}

struct Peak {
  double delta_location = 0.0;
  double height = 0.0;
  double prominence = 0.0;
  std::string label;  ///< predicted resonance within one grid step, if any
};

struct PeakReport {
  Trace trace_id = Trace::i_u;
  std::vector<Peak> peaks;
};

inline constexpr double kDefaultProminence = 0.02;

/// Strict interior local maxima whose prominence reaches `min_fraction` of the
/// global maximum. The prominence base on each side is the lowest point
/// reached before the trace climbs above the peak (or hits the edge).
inline std::vector<Peak> find_peaks(const std::vector<double>& x, const std::vector<double>& y,
                                    double min_fraction = kDefaultProminence) {
  if (x.size() != y.size()) throw DimensionError("x and y lengths differ");
  if (y.size() < 3) throw ValidationError("peak detection needs at least 3 points");
  if (!(min_fraction > 0.0 && min_fraction < 1.0)) {
    throw ValidationError("prominence fraction must lie in (0, 1)");
  }
  const double top = *std::max_element(y.begin(), y.end());
  std::vector<Peak> peaks;
  if (!(top > 0.0)) return peaks;

  const std::size_t n = y.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1] && y[i] > y[i + 1])) continue;
    double left_min = y[i];
    for (std::size_t j = i; j > 0 && y[j - 1] <= y[i]; --j) left_min = std::min(left_min, y[j - 1]);
    double right_min = y[i];
    for (std::size_t j = i; j + 1 < n && y[j + 1] <= y[i]; ++j) {
      right_min = std::min(right_min, y[j + 1]);
    }
    const double prominence = y[i] - std::max(left_min, right_min);
    if (prominence > 0.0 && prominence >= min_fraction * top) {
      peaks.push_back(Peak{x[i], y[i], prominence, {}});
    }
  }
  return peaks;
}

inline PeakReport detect_peaks(const SweepResult& r, Trace t,
                               double min_fraction = kDefaultProminence) {
  return PeakReport{t, find_peaks(delta_values(r), trace_values(r, t), min_fraction)};
}

/// Tags each peak with the nearest predicted resonance lying within one grid
/// step plus that line's width.
inline void label_peaks(PeakReport& report, const ModelParams& p, double grid_step) {
  const double unit = detuning_unit(p);
  for (auto& peak : report.peaks) {
    double best = INFINITY;
    for (const auto& pred : predicted_peaks(p)) {
      const double dist = std::abs(peak.delta_location - pred.delta_2ph / unit);
      if (dist <= (grid_step + pred.width / unit) * (1 + 1e-9) && dist < best) {
        best = dist;
        peak.label = pred.label;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::string_view kCsvHeader =
    "delta,rho11,rho22,re_rho12,rho_bb,rho_cc,rho_dd,i_u,i_v,i_p0";

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline void write_csv(const SweepResult& r, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const auto& row : r.rows) {
    const double values[] = {row.delta,  row.rho11,  row.rho22, row.re_rho12, row.rho_bb,
                             row.rho_cc, row.rho_dd, row.i_u,   row.i_v,      row.i_p0};
    for (std::size_t k = 0; k < std::size(values); ++k) {
      if (k) os << ',';
      os << format_double(values[k]);
    }
    os << '\n';
  }
}

inline void write_csv(const SweepResult& r, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_csv(r, os);
  if (!os) throw IoError("failed writing '" + path + "'");
}

inline SweepResult read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty file: missing header", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) {
    throw ParseError("header mismatch: expected '" + std::string(kCsvHeader) + "', found '" +
                         line + "'",
                     1);
  }
  SweepResult r;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (is.peek() == std::char_traits<char>::eof()) break;
      throw ParseError("blank line inside data", line_no);
    }
    double values[10];
    std::size_t field = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      if (field == 10) throw ParseError("too many fields (expected 10)", line_no);
      const char* comma = std::find(p, end, ',');
      const auto [ptr, ec] = std::from_chars(p, comma, values[field]);
      if (ec != std::errc() || ptr != comma || p == comma) {
        throw ParseError("malformed number in field " + std::to_string(field + 1) + ": '" +
                             std::string(p, comma) + "'",
                         line_no);
      }
      ++field;
      if (comma == end) break;
      p = comma + 1;
    }
    if (field != 10) {
      throw ParseError("expected 10 fields, found " + std::to_string(field), line_no);
    }
    SweepRow row{values[0], values[1], values[2], values[3], values[4],
                 values[5], values[6], values[7], values[8], values[9]};
    if (!r.rows.empty() && !(row.delta > r.rows.back().delta)) {
      throw ParseError("delta column must be strictly increasing", line_no);
    }
    r.rows.push_back(row);
  }
  if (r.rows.empty()) throw ParseError("no data rows", line_no);
  return r;
}

inline SweepResult read_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  return read_csv(is);
}

// ---------------------------------------------------------------------------
// Comparison of two sweeps over the same grid

struct ColumnDeviation {
  std::string column;
  double max_rel = 0.0;
  double at_delta = 0.0;
};

struct SweepComparison {
  std::vector<ColumnDeviation> columns;

  double max_rel() const {
    double m = 0.0;
    for (const auto& c : columns) m = std::max(m, c.max_rel);
    return m;
  }
};

/// Max relative deviation of `candidate` from `reference` per column,
/// restricted to points where |reference| exceeds `floor_fraction` of the
/// column's maximum magnitude.
inline SweepComparison compare_results(const SweepResult& reference, const SweepResult& candidate,
                                       double floor_fraction = 0.01) {
  if (reference.rows.size() != candidate.rows.size()) {
    throw DimensionError("sweeps have different lengths");
  }
  using Getter = double SweepRow::*;
  const std::pair<const char*, Getter> cols[] = {
      {"rho11", &SweepRow::rho11}, {"rho22", &SweepRow::rho22}, {"re_rho12", &SweepRow::re_rho12},
      {"i_u", &SweepRow::i_u},     {"i_v", &SweepRow::i_v},     {"i_p0", &SweepRow::i_p0}};
  SweepComparison out;
  for (const auto& [name, get] : cols) {
    double top = 0.0;
    for (const auto& row : reference.rows) top = std::max(top, std::abs(row.*get));
    ColumnDeviation dev{name, 0.0, 0.0};
    for (std::size_t k = 0; k < reference.rows.size(); ++k) {
      const double ref = reference.rows[k].*get;
      if (std::abs(ref) <= floor_fraction * top || ref == 0.0) continue;
      const double rel = std::abs(candidate.rows[k].*get - ref) / std::abs(ref);
      if (rel > dev.max_rel) dev = {name, rel, reference.rows[k].delta};
    }
    out.columns.push_back(dev);
  }
  return out;
}

/// Analytic counterpart used when comparing against the numeric solve.
inline SweepMode default_analytic_mode(const ModelParams& p) {
  return (p.omega_ab == 0.0 && p.omega_bc == 0.0) ? SweepMode::analytic_2ph
                                                  : SweepMode::analytic_cascade;
}

struct CompareOutcome {
  SweepResult numeric;
  SweepResult analytic;
  SweepMode analytic_mode;
  SweepComparison deviation;
};

inline CompareOutcome compare_sweep(const SweepConfig& c, std::optional<SweepMode> analytic = {},
                                    unsigned threads = 0, double floor_fraction = 0.01) {
  SweepConfig num = c;
  num.mode = SweepMode::numeric;
  SweepConfig ana = c;
  ana.mode = analytic.value_or(default_analytic_mode(c.params));
  if (ana.mode == SweepMode::numeric || ana.mode == SweepMode::compare) {
    throw ValidationError("comparison needs an analytic mode");
  }
  CompareOutcome out{run_sweep(num, threads), run_sweep(ana, threads), ana.mode, {}};
  out.deviation = compare_results(out.numeric, out.analytic, floor_fraction);
  return out;
}

// ---------------------------------------------------------------------------
// Presets

struct Preset {
  std::string name;
  std::string description;
  std::vector<SweepConfig> sweeps;
};

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"fig2",      "fig4",      "fig5",
                                                 "fig_delta", "fig_alpha", "fig_uv"};
  return names;
}

inline Preset preset(std::string_view name) {
  auto strong = [] {
    SweepConfig c;
    c.params.omega_ab = 1.0;
    c.params.omega_bc = 1.0;
    c.params.gamma_b = 0.15;
    return c;
  };
  if (name == "fig2") {
    SweepConfig c;
    c.params.q = 1e-4;
    c.params.gamma_b = 1.0;
    return {"fig2", "two-photon driving only, weak field", {c}};
  }
  if (name == "fig4") {
    SweepConfig c;
    c.params.omega_ab = 0.01;
    c.params.omega_bc = 0.01;
    c.params.gamma_b = 1.0;
    return {"fig4", "weak one-photon cascade driving", {c}};
  }
  if (name == "fig5") return {"fig5", "strong one-photon cascade driving", {strong()}};
  if (name == "fig_delta") {
    SweepConfig c = strong();
    c.params.delta_1ph = 0.3;
    return {"fig_delta", "strong cascade driving, intermediate level offset 0.3", {c}};
  }
  if (name == "fig_alpha") {
    Preset p{"fig_alpha", "strong cascade driving, gamma_b = alpha * gamma_u", {}};
    for (const auto& [alpha, tag] : {std::pair{2.0, "alpha2"}, std::pair{0.3, "alpha0.3"},
                                     std::pair{0.02, "alpha0.02"}}) {
      SweepConfig c = strong();
      c.params.gamma_b = alpha * c.params.gamma_u;
      c.tag = tag;
      p.sweeps.push_back(c);
    }
    return p;
  }
  if (name == "fig_uv") {
    SweepConfig c = strong();
    c.params.gamma_u = 0.7;
    c.params.gamma_v = 0.3;
    return {"fig_uv", "strong cascade driving, unequal upper decay rates", {c}};
  }
  std::string list;
  for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
  throw ValidationError("unknown preset '" + std::string(name) + "'; available: " + list);
}

// ---------------------------------------------------------------------------
// key = value configuration

inline double parse_number(std::string_view key, std::string_view value) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    throw ValidationError("invalid number for " + std::string(key) + ": '" + std::string(value) +
                          "'");
  }
  return v;
}

/// Applies one setting; keys are the ModelParams / SweepConfig field names.
inline void apply_setting(SweepConfig& c, std::string_view key, std::string_view value) {
  ModelParams& p = c.params;
  const std::map<std::string_view, double*> fields = {
      {"omega_ab", &p.omega_ab}, {"omega_bc", &p.omega_bc},   {"q", &p.q},
      {"omega12", &p.omega12},   {"delta_2ph", &p.delta_2ph}, {"delta_1ph", &p.delta_1ph},
      {"gamma_u", &p.gamma_u},   {"gamma_v", &p.gamma_v},     {"gamma_b", &p.gamma_b},
      {"p_u", &p.p_u},           {"p_v", &p.p_v},             {"delta_min", &c.delta_min},
      {"delta_max", &c.delta_max}};
  if (const auto it = fields.find(key); it != fields.end()) {
    *it->second = parse_number(key, value);
  } else if (key == "gamma_d") {
    p.gamma_d = parse_number(key, value);
  } else if (key == "points") {
    const double v = parse_number(key, value);
    if (v != std::floor(v) || v < 0 || v > 1e7) {
      throw ValidationError("points must be a non-negative integer");
    }
    c.points = static_cast<int>(v);
  } else if (key == "mode") {
    c.mode = parse_mode(value);
  } else if (key == "transcription") {
    if (value == "corrected") c.transcription = Transcription::corrected;
    else if (value == "literal") c.transcription = Transcription::literal;
    else throw ValidationError("transcription must be corrected or literal");
  } else if (key == "out") {
    c.output_path = std::string(value);
  } else {
    throw ValidationError("unknown setting '" + std::string(key) + "'");
  }
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

/// Flat `key = value` lines; `#` starts a comment.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& is) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(s.substr(0, eq));
    const auto value = trim(s.substr(eq + 1));
    if (key.empty()) {
      throw ValidationError("config line " + std::to_string(line_no) + ": empty key");
    }
    out.emplace_back(std::string(key), std::string(value));
  }
  return out;
}

inline void apply_config_file(SweepConfig& c, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config '" + path + "'");
  for (const auto& [k, v] : parse_key_values(is)) {
    try {
      apply_setting(c, k, v);
    } catch (const ValidationError& e) {
      throw ValidationError(path + ": " + e.what());
    }
  }
}

}  // namespace qif
