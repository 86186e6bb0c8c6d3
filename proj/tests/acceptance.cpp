// Acceptance suite: one [PASS]/[FAIL] line per criterion, followed by
// indented diagnostics. Exit status is nonzero if any criterion fails.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qif/qif.hpp"

namespace {

using namespace qif;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void note(const std::string& what) { notes.push_back("info " + what); }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SweepConfig only(const std::string& name) { return preset(name).sweeps.front(); }

SweepResult sweep(SweepConfig c, SweepMode mode = SweepMode::numeric) {
  c.mode = mode;
  return run_sweep(c);
}

double grid_step(const SweepResult& r) { return r.rows[1].delta - r.rows[0].delta; }

std::size_t nearest(const SweepResult& r, double delta) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < r.rows.size(); ++k) {
    if (std::abs(r.rows[k].delta - delta) < std::abs(r.rows[best].delta - delta)) best = k;
  }
  return best;
}

double max_rel(const std::vector<double>& ref, const std::vector<double>& got) {
  double m = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    if (ref[k] != 0.0) m = std::max(m, std::abs(got[k] - ref[k]) / std::abs(ref[k]));
  }
  return m;
}

std::vector<double> column(const SweepResult& r, double SweepRow::*field) {
  std::vector<double> v;
  for (const auto& row : r.rows) v.push_back(row.*field);
  return v;
}

std::string locations(const PeakReport& rep) {
  std::ostringstream os;
  os << '[';
  for (std::size_t k = 0; k < rep.peaks.size(); ++k) {
    os << (k ? ", " : "") << rep.peaks[k].delta_location;
  }
  os << ']';
  return os.str();
}

bool has_peak_near(const PeakReport& rep, double where, double tol) {
  return std::any_of(rep.peaks.begin(), rep.peaks.end(), [&](const Peak& p) {
    return std::abs(p.delta_location - where) <= tol * (1 + 1e-9);
  });
}

// Three peaks for I_u and two for I_v, central I_u peak at -2 delta_1ph.
void check_peak_dichotomy(Outcome& o, const SweepConfig& c, const char* tag) {
  const SweepResult r = sweep(c);
  const double step = grid_step(r);
  const PeakReport u = detect_peaks(r, Trace::i_u);
  const PeakReport v = detect_peaks(r, Trace::i_v);
  const double center = -2.0 * c.params.delta_1ph / detuning_unit(c.params) + 0.0;
  o.require(u.peaks.size() == 3,
            fmt("%s: I_u has %zu peaks (expect 3) at %s", tag, u.peaks.size(), locations(u).c_str()));
  o.require(v.peaks.size() == 2,
            fmt("%s: I_v has %zu peaks (expect 2) at %s", tag, v.peaks.size(), locations(v).c_str()));
  o.require(has_peak_near(u, center, step),
            fmt("%s: I_u peak within one grid step of delta = %.3f", tag, center));
}

Outcome criterion1() {
  Outcome o;
  const SweepConfig c = only("fig2");
  const SweepResult num = sweep(c);
  const SweepResult ana = sweep(c, SweepMode::analytic_2ph);  // mapped to model labels
  const double e11 = max_rel(column(ana, &SweepRow::rho11), column(num, &SweepRow::rho11));
  const double e22 = max_rel(column(ana, &SweepRow::rho22), column(num, &SweepRow::rho22));
  const double e12 = max_rel(column(ana, &SweepRow::re_rho12), column(num, &SweepRow::re_rho12));
  o.require(e11 <= 1e-3, fmt("rho11 max relative error %.3e (<= 1e-3)", e11));
  o.require(e22 <= 1e-3, fmt("rho22 max relative error %.3e (<= 1e-3)", e22));
  o.require(e12 <= 1e-3, fmt("Re rho12 max relative error %.3e (<= 1e-3)", e12));
  // Literal labels: the closed-form rho11 is resonant at -omega12/2, which is a2 here.
  const double literal = max_rel(column(ana, &SweepRow::rho22), column(num, &SweepRow::rho11));
  o.note(fmt("closed-form rho11 compared with numeric rho11 (unmapped labels): %.3e", literal));
  return o;
}

Outcome criterion2() {
  Outcome o;
  const SweepResult num = sweep(only("fig2"));
  const double at0 = num.rows[nearest(num, 0.0)].i_v;
  const double at3 = num.rows[nearest(num, -3.0)].i_v;
  const double ratio = at0 / at3;
  o.require(ratio <= 0.005, fmt("I_v(0)/I_v(-3) = %.6f (<= 0.005)", ratio));
  o.note(fmt("I_v(0) = %.6e, I_v(-3) = %.6e", at0, at3));
  SweepConfig a = only("fig2");
  a.mode = SweepMode::analytic_2ph;
  const double ana = evaluate_point(a, 0.0).i_v / evaluate_point(a, -3.0).i_v;
  o.note(fmt("closed-form ratio %.6f", ana));
  return o;
}

Outcome criterion3() {
  Outcome o;
  for (const auto& [q, tag] : {std::pair{1e-4, "weak Q=1e-4"}, std::pair{1.0, "strong Q=1"}}) {
    SweepConfig c = only("fig2");
    c.params.q = q;
    const SweepResult r = sweep(c);
    const double step = grid_step(r);
    for (Trace t : {Trace::i_u, Trace::i_v, Trace::i_p0}) {
      const PeakReport rep = detect_peaks(r, t);
      const bool count = rep.peaks.size() == 2;
      o.require(count, fmt("%s %s: %zu peaks at %s", tag, std::string(to_string(t)).c_str(),
                           rep.peaks.size(), locations(rep).c_str()));
      o.require(count && has_peak_near(rep, -3.0, step) && has_peak_near(rep, 3.0, step),
                fmt("%s %s: peaks at +/-3 within one grid step", tag,
                    std::string(to_string(t)).c_str()));
    }
  }
  return o;
}

Outcome criterion4() {
  Outcome o;
  check_peak_dichotomy(o, only("fig4"), "fig4");
  return o;
}

Outcome criterion5() {
  Outcome o;
  const SweepConfig c = only("fig5");
  check_peak_dichotomy(o, c, "fig5");
  double worst_herm = 0.0, worst_trace = 0.0, worst_eig = 0.0;
  for (double delta : delta_grid(c.delta_min, c.delta_max, c.points)) {
    ModelParams p = c.params;
    p.delta_2ph = delta * detuning_unit(p);
    const PointSolution s = solve_point(p);
    worst_herm = std::max(worst_herm, hermiticity_error(s.rho.op()));
    worst_trace = std::max(worst_trace, std::abs(trace(s.rho.op()) - 1.0));
    worst_eig = std::min(worst_eig, min_eigenvalue(s.rho.op()));
  }
  o.require(worst_herm <= kHermitianTol, fmt("max Hermiticity error %.2e", worst_herm));
  o.require(worst_trace <= kTraceTol, fmt("max trace error %.2e", worst_trace));
  o.require(worst_eig >= -kPositivityFloor, fmt("min eigenvalue %.2e", worst_eig));
  return o;
}

Outcome criterion6() {
  Outcome o;
  const SweepConfig c = only("fig_delta");
  const SweepResult r = sweep(c);
  const PeakReport u = detect_peaks(r, Trace::i_u);
  const double center = -2.0 * c.params.delta_1ph / detuning_unit(c.params) + 0.0;
  o.require(has_peak_near(u, center, grid_step(r)),
            fmt("I_u maximum within one grid step of %.2f; peaks at %s", center,
                locations(u).c_str()));
  return o;
}

Outcome criterion7() {
  Outcome o;
  std::vector<double> ratios;
  for (const SweepConfig& c : preset("fig_alpha").sweeps) {
    const SweepResult r = sweep(c);
    const PeakReport u = detect_peaks(r, Trace::i_u);
    const double central = r.rows[nearest(r, -2.0 * c.params.delta_1ph / detuning_unit(c.params))].i_u;
    if (u.peaks.size() < 2) {
      o.require(false, fmt("%s: fewer than two I_u side peaks", c.tag.c_str()));
      return o;
    }
    const double side = 0.5 * (u.peaks.front().height + u.peaks.back().height);
    ratios.push_back(central / side);
    o.note(fmt("%s: central %.4e, mean side %.4e, ratio %.4f, peaks at %s", c.tag.c_str(), central,
               side, central / side, locations(u).c_str()));
  }
  o.require(ratios[0] < ratios[1] && ratios[1] < ratios[2],
            fmt("ratio strictly increases as alpha decreases: %.4f < %.4f < %.4f", ratios[0],
                ratios[1], ratios[2]));
  return o;
}

Outcome criterion8() {
  Outcome o;
  check_peak_dichotomy(o, only("fig_uv"), "fig_uv");
  return o;
}

Outcome criterion9() {
  Outcome o;
  const std::vector<std::pair<std::string, DensityMatrix>> starts = {
      {"ground", DensityMatrix::pure(Level::c)},
      {"upper a1", DensityMatrix::pure(Level::a1)},
      {"maximally mixed", DensityMatrix::maximally_mixed()}};
  for (const std::string name : {"fig4", "fig5"}) {
    const SweepConfig c = only(name);
    for (double delta : {-3.0, 0.0, 3.0}) {
      ModelParams p = c.params;
      p.delta_2ph = delta * detuning_unit(p);
      const Liouvillian L = build_model_liouvillian(p);
      const DensityMatrix target = steady_state(L).rho;
      const double t_final = 50.0 / detail::upper_coherence_rate(p);
      double worst = 0.0;
      for (const auto& [label, rho0] : starts) {
        const DensityMatrix rho = time_evolve(L, rho0, t_final, default_time_step(p));
        worst = std::max(worst, trace_distance(rho.op(), target.op()));
      }
      o.require(worst <= 1e-6,
                fmt("%s delta=%+.0f: worst trace distance %.2e over 3 initial states", name.c_str(),
                    delta, worst));
    }
  }
  return o;
}

Outcome criterion10() {
  Outcome o;
  SweepConfig c = only("fig4");
  c.params.omega_ab = c.params.omega_bc = 1e-3;
  const SweepResult stage = sweep(c, SweepMode::cascade_solver);
  const SweepResult closed = sweep(c, SweepMode::analytic_cascade);
  const SweepResult num = sweep(c);
  const double e_closed = std::max(max_rel(column(closed, &SweepRow::rho11), column(stage, &SweepRow::rho11)),
                                   max_rel(column(closed, &SweepRow::rho22), column(stage, &SweepRow::rho22)));
  const double e_num = std::max(max_rel(column(num, &SweepRow::rho11), column(stage, &SweepRow::rho11)),
                                max_rel(column(num, &SweepRow::rho22), column(stage, &SweepRow::rho22)));
  o.require(e_closed <= 1e-6, fmt("cascade_solver vs closed-form populations: %.3e (<= 1e-6)", e_closed));
  o.require(e_num <= 1e-3, fmt("cascade_solver vs numeric populations: %.3e (<= 1e-3)", e_num));

  // rho_bb is adjudicated with unequal drives, where the two candidate forms differ.
  SweepConfig u = c;
  u.params.omega_ab = 2e-3;
  std::vector<double> staged, corrected, literal;
  for (double delta : delta_grid(u.delta_min, u.delta_max, u.points)) {
    ModelParams p = u.params;
    p.delta_2ph = delta * detuning_unit(p);
    staged.push_back(cascade_solver(p).rho_bb);
    corrected.push_back(cascade_weak(p, Transcription::corrected).rho_bb);
    literal.push_back(cascade_weak(p, Transcription::literal).rho_bb);
  }
  const double e_bb = max_rel(corrected, staged);
  o.require(e_bb <= 1e-6,
            fmt("rho_bb vs Omega_bc^2/[(D/2+d)^2+gamma_b^2/4] at Omega_ab=2 Omega_bc: %.3e", e_bb));
  o.note(fmt("documented discrepancy: printed Omega_ab*Omega_bc form deviates by %.3e",
             max_rel(literal, staged)));
  return o;
}

nlohmann::json audit_json(const ModelParams& p, double numeric) {
  nlohmann::json j;
  j["delta_2ph"] = p.delta_2ph;
  j["omega12"] = p.omega12;
  j["numeric"] = numeric;
  j["printed_sum"] = appendix_coherence(p);
  j["derived_sum"] = cascade_coherence_terms(p).sum();
  j["r1"] = r1_coherence(p);
  for (const AddendAudit& a : audit_appendix(p)) {
    j["addends"].push_back({{"index", a.index},
                            {"printed", a.printed},
                            {"derived", a.derived},
                            {"rel_error", a.rel_error},
                            {"agrees", a.agrees}});
  }
  return j;
}

Outcome criterion11() {
  Outcome o;
  const SweepConfig c = only("fig4");
  const SweepResult num = sweep(c);
  double top = 0.0;
  for (const auto& row : num.rows) top = std::max(top, std::abs(row.re_rho12));
  double worst_printed = 0.0, worst_derived = 0.0, at = 0.0;
  for (const auto& row : num.rows) {
    if (std::abs(row.re_rho12) < 0.01 * top) continue;
    ModelParams p = c.params;
    p.delta_2ph = row.delta * detuning_unit(p);
    const double e = std::abs(appendix_coherence(p) - row.re_rho12) / std::abs(row.re_rho12);
    if (e > worst_printed) worst_printed = e, at = row.delta;
    worst_derived = std::max(worst_derived, std::abs(cascade_coherence_terms(p).sum() - row.re_rho12) /
                                                std::abs(row.re_rho12));
  }
  o.require(worst_printed <= 0.1,
            fmt("printed coherence vs numeric Re rho12: worst %.3e at delta=%.2f (<= 0.1)",
                worst_printed, at));
  o.note(fmt("derived four-addend coherence vs numeric: worst %.3e", worst_derived));

  ModelParams wide = c.params;
  wide.omega12 = 100.0 * std::max({wide.gamma_u, wide.gamma_v, wide.gamma_b, wide.omega_ab});
  wide.delta_2ph = -2.0 * wide.delta_1ph;
  const double r1 = r1_coherence(wide);
  const double printed = appendix_coherence(wide);
  const double derived = cascade_coherence_terms(wide).sum();
  o.require(std::abs(printed - r1) <= 0.01 * std::abs(r1),
            fmt("omega12=%.0f: printed %.4e vs large-splitting limit %.4e", wide.omega12, printed, r1));
  o.note(fmt("omega12=%.0f: derived %.4e vs large-splitting limit (rel %.2e)", wide.omega12, derived,
             std::abs(derived - r1) / std::abs(r1)));

  ModelParams center = c.params;
  center.delta_2ph = 0.0;
  const double num0 = num.rows[nearest(num, 0.0)].re_rho12;
  o.notes.push_back("audit " + audit_json(center, num0).dump());
  o.notes.push_back("audit " + audit_json(wide, solve_point(wide).rho(Level::a1, Level::a2).real()).dump());
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"two-photon weak-field agreement", criterion1},
      {"destructive-interference suppression of I_v", criterion2},
      {"two peaks under two-photon driving (weak and strong)", criterion3},
      {"3-vs-2 peak counts, weak cascade driving", criterion4},
      {"3-vs-2 peak counts and invariants, strong cascade driving", criterion5},
      {"detuned central peak at -2 delta_1ph", criterion6},
      {"central/side ratio grows as alpha decreases", criterion7},
      {"3-vs-2 peak counts with unequal upper rates", criterion8},
      {"time evolution converges to the linear-solve steady state", criterion9},
      {"cascade solver consistency", criterion10},
      {"long-form coherence expression audit", criterion11},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << k + 1 << ' ' << criteria[k].first << '\n';
    for (const auto& n : o.notes) std::cout << "         " << n << '\n';
    if (!o.pass) ++failed;
  }
  std::cout << criteria.size() - failed << '/' << criteria.size() << " criteria pass\n";
  return failed == 0 ? 0 : 1;
}
