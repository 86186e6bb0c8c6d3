#pragma once

// Five-level molecule: upper doublet a1/a2, intermediate levels b (visible
// branch) and d (ultraviolet branch), ground c. Rotating-frame Hamiltonian,
// interference-bearing decay channels and fluorescent intensities.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qif/core.hpp"
#include "qif/lindblad.hpp"

namespace qif {

/// Physical knobs of the model. All frequencies and rates share one
/// arbitrary unit.
struct ModelParams {
  double omega_ab = 0.0;   ///< one-photon Rabi frequency b <-> a1, a2
  double omega_bc = 0.0;   ///< one-photon Rabi frequency c <-> b
  double q = 0.0;          ///< two-photon Rabi frequency c <-> a1, a2
  double omega12 = 6.0;    ///< upper-doublet splitting
  double delta_2ph = 0.0;  ///< two-photon detuning
  double delta_1ph = 0.0;  ///< offset of b from half the upper-doublet energy
  double gamma_u = 0.5;    ///< upper-level decay rate to d
  double gamma_v = 0.5;    ///< upper-level decay rate to b
  double gamma_b = 1.0;
  std::optional<double> gamma_d;  ///< defaults to gamma_b
  double p_u = -1.0;
  double p_v = 1.0;

  double gamma_d_value() const { return gamma_d.value_or(gamma_b); }
};

inline void validate(const ModelParams& p) {
  auto finite = [](double v, const char* what) {
    if (!std::isfinite(v)) throw ValidationError(std::string(what) + " must be finite");
  };
  auto positive = [&](double v, const char* what) {
    finite(v, what);
    if (!(v > 0.0)) throw ValidationError(std::string(what) + " must be > 0, got " + std::to_string(v));
  };
  auto nonnegative = [&](double v, const char* what) {
    finite(v, what);
    if (v < 0.0) throw ValidationError(std::string(what) + " must be >= 0, got " + std::to_string(v));
  };
  auto polarization = [&](double v, const char* what) {
    finite(v, what);
    if (std::abs(v) > 1.0) {
      throw ValidationError(std::string(what) + " must lie in [-1, 1], got " + std::to_string(v));
    }
  };
  nonnegative(p.omega_ab, "omega_ab");
  nonnegative(p.omega_bc, "omega_bc");
  nonnegative(p.q, "q");
  positive(p.omega12, "omega12");
  finite(p.delta_2ph, "delta_2ph");
  finite(p.delta_1ph, "delta_1ph");
  positive(p.gamma_u, "gamma_u");
  positive(p.gamma_v, "gamma_v");
  positive(p.gamma_b, "gamma_b");
  positive(p.gamma_d_value(), "gamma_d");
  polarization(p.p_u, "p_u");
  polarization(p.p_v, "p_v");
}

/// Interaction-picture Hamiltonian. |d> couples only dissipatively, so its
/// diagonal entry (`d_shift`, normally 0) has no observable effect.
inline Operator build_hamiltonian(const ModelParams& p, double d_shift = 0.0) {
  validate(p);
  using enum Level;
  Matrix h = Matrix::Zero(kLevels, kLevels);
  h(index(a1), index(a1)) = p.omega12 / 2.0 - p.delta_2ph;
  h(index(a2), index(a2)) = -p.omega12 / 2.0 - p.delta_2ph;
  h(index(b), index(b)) = -p.delta_2ph / 2.0 - p.delta_1ph;
  h(index(d), index(d)) = d_shift;
  for (Level upper : {a1, a2}) {
    h(index(upper), index(b)) = p.omega_ab;
    h(index(b), index(upper)) = p.omega_ab;
    h(index(upper), index(c)) = p.q;
    h(index(c), index(upper)) = p.q;
  }
  h(index(b), index(c)) = p.omega_bc;
  h(index(c), index(b)) = p.omega_bc;
  return Operator(std::move(h));
}

/// Decay channels: symmetric and antisymmetric upper-doublet combinations
/// into b and d weighted by (1 +/- p), then b -> c and d -> c.
/// Channels with a zero rate factor are omitted.
inline std::vector<CollapseOperator> build_collapse_ops(const ModelParams& p) {
  validate(p);
  using enum Level;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  std::vector<CollapseOperator> out;
  auto add = [&](double rate, const Operator& op, const char* label) {
    if (rate > 0.0) out.push_back({std::sqrt(rate) * op, label});
  };
  auto branch = [&](Level target, double gamma, double pol, const char* plus, const char* minus) {
    const Operator to_sym = inv_sqrt2 * (ket_bra(target, a1) + ket_bra(target, a2));
    const Operator to_anti = inv_sqrt2 * (ket_bra(target, a1) - ket_bra(target, a2));
    add(gamma * (1.0 + pol), to_sym, plus);
    add(gamma * (1.0 - pol), to_anti, minus);
  };
  branch(b, p.gamma_v, p.p_v, "visible_sym", "visible_anti");
  branch(d, p.gamma_u, p.p_u, "uv_sym", "uv_anti");
  add(p.gamma_b, ket_bra(c, b), "b_to_c");
  add(p.gamma_d_value(), ket_bra(c, d), "d_to_c");
  return out;
}

inline Liouvillian build_model_liouvillian(const ModelParams& p, double d_shift = 0.0) {
  return build_liouvillian(build_hamiltonian(p, d_shift), build_collapse_ops(p));
}

/// Fluorescent intensity gamma (rho11 + rho22 + 2 p Re rho12) from the
/// upper-doublet elements. Roundoff negatives down to -1e-12 are clipped.
inline double intensity_from(double rho11, double rho22, double re_rho12, double gamma,
                             double p) {
  if (!(std::abs(p) <= 1.0)) {
    throw ValidationError("polarization p must lie in [-1, 1], got " + std::to_string(p));
  }
  if (!(gamma > 0.0)) throw ValidationError("decay rate must be positive");
  const double value = gamma * (rho11 + rho22 + 2.0 * p * re_rho12);
  return (value < 0.0 && value >= -1e-12) ? 0.0 : value;
}

inline double intensity(const DensityMatrix& rho, double gamma, double p) {
  using enum Level;
  return intensity_from(rho.population(a1), rho.population(a2), rho(a1, a2).real(), gamma, p);
}

/// <s|rho|s> for |s> = (|a1> + |a2>)/sqrt(2).
inline double symmetric_population(const DensityMatrix& rho) {
  using enum Level;
  return 0.5 * (rho(a1, a1) + rho(a2, a2) + rho(a1, a2) + rho(a2, a1)).real();
}

/// <a|rho|a> for |a> = (|a1> - |a2>)/sqrt(2).
inline double antisymmetric_population(const DensityMatrix& rho) {
  using enum Level;
  return 0.5 * (rho(a1, a1) + rho(a2, a2) - rho(a1, a2) - rho(a2, a1)).real();
}

struct IntensityTriple {
  double i_u = 0.0;
  double i_v = 0.0;
  double i_p0 = 0.0;  ///< ultraviolet branch with orthogonal dipoles (p = 0)
};

struct PointSolution {
  DensityMatrix rho;
  IntensityTriple intensities;
  double residual;
};

inline PointSolution solve_point(const ModelParams& p) {
  const Liouvillian L = build_model_liouvillian(p);
  SteadyState ss = steady_state(L);
  IntensityTriple it{intensity(ss.rho, p.gamma_u, p.p_u), intensity(ss.rho, p.gamma_v, p.p_v),
                     intensity(ss.rho, p.gamma_u, 0.0)};
  return PointSolution{std::move(ss.rho), it, ss.residual};
}

/// Reference RK4 step: 0.01 over the largest rate, Rabi frequency, splitting
/// or detuning magnitude in the parameter set.
inline double default_time_step(const ModelParams& p) {
  const double scale = std::max({p.omega_ab, p.omega_bc, p.q, p.omega12, std::abs(p.delta_2ph),
                                 std::abs(p.delta_1ph), p.gamma_u, p.gamma_v, p.gamma_b,
                                 p.gamma_d_value(), 1e-300});
  return 0.01 / scale;
}

}  // namespace qif
