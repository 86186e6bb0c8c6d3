#pragma once

// Liouvillian construction, stationary states and a fixed-step RK4
// propagator for master equations of the form
//
//   d rho / dt = -i [H, rho] + sum_k D[C_k] rho,
//   D[A] B     = A B A^+ - 1/2 (A^+ A B + B A^+ A).
//
// Superoperators act on column-stacked vectors (see core.hpp).

#include <cmath>
#include <compare>
#include <cstddef>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qif/core.hpp"

namespace qif {

/// Lindblad jump operator with the rate already absorbed (D[op] enters
/// with unit weight).
struct CollapseOperator {
  Operator op;
  std::string label;
};

inline Operator dissipator_apply(const Operator& a, const Operator& b) {
  Operator::same_dim(a, b);
  const Matrix& A = a.matrix();
  const Matrix& B = b.matrix();
  const Matrix ada = A.adjoint() * A;
  return Operator(Matrix(A * B * A.adjoint() - 0.5 * (ada * B + B * ada)));
}

namespace detail {

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// vec(A X) = (I kron A) vec(X)
inline Matrix left_multiplier(const Matrix& a) {
  return kron(Matrix::Identity(a.rows(), a.cols()), a);
}

// vec(X B) = (B^T kron I) vec(X)
inline Matrix right_multiplier(const Matrix& b) {
  return kron(b.transpose(), Matrix::Identity(b.rows(), b.cols()));
}

inline double inf_norm(const Matrix& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace detail

/// Generator of the master equation on vectorized density matrices.
class Liouvillian {
 public:
  Liouvillian(Matrix matrix, Operator hamiltonian, std::vector<CollapseOperator> collapses)
      : matrix_(std::move(matrix)),
        hamiltonian_(std::move(hamiltonian)),
        collapses_(std::move(collapses)) {}

  const Matrix& matrix() const noexcept { return matrix_; }
  const Operator& hamiltonian() const noexcept { return hamiltonian_; }
  const std::vector<CollapseOperator>& collapses() const noexcept { return collapses_; }
  std::size_t dim() const noexcept { return hamiltonian_.dim(); }

  Operator apply(const Operator& rho) const {
    if (rho.dim() != dim()) throw DimensionError("state dimension does not match Liouvillian");
    return unvectorize(matrix_ * vectorize(rho), dim());
  }

  double inf_norm() const { return detail::inf_norm(matrix_); }

 private:
  Matrix matrix_;
  Operator hamiltonian_;
  std::vector<CollapseOperator> collapses_;
};

inline Liouvillian build_liouvillian(const Operator& hamiltonian,
                                     std::vector<CollapseOperator> collapses) {
  if (!hamiltonian.matrix().allFinite()) throw ValidationError("Hamiltonian has non-finite entries");
  if (const double e = hermiticity_error(hamiltonian); e > kHermitianTol) {
    throw ValidationError("Hamiltonian is not Hermitian (error " + std::to_string(e) + ")");
  }
  const cplx i(0.0, 1.0);
  const Matrix& H = hamiltonian.matrix();
  Matrix L = -i * (detail::left_multiplier(H) - detail::right_multiplier(H));
  for (const auto& c : collapses) {
    Operator::same_dim(c.op, hamiltonian);
    if (!c.op.matrix().allFinite()) {
      throw ValidationError("collapse operator '" + c.label + "' has non-finite entries");
    }
    const Matrix& C = c.op.matrix();
    const Matrix cdc = C.adjoint() * C;
    L += detail::kron(C.conjugate(), C) - 0.5 * detail::left_multiplier(cdc) -
         0.5 * detail::right_multiplier(cdc);
  }
  return Liouvillian(std::move(L), hamiltonian, std::move(collapses));
}

struct SteadyState {
  DensityMatrix rho;
  double residual;  ///< ||L vec(rho)||_inf
};

/// Stationary state of `L`. The equation for the (anchor, anchor) element is
/// replaced by the trace condition. The unknown is the deviation from
/// |anchor><anchor|, which keeps tiny populations accurate next to an O(1)
/// anchor population; two rounds of iterative refinement follow the solve.
inline SteadyState steady_state(const Liouvillian& L, Level anchor = Level::c) {
  const std::size_t n = L.dim();
  const auto nn = static_cast<Eigen::Index>(n * n);
  const std::size_t a = index(anchor);
  if (a >= n) throw DimensionError("anchor level outside the Liouvillian's space");
  const auto k = static_cast<Eigen::Index>(vec_index(a, a, n));

  Matrix M = L.matrix();
  M.row(k).setZero();
  for (std::size_t i = 0; i < n; ++i) M(k, static_cast<Eigen::Index>(vec_index(i, i, n))) = 1.0;

  Eigen::FullPivLU<Matrix> lu(M);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) {
    throw NonUniqueSteadyState("trace-constrained Liouvillian is singular (rank " +
                               std::to_string(lu.rank()) + " of " + std::to_string(nn) +
                               "): steady state is not unique");
  }

  SuperVector ground = SuperVector::Zero(nn);
  ground(k) = 1.0;
  SuperVector rhs = -(M * ground);
  rhs(k) = 0.0;
  SuperVector x = lu.solve(rhs);
  for (int round = 0; round < 2; ++round) x += lu.solve(SuperVector(rhs - M * x));
  if (!x.allFinite()) throw NonUniqueSteadyState("steady-state solve produced non-finite values");

  const Operator raw = unvectorize(ground + x, n);
  Operator rho_op = hermitize(raw);
  rho_op = (1.0 / trace(rho_op).real()) * rho_op;

  const double residual = (L.matrix() * vectorize(rho_op)).cwiseAbs().maxCoeff();
  const double bound = 1e-10 * std::max(1.0, L.inf_norm());
  if (residual > bound) {
    throw SolverError("steady-state residual " + std::to_string(residual) + " exceeds " +
                      std::to_string(bound));
  }
  try {
    return SteadyState{DensityMatrix(std::move(rho_op)), residual};
  } catch (const ValidationError& e) {
    throw SolverError(std::string("steady state violates density-matrix invariants: ") +
                      e.what());
  }
}

/// Fixed-step classical RK4 integration of d vec(rho)/dt = L vec(rho).
/// The step is shrunk so that an integer number of steps lands on t_final.
inline DensityMatrix time_evolve(const Liouvillian& L, const DensityMatrix& rho0,
                                 double t_final, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("time step must be positive");
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) {
    throw ValidationError("final time must be non-negative");
  }
  if (L.dim() != kLevels) throw DimensionError("time_evolve expects a five-level Liouvillian");

  const Matrix& G = L.matrix();
  SuperVector x = vectorize(rho0.op());
  const auto steps = static_cast<long long>(std::ceil(t_final / dt));
  const double h = steps > 0 ? t_final / static_cast<double>(steps) : 0.0;
  const cplx trace0 = trace(rho0.op());

  SuperVector k1, k2, k3, k4;
  for (long long s = 0; s < steps; ++s) {
    k1 = G * x;
    k2 = G * (x + 0.5 * h * k1);
    k3 = G * (x + 0.5 * h * k2);
    k4 = G * (x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) {
      throw IntegrationFailure("state became non-finite", static_cast<double>(s + 1) * h);
    }
  }

  Operator rho = unvectorize(x);
  const double drift = std::abs(trace(rho) - trace0);
  if (drift > 1e-8) throw IntegrationFailure("trace drift " + std::to_string(drift), t_final);
  try {
    return DensityMatrix::normalized(rho);
  } catch (const ValidationError& e) {
    throw IntegrationFailure(std::string("propagated state invalid: ") + e.what(), t_final);
  }
}

/// Density-matrix element (row, col), printed as rho_<row><col>.
struct ElementLabel {
  Level row;
  Level col;

  friend auto operator<=>(const ElementLabel&, const ElementLabel&) = default;

  std::string str() const {
    return "rho_" + std::string(short_name(row)) + std::string(short_name(col));
  }
};

struct EomTerm {
  ElementLabel source;
  cplx coefficient;
};

using EomRows = std::map<ElementLabel, std::vector<EomTerm>>;

/// One Liouvillian row per element: d rho_ij/dt = sum coefficient * rho_kl.
/// Coefficients with magnitude below `drop_tol * ||L||_inf` are omitted.
inline EomRows eom_rows(const Liouvillian& L, double drop_tol = 1e-14) {
  if (L.dim() != kLevels) throw DimensionError("eom_rows expects a five-level Liouvillian");
  const double cutoff = drop_tol * std::max(1.0, L.inf_norm());
  EomRows rows;
  for (Level i : kAllLevels) {
    for (Level j : kAllLevels) {
      const auto r = static_cast<Eigen::Index>(vec_index(index(i), index(j)));
      auto& terms = rows[ElementLabel{i, j}];
      for (Level k : kAllLevels) {
        for (Level l : kAllLevels) {
          const cplx c = L.matrix()(r, static_cast<Eigen::Index>(vec_index(index(k), index(l))));
          if (std::abs(c) > cutoff) terms.push_back(EomTerm{ElementLabel{k, l}, c});
        }
      }
    }
  }
  return rows;
}

/// Coefficient of `source` in the row for `element`, zero when absent.
inline cplx eom_coefficient(const EomRows& rows, ElementLabel element, ElementLabel source) {
  const auto it = rows.find(element);
  if (it == rows.end()) return {};
  for (const auto& t : it->second) {
    if (t.source == source) return t.coefficient;
  }
  return {};
}

inline std::string format_eom_row(const EomRows& rows, ElementLabel element) {
  std::ostringstream os;
  os << "d/dt " << element.str() << " =";
  const auto it = rows.find(element);
  if (it == rows.end() || it->second.empty()) {
    os << " 0";
    return os.str();
  }
  for (const auto& t : it->second) {
    os << " + (" << t.coefficient.real() << (t.coefficient.imag() < 0 ? "" : "+")
       << t.coefficient.imag() << "i)*" << t.source.str();
  }
  return os.str();
}

}  // namespace qif
