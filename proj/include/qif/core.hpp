#pragma once

// Dense complex operators on the five-level molecular Hilbert space.
//
// Basis ordering is fixed across the library:
//   a1 -> 0, a2 -> 1, b -> 2, c -> 3, d -> 4
//
// Vectorization is column stacking: element (i, j) of an n x n operator
// lives at slot i + n * j of the vector. With this convention
//   vec(A X B) = (B^T kron A) vec(X).

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <string_view>

#include "qif/errors.hpp"

namespace qif {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using SuperVector = Eigen::VectorXcd;

inline constexpr std::size_t kLevels = 5;
inline constexpr std::size_t kLiouvilleDim = kLevels * kLevels;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPositivityFloor = 1e-9;

enum class Level : std::size_t { a1 = 0, a2 = 1, b = 2, c = 3, d = 4 };

inline constexpr std::array<Level, kLevels> kAllLevels = {Level::a1, Level::a2, Level::b,
                                                          Level::c, Level::d};

constexpr std::size_t index(Level l) noexcept { return static_cast<std::size_t>(l); }

constexpr Level level_at(std::size_t i) {
  if (i >= kLevels) throw DimensionError("level index out of range: " + std::to_string(i));
  return static_cast<Level>(i);
}

/// Short label as used in matrix-element names: 1, 2, b, c, d.
constexpr std::string_view short_name(Level l) noexcept {
  constexpr std::array<std::string_view, kLevels> names = {"1", "2", "b", "c", "d"};
  return names[index(l)];
}

constexpr std::string_view name(Level l) noexcept {
  constexpr std::array<std::string_view, kLevels> names = {"a1", "a2", "b", "c", "d"};
  return names[index(l)];
}

/// Square complex matrix. Immutable once built; arithmetic returns new values.
class Operator {
 public:
  explicit Operator(std::size_t dim) : m_(Matrix::Zero(checked(dim), dim)) {}

  explicit Operator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() == 0 || m_.rows() != m_.cols()) {
      throw DimensionError("operator must be square and non-empty, got " +
                           std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()));
    }
  }

  static Operator zero(std::size_t dim = kLevels) { return Operator(dim); }

  static Operator identity(std::size_t dim = kLevels) {
    return Operator(Matrix(Matrix::Identity(checked(dim), dim)));
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const Matrix& matrix() const noexcept { return m_; }

  cplx operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  cplx operator()(Level i, Level j) const { return m_(index(i), index(j)); }

  friend Operator operator+(const Operator& a, const Operator& b) {
    same_dim(a, b);
    return Operator(Matrix(a.m_ + b.m_));
  }
  friend Operator operator-(const Operator& a, const Operator& b) {
    same_dim(a, b);
    return Operator(Matrix(a.m_ - b.m_));
  }
  friend Operator operator*(const Operator& a, const Operator& b) {
    same_dim(a, b);
    return Operator(Matrix(a.m_ * b.m_));
  }
  friend Operator operator*(cplx s, const Operator& a) { return Operator(Matrix(s * a.m_)); }
  friend Operator operator*(const Operator& a, cplx s) { return s * a; }
  Operator operator-() const { return Operator(Matrix(-m_)); }

  friend bool operator==(const Operator& a, const Operator& b) {
    return a.dim() == b.dim() && a.m_ == b.m_;
  }

  static void same_dim(const Operator& a, const Operator& b) {
    if (a.dim() != b.dim()) {
      throw DimensionError("operator dimensions differ: " + std::to_string(a.dim()) + " vs " +
                           std::to_string(b.dim()));
    }
  }

 private:
  static std::size_t checked(std::size_t dim) {
    if (dim == 0) throw DimensionError("operator dimension must be positive");
    return dim;
  }

  Matrix m_;
};

inline Operator dagger(const Operator& a) { return Operator(Matrix(a.matrix().adjoint())); }

/// |i><j| on the five-level space.
inline Operator ket_bra(Level i, Level j) {
  Matrix m = Matrix::Zero(kLevels, kLevels);
  m(index(i), index(j)) = 1.0;
  return Operator(std::move(m));
}

inline cplx trace(const Operator& a) { return a.matrix().trace(); }

inline SuperVector vectorize(const Operator& a) {
  const auto n = static_cast<Eigen::Index>(a.dim());
  return Eigen::Map<const SuperVector>(a.matrix().data(), n * n);
}

inline Operator unvectorize(const SuperVector& v, std::size_t dim = kLevels) {
  const auto n = static_cast<Eigen::Index>(dim);
  if (dim == 0 || v.size() != n * n) {
    throw DimensionError("vector of length " + std::to_string(v.size()) +
                         " does not match a " + std::to_string(dim) + "x" +
                         std::to_string(dim) + " operator");
  }
  return Operator(Matrix(Eigen::Map<const Matrix>(v.data(), n, n)));
}

/// Slot of element (i, j) in the column-stacked vector.
constexpr std::size_t vec_index(std::size_t i, std::size_t j, std::size_t dim = kLevels) noexcept {
  return i + dim * j;
}

inline double hermiticity_error(const Operator& a) {
  return (a.matrix() - a.matrix().adjoint()).cwiseAbs().maxCoeff();
}

inline bool hermitian_check(const Operator& a, double tol = kHermitianTol) {
  return hermiticity_error(a) <= tol;
}

/// Smallest eigenvalue of the Hermitian part of `a`.
inline double min_eigenvalue(const Operator& a) {
  const Matrix h = 0.5 * (a.matrix() + a.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline bool positivity_check(const Operator& a, double tol = kPositivityFloor) {
  return min_eigenvalue(a) >= -tol;
}

inline Operator hermitize(const Operator& a) {
  return Operator(Matrix(0.5 * (a.matrix() + a.matrix().adjoint())));
}

/// Trace distance 1/2 ||a - b||_1 for Hermitian arguments.
inline double trace_distance(const Operator& a, const Operator& b) {
  const Matrix diff = (a - b).matrix();
  const Matrix h = 0.5 * (diff + diff.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline double max_abs(const Operator& a) { return a.matrix().cwiseAbs().maxCoeff(); }

/// Validated 5x5 state of the molecule: Hermitian, unit trace, positive
/// semidefinite within the library tolerances.
class DensityMatrix {
 public:
  /// Validates `op` as given; throws ValidationError naming the failed invariant.
  explicit DensityMatrix(Operator op) : op_(std::move(op)) {
    if (op_.dim() != kLevels) {
      throw DimensionError("density matrix must be 5x5, got dim " + std::to_string(op_.dim()));
    }
    if (!op_.matrix().allFinite()) throw ValidationError("density matrix has non-finite entries");
    if (const double e = hermiticity_error(op_); e > kHermitianTol) {
      throw ValidationError("density matrix not Hermitian (error " + std::to_string(e) + ")");
    }
    if (const double t = std::abs(trace(op_) - 1.0); t > kTraceTol) {
      throw ValidationError("density matrix trace deviates from 1 by " + std::to_string(t));
    }
    if (const double m = min_eigenvalue(op_); m < -kPositivityFloor) {
      throw ValidationError("density matrix not positive (min eigenvalue " + std::to_string(m) +
                            ")");
    }
  }

  /// Hermitizes and renormalizes before validating.
  static DensityMatrix normalized(const Operator& op) {
    Operator h = hermitize(op);
    const cplx t = trace(h);
    if (std::abs(t) == 0.0) throw ValidationError("cannot normalize a traceless operator");
    return DensityMatrix((1.0 / t.real()) * h);
  }

  static DensityMatrix pure(Level l) { return DensityMatrix(ket_bra(l, l)); }

  static DensityMatrix maximally_mixed() {
    return DensityMatrix((1.0 / static_cast<double>(kLevels)) * Operator::identity());
  }

  const Operator& op() const noexcept { return op_; }
  cplx operator()(Level i, Level j) const { return op_(i, j); }
  double population(Level l) const { return op_(l, l).real(); }

 private:
  Operator op_;
};

}  // namespace qif
