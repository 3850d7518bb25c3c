#pragma once

// Dense kernels and seeded random streams shared by every other module.

#include <Eigen/Dense>
#include <Eigen/Jacobi>

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>

#include "dictcs/error.hpp"

namespace dictcs {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using DenseMatrix = MatrixX<double>;
using Vector = VectorX<double>;

/// Relative threshold on the R diagonal below which a column set is treated
/// as linearly dependent.
inline constexpr double kRankTolerance = 1e-10;
inline constexpr double kSymmetryTolerance = 1e-12;

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

/// Solves min ||A x - b||_2 by Householder QR. Throws RankDeficient when the
/// smallest |R_ii| is not above kRankTolerance times the largest.
template <typename DerivedA, typename DerivedB>
VectorX<typename DerivedA::Scalar> least_squares(const Eigen::MatrixBase<DerivedA>& A,
                                                 const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (A.rows() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "least_squares: rows(A) != size(b)");
  }
  if (A.cols() == 0) return VectorX<Scalar>(0);
  if (A.rows() < A.cols()) {
    throw Error(ErrorCode::RankDeficient, "least_squares: more columns than rows");
  }
  const Eigen::HouseholderQR<MatrixX<Scalar>> qr(A);
  const auto diag = qr.matrixQR().diagonal().cwiseAbs();
  if (!(diag.minCoeff() > Scalar(kRankTolerance) * diag.maxCoeff())) {
    throw Error(ErrorCode::RankDeficient, "least_squares: column set is numerically dependent");
  }
  return qr.solve(b);
}

/// Cyclic Jacobi sweeps on a copy of G until the off-diagonal Frobenius norm
/// falls below 1e-14 of its initial value. Returns all eigenvalues, unsorted.
template <typename Derived>
VectorX<typename Derived::Scalar> jacobi_eigenvalues(const Eigen::MatrixBase<Derived>& G) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index k = G.rows();
  if (G.cols() != k) throw Error(ErrorCode::NotSymmetric, "matrix is not square");
  if (k > 0 && ((G - G.transpose()).cwiseAbs().maxCoeff() > Scalar(kSymmetryTolerance))) {
    throw Error(ErrorCode::NotSymmetric, "matrix is not symmetric within tolerance");
  }
  MatrixX<Scalar> a = (G + G.transpose()) / Scalar(2);

  auto off_norm = [&a, k] {
    Scalar sum(0);
    for (Eigen::Index j = 0; j < k; ++j)
      for (Eigen::Index i = 0; i < k; ++i)
        if (i != j) sum += a(i, j) * a(i, j);
    return std::sqrt(sum);
  };

  const Scalar target = off_norm() * Scalar(1e-14);
  for (int sweep = 0; sweep < 100 && off_norm() > target; ++sweep) {
    for (Eigen::Index p = 0; p < k - 1; ++p) {
      for (Eigen::Index q = p + 1; q < k; ++q) {
        if (a(p, q) == Scalar(0)) continue;
        Eigen::JacobiRotation<Scalar> rot;
        rot.makeJacobi(a, p, q);
        a.applyOnTheLeft(p, q, rot.adjoint());
        a.applyOnTheRight(p, q, rot);
        a(p, q) = a(q, p) = Scalar(0);
      }
    }
  }
  return a.diagonal();
}

template <typename Scalar>
struct EigenExtremes {
  Scalar lambda_min;
  Scalar lambda_max;
};

template <typename Derived>
EigenExtremes<typename Derived::Scalar> sym_eig_extremes(const Eigen::MatrixBase<Derived>& G) {
  if (G.rows() < 1) throw Error(ErrorCode::OutOfRange, "sym_eig_extremes: empty matrix");
  const auto ev = jacobi_eigenvalues(G);
  return {ev.minCoeff(), ev.maxCoeff()};
}

/// Deterministic random stream. The underlying engine is std::mt19937_64,
/// whose output sequence is fixed by the standard; the seed is derived from
/// (seed, substream path) by SplitMix64 mixing. Normals use classic
/// Box-Muller: each pair of engine outputs (u1, u2) yields r*cos(2 pi u2)
/// first and r*sin(2 pi u2) on the following call.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : RngStream(seed, {}) {}
  RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> substream);

  /// Child stream keyed by this stream's identity plus `index`; does not
  /// consume values from this stream.
  RngStream substream(std::uint64_t index) const;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t key() const noexcept { return key_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t uniform_index(std::uint64_t bound);
  double gaussian();
  double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

 private:
  RngStream(std::uint64_t seed, std::uint64_t key);

  std::uint64_t seed_;
  std::uint64_t key_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

Vector gaussian_sample(RngStream& rng, Eigen::Index count);
Vector rademacher_sample(RngStream& rng, Eigen::Index count);

/// log C(n, k) via lgamma.
double log_binomial(std::int64_t n, std::int64_t k);

}  // namespace dictcs
