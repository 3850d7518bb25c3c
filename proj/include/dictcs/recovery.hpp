#pragma once

// Sparse recovery from s = Phi x: thresholding, orthogonal matching pursuit
// and Basis Pursuit (l1 minimization).

#include <optional>
#include <string_view>
#include <variant>

#include "dictcs/dictionary.hpp"
#include "dictcs/numerics.hpp"

namespace dictcs {

/// Coefficients of a K-dimensional vector on a strictly increasing support;
/// every stored coefficient is nonzero.
class SparseSignal {
 public:
  SparseSignal(Eigen::Index K, Support support, Vector coefficients);

  Eigen::Index K() const noexcept { return K_; }
  Eigen::Index sparsity() const noexcept { return static_cast<Eigen::Index>(support_.size()); }
  const Support& support() const noexcept { return support_; }
  const Vector& coefficients() const noexcept { return coefficients_; }
  Vector dense() const;

 private:
  Eigen::Index K_;
  Support support_;
  Vector coefficients_;
};

enum class Algorithm { Thresholding, Omp, BasisPursuit };

std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view name);

struct RecoveryResult {
  Vector estimate;
  Support support;  // sorted
  double residual_l2 = 0.0;
  int iterations = 0;
  Algorithm algorithm = Algorithm::Thresholding;
  bool converged = false;
  /// Set when the run ended on a numerical failure (RankDeficient, Stalled,
  /// MaxIterationsExceeded).
  std::optional<ErrorCode> failure;
};

struct BpOptions {
  double noise_level = 0.0;
  double duality_gap_tol = 1e-8;
  int max_iterations = 100;
  /// Support is {i : |x_i| > support_threshold * max |x|}.
  double support_threshold = 1e-4;
};

struct MaxAtoms {
  Eigen::Index count;
};
struct ResidualTol {
  double tolerance;
};
using OmpStop = std::variant<MaxAtoms, ResidualTol>;

/// Keeps the S largest |<s, psi_j>| (ties to the lower index) and refits by
/// least squares.
RecoveryResult thresholding_recover(const DenseMatrix& Phi, const Vector& s, Eigen::Index S);

/// Greedy selection of the column most correlated with the residual followed
/// by a least-squares refit on all selected columns. Selected columns are
/// never reselected.
RecoveryResult omp_recover(const DenseMatrix& Phi, const Vector& s, OmpStop stop);

/// min ||x||_1 s.t. Phi x = s (noise_level == 0) via a primal-dual
/// interior-point LP on x = u - v. For noise_level > 0 solves
/// min 1/2 ||Phi x - s||^2 + lambda ||x||_1 with lambda bisected until the
/// residual lies in [0.95 eta, eta]. Throws Infeasible when eta == 0 and s is
/// outside the range of Phi.
RecoveryResult basis_pursuit_recover(const DenseMatrix& Phi, const Vector& s, const BpOptions& opts = {});

/// True iff the supports are equal as sets.
bool support_recovered(const RecoveryResult& result, const SparseSignal& truth);

/// Least-squares coefficients on `support`, zero elsewhere.
Vector refit_on_support(const DenseMatrix& Phi, const Vector& s, const Support& support);

/// Stable-recovery error bound C * eta with C = 15.41, available only when
/// delta_4S <= 1/3.
double bp_error_bound(double delta4S, double eta);

}  // namespace dictcs
