#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dictcs/numerics.hpp"

namespace dictcs {

using Support = std::vector<Eigen::Index>;

/// A d x K matrix whose columns (atoms) have unit Euclidean norm.
class Dictionary {
 public:
  /// Takes ownership of `atoms`; throws OutOfRange if any column norm differs
  /// from 1 by more than 1e-12, InvalidDimension on non-finite entries.
  explicit Dictionary(DenseMatrix atoms);

  /// Rescales every column to unit norm. A warning is recorded for each column
  /// whose norm was off by more than 1e-6. Throws ZeroColumn.
  static Dictionary normalized(DenseMatrix atoms);

  const DenseMatrix& matrix() const noexcept { return atoms_; }
  Eigen::Index d() const noexcept { return atoms_.rows(); }
  Eigen::Index K() const noexcept { return atoms_.cols(); }
  auto atom(Eigen::Index j) const { return atoms_.col(j); }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  Dictionary(DenseMatrix atoms, std::vector<std::string> warnings);

  DenseMatrix atoms_;
  std::vector<std::string> warnings_;
};

/// Union of the canonical basis and the orthonormal DCT-II basis, d x 2d.
/// DCT atom j has entries c_j cos(pi (2t+1) j / (2d)), c_0 = sqrt(1/d),
/// c_j = sqrt(2/d). Requires d >= 2 and even.
Dictionary make_dirac_dct(Eigen::Index d);
Dictionary make_dirac(Eigen::Index d);

/// CSV: d lines of K comma-separated numbers, no header; line t holds
/// component t of every atom.
Dictionary load_dictionary(const std::filesystem::path& path);
void save_dictionary(const Dictionary& dict, const std::filesystem::path& path);

double coherence(const Dictionary& dict);
/// mu_1(k): for each atom, the sum of its k largest off-diagonal |<phi_i, phi_j>|,
/// maximized over atoms.
double babel(const Dictionary& dict, Eigen::Index k);

/// delta_Lambda = max(1 - lambda_min, lambda_max - 1) of the Gram matrix of
/// the columns in `support`.
double local_isometry(const DenseMatrix& M, const Support& support);

enum class IsometryMethod { ExactEnumeration, MonteCarlo, CoherenceBound };

struct IsometryReport {
  Eigen::Index S = 0;
  double delta = 0.0;
  IsometryMethod method = IsometryMethod::ExactEnumeration;
  std::uint64_t supports_evaluated = 0;
  std::string confidence_note;
};

std::string_view to_string(IsometryMethod method);

inline constexpr std::uint64_t kDefaultEnumerationLimit = 10'000'000;

/// Exact C(K, S), or 0 when it exceeds `cap`.
std::uint64_t binomial_capped(std::uint64_t K, std::uint64_t S, std::uint64_t cap);

/// delta_S by enumerating all C(K, S) supports; throws CombinatorialBlowup
/// past `enumeration_limit`.
IsometryReport restricted_isometry_exact(const DenseMatrix& M, Eigen::Index S,
                                         std::uint64_t enumeration_limit = kDefaultEnumerationLimit);

/// Lower bound on delta_S from `samples` uniformly drawn supports.
IsometryReport restricted_isometry_sampled(const DenseMatrix& M, Eigen::Index S, std::uint64_t samples,
                                           RngStream& rng);

struct CoherenceRicBound {
  double babel;      // mu_1(S - 1)
  double coherence;  // (S - 1) mu, never smaller than `babel`
};

CoherenceRicBound ric_coherence_bound(const Dictionary& dict, Eigen::Index S);
IsometryReport ric_coherence_report(const Dictionary& dict, Eigen::Index S);

/// sqrt((K - d) / (d (K - 1))); OutOfRange when K <= d.
double coherence_lower_bound(Eigen::Index d, Eigen::Index K);

/// Draws a support of size S uniformly from C(K, S) by partial Fisher-Yates;
/// returned sorted.
Support random_support(Eigen::Index K, Eigen::Index S, RngStream& rng);

}  // namespace dictcs
