#pragma once

// Random measurement ensembles and Monte-Carlo checks of the concentration
// inequalities they satisfy.

#include <cstdint>
#include <optional>
#include <string_view>

#include "dictcs/numerics.hpp"

namespace dictcs {

enum class EnsembleKind { Gaussian, Bernoulli };

std::string_view to_string(EnsembleKind kind);
EnsembleKind parse_ensemble_kind(std::string_view name);

/// Gaussian entries are N(0, 1/n), Bernoulli entries +-1/sqrt(n). When
/// `basis` is set the drawn matrix is A * basis (basis must be orthogonal).
struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::Gaussian;
  Eigen::Index n = 1;
  Eigen::Index d = 1;
  std::uint64_t seed = 0;
  std::optional<DenseMatrix> basis;

  bool basis_transformed() const noexcept { return basis.has_value(); }
};

/// Draws from RngStream(spec.seed).
DenseMatrix draw(const EnsembleSpec& spec);
/// Draws from the caller's stream; `spec.seed` is ignored.
DenseMatrix draw(const EnsembleSpec& spec, RngStream& rng);

/// c = 1/2 - 1/9 for Gaussian and Bernoulli matrices.
inline constexpr double kGaussianConcentrationConstant = 7.0 / 18.0;

/// 2 exp(-c (n/2) eps^2), eps in (0, 1/3).
double concentration_bound(double eps, Eigen::Index n, double c = kGaussianConcentrationConstant);
/// 2 exp(-(n/2)(eps^2/2 - eps^3/3)), eps in (0, 1).
double gaussian_concentration_bound(double eps, Eigen::Index n);

/// C1 = 4e / sqrt(6 pi)
double ip_constant_c1();
/// C2 = e sqrt(2)
double ip_constant_c2();

/// 2 exp(-n t^2 / (C1 + C2 t)). `n` is real so that derived identities can
/// be checked exactly; sample counts are integers in practice.
double inner_product_tail_bound(double t, double n);

struct ConcentrationReport {
  double parameter = 0.0;
  Eigen::Index n = 0;
  std::uint64_t trials = 0;
  std::uint64_t events = 0;
  double empirical_frequency = 0.0;
  double theoretical_bound = 0.0;
  double slack = 0.0;
  bool satisfied = false;
};

/// 3 sqrt(p (1 - p) / trials) + 1 / trials.
double binomial_slack(double frequency, std::uint64_t trials);

/// Frequency of | ||Av||^2 - ||v||^2 | >= eps ||v||^2 over fresh draws; trial i
/// uses RngStream(spec.seed).substream(i).
ConcentrationReport empirical_norm_concentration(const EnsembleSpec& spec, const Vector& v, double eps,
                                                 std::uint64_t trials, double c = kGaussianConcentrationConstant,
                                                 unsigned workers = 1);

/// Frequency of |<Ax, Ay> - <x, y>| >= t; ||x||, ||y|| <= 1.
ConcentrationReport empirical_ip_concentration(const EnsembleSpec& spec, const Vector& x, const Vector& y, double t,
                                               std::uint64_t trials, unsigned workers = 1);

/// E|Z|^2 of the order-2 chaos behind <Ax, Ay>: <x,y>^2 + ||x||^2 ||y||^2,
/// minus 2 sum_k x_k^2 y_k^2 for Bernoulli entries.
double chaos_second_moment(const Vector& x, const Vector& y, EnsembleKind kind);

struct MomentEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Monte-Carlo estimate of n Var(<Ax, Ay>) with the standard error of the
/// sample variance.
MomentEstimate empirical_chaos_moment(const EnsembleSpec& spec, const Vector& x, const Vector& y,
                                      std::uint64_t trials, unsigned workers = 1);

}  // namespace dictcs
