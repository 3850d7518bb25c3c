#include "dictcs/bounds.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "dictcs/measurement.hpp"

namespace dictcs {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::OutOfRange, "delta must lie in (0, 1)");
}

void check_sparsity(Eigen::Index S, Eigen::Index K) {
  if (S < 1 || S > K) throw Error(ErrorCode::OutOfRange, "need 1 <= S <= K");
}

std::int64_t ceil_count(double value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::OutOfRange, "sample bound is not finite");
  return static_cast<std::int64_t>(std::ceil(value));
}

double coefficient_ratio(const SparseSignal& x) {
  if (x.sparsity() == 0) throw Error(ErrorCode::EmptySupport, "signal has empty support");
  const auto mags = x.coefficients().cwiseAbs();
  return mags.minCoeff() / mags.maxCoeff();
}

}  // namespace

bool bp_ric_condition(double delta3S, double delta4S) {
  if (!(delta3S >= 0.0 && delta4S >= 0.0)) throw Error(ErrorCode::OutOfRange, "deltas must be >= 0");
  return delta3S + 3.0 * delta4S < 2.0;
}

double composed_ric_bound(double deltaS_dict, double delta) {
  if (!(deltaS_dict >= 0.0 && deltaS_dict < 1.0 && delta >= 0.0 && delta < 1.0)) {
    throw Error(ErrorCode::OutOfRange, "composed_ric_bound inputs must lie in [0, 1)");
  }
  return deltaS_dict + delta * (1.0 + deltaS_dict);
}

double local_iso_failure_prob(Eigen::Index S, double delta, double n, double c) {
  check_delta(delta);
  if (S < 1) throw Error(ErrorCode::OutOfRange, "S must be >= 1");
  return std::exp(std::log(2.0) + static_cast<double>(S) * std::log1p(12.0 / delta) - c / 9.0 * delta * delta * n);
}

double global_ric_failure_prob(Eigen::Index S, Eigen::Index K, double delta, double n, double c) {
  check_delta(delta);
  check_sparsity(S, K);
  return std::exp(std::log(2.0) + log_binomial(K, S) + static_cast<double>(S) * std::log1p(12.0 / delta) -
                  c / 9.0 * delta * delta * n);
}

double sample_bound_bp_value(Eigen::Index S, Eigen::Index K, double delta, double t, double c, SampleBoundForm form) {
  check_delta(delta);
  check_sparsity(S, K);
  if (!(c > 0.0)) throw Error(ErrorCode::OutOfRange, "c must be positive");
  const double s = static_cast<double>(S);
  const double log_ratio = std::log(static_cast<double>(K) / s);
  double bracket = 0.0;
  if (form == SampleBoundForm::Printed) {
    bracket = s * log_ratio + std::log(2.0 * std::numbers::e * (1.0 + 12.0 / delta)) + t;
  } else {
    bracket = s * log_ratio + s * (1.0 + std::log1p(12.0 / delta)) + std::log(2.0) + t;
  }
  return (9.0 / c) / (delta * delta) * bracket;
}

std::int64_t sample_bound_bp(Eigen::Index S, Eigen::Index K, double delta, double t, double c, SampleBoundForm form) {
  return ceil_count(sample_bound_bp_value(S, K, delta, t, c, form));
}

double corollary_c1(double c) {
  if (!(c > 0.0)) throw Error(ErrorCode::OutOfRange, "c must be positive");
  return 9.0 / (kCorollaryDelta * kCorollaryDelta) / c;
}

double corollary_c2() { return std::log(1250.0 / 13.0) + 1.0; }

double sample_bound_corollary_value(Eigen::Index S, Eigen::Index K, double t, double c) {
  check_sparsity(S, K);
  const double s = static_cast<double>(S);
  return corollary_c1(c) * (s * std::log(static_cast<double>(K) / s) + corollary_c2() + t);
}

std::int64_t sample_bound_corollary(Eigen::Index S, Eigen::Index K, double t, double c) {
  return ceil_count(sample_bound_corollary_value(S, K, t, c));
}

bool corollary_sparsity_condition(Eigen::Index S, double mu) {
  if (S < 1) throw Error(ErrorCode::OutOfRange, "S must be >= 1");
  if (S == 1) return true;
  return mu > 0.0 && static_cast<double>(S - 1) <= 1.0 / (16.0 * mu);
}

double thresholding_constant(double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::OutOfRange, "eps must be positive");
  return 4.0 * ip_constant_c1() / (eps * eps) + 2.0 * ip_constant_c2() / eps;
}

double thresholding_c3() { return 4.0 * ip_constant_c1() + 2.0 * ip_constant_c2(); }

double thresholding_sample_bound_value(double eps, Eigen::Index K, double t) {
  if (!(eps > 0.0 && eps <= 1.0)) throw Error(ErrorCode::OutOfRange, "eps must lie in (0, 1]");
  if (K < 1) throw Error(ErrorCode::OutOfRange, "K must be >= 1");
  if (!(t > 0.0)) throw Error(ErrorCode::OutOfRange, "t must be positive");
  return thresholding_constant(eps) * (std::log(2.0 * static_cast<double>(K)) + t);
}

std::int64_t thresholding_sample_bound(double eps, Eigen::Index K, double t) {
  return ceil_count(thresholding_sample_bound_value(eps, K, t));
}

MarginReport thresholding_margin(const Dictionary& dict, const SparseSignal& x) {
  if (x.K() != dict.K()) throw Error(ErrorCode::DimensionMismatch, "signal length != number of atoms");
  const Vector y = dict.matrix() * x.dense();
  const double norm = y.norm();
  if (!(norm > 0.0)) throw Error(ErrorCode::ZeroSignal, "D x is zero");
  const Vector corr = (dict.matrix().transpose() * (y / norm)).cwiseAbs();
  std::vector<bool> in_support(static_cast<std::size_t>(dict.K()), false);
  for (Eigen::Index i : x.support()) in_support[static_cast<std::size_t>(i)] = true;
  double good = std::numeric_limits<double>::infinity();
  double bad = 0.0;
  for (Eigen::Index j = 0; j < dict.K(); ++j) {
    if (in_support[static_cast<std::size_t>(j)]) {
      good = std::min(good, corr[j]);
    } else {
      bad = std::max(bad, corr[j]);
    }
  }
  MarginReport report;
  report.epsilon = good - bad;
  report.achievable = report.epsilon > 0.0;
  if (report.achievable) report.n_required = thresholding_sample_bound(std::min(report.epsilon, 1.0), dict.K(), 1.0);
  return report;
}

bool thresholding_recovery_condition(const SparseSignal& x, double mu1_S, double mu1_Sm1) {
  return coefficient_ratio(x) > mu1_S + mu1_Sm1;
}

double thresholding_sample_bound_coherent_value(const SparseSignal& x, Eigen::Index S, Eigen::Index K, double mu1_S,
                                                double mu1_Sm1, double t) {
  if (!thresholding_recovery_condition(x, mu1_S, mu1_Sm1)) {
    throw Error(ErrorCode::NotRecoverable, "|x_min|/||x||_inf does not exceed mu_1(S) + mu_1(S-1)");
  }
  if (K < 1 || S < 1) throw Error(ErrorCode::OutOfRange, "need S, K >= 1");
  const double margin = coefficient_ratio(x) - mu1_S - mu1_Sm1;
  return thresholding_c3() * static_cast<double>(S) * (1.0 + mu1_Sm1) *
         (std::log(2.0 * static_cast<double>(K)) + t) / (margin * margin);
}

std::int64_t thresholding_sample_bound_coherent(const SparseSignal& x, Eigen::Index S, Eigen::Index K, double mu1_S,
                                                double mu1_Sm1, double t) {
  return ceil_count(thresholding_sample_bound_coherent_value(x, S, K, mu1_S, mu1_Sm1, t));
}

double bennett_tail(double x, double v, double M) {
  if (!(x >= 0.0 && v > 0.0 && M >= 0.0)) throw Error(ErrorCode::OutOfRange, "bennett_tail needs x >= 0, v > 0, M >= 0");
  return 2.0 * std::exp(-0.5 * x * x / (v + M * x));
}

}  // namespace dictcs
