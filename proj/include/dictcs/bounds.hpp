#pragma once

// Closed-form recovery conditions, failure probabilities and sample-count
// bounds. Functions named *_value return the raw real; the unsuffixed
// sample-count versions return its ceiling.

#include <cstdint>

#include "dictcs/dictionary.hpp"
#include "dictcs/recovery.hpp"

namespace dictcs {

/// delta_3S + 3 delta_4S < 2.
bool bp_ric_condition(double delta3S, double delta4S);

/// delta_S(D) + delta (1 + delta_S(D)).
double composed_ric_bound(double deltaS_dict, double delta);

/// 2 (1 + 12/delta)^S exp(-(c/9) delta^2 n), evaluated in log space and not
/// clamped to 1.
double local_iso_failure_prob(Eigen::Index S, double delta, double n, double c);

/// Union bound over all C(K, S) supports of local_iso_failure_prob.
double global_ric_failure_prob(Eigen::Index S, Eigen::Index K, double delta, double n, double c);

enum class SampleBoundForm {
  /// S log(K/S) + log(2e(1 + 12/delta)) + t, as printed.
  Printed,
  /// S log(K/S) + S (1 + log(1 + 12/delta)) + log 2 + t, which is what the
  /// union bound with C(K,S) <= (eK/S)^S actually produces.
  DerivationStrict,
};

/// (9/c) delta^-2 (...) for the composed-matrix RIP sample count.
double sample_bound_bp_value(Eigen::Index S, Eigen::Index K, double delta, double t, double c,
                             SampleBoundForm form = SampleBoundForm::Printed);
std::int64_t sample_bound_bp(Eigen::Index S, Eigen::Index K, double delta, double t, double c,
                             SampleBoundForm form = SampleBoundForm::Printed);

/// Parameter choice that turns delta_S(D) <= 1/16 into delta_S(AD) <= 1/3.
inline constexpr double kCorollaryDelta = 13.0 / 51.0;

/// C1 * c = 9 (51/13)^2 ~ 138.5148.
double corollary_c1(double c);
/// log(1250/13) + 1.
double corollary_c2();
double sample_bound_corollary_value(Eigen::Index S, Eigen::Index K, double t, double c);
std::int64_t sample_bound_corollary(Eigen::Index S, Eigen::Index K, double t, double c);
/// S - 1 <= 1 / (16 mu).
bool corollary_sparsity_condition(Eigen::Index S, double mu);

/// C(eps) = 4 C1 eps^-2 + 2 C2 eps^-1 with the inner-product constants.
double thresholding_constant(double eps);
/// C3 = 4 C1 + 2 C2.
double thresholding_c3();
double thresholding_sample_bound_value(double eps, Eigen::Index K, double t);
std::int64_t thresholding_sample_bound(double eps, Eigen::Index K, double t);

struct MarginReport {
  double epsilon = 0.0;
  bool achievable = false;
  std::int64_t n_required = 0;  // for t = 1; 0 when not achievable
};

/// eps = min_{i in support} |<y, phi_i>| - max_{k not in support} |<y, phi_k>|
/// with y = D x / ||D x||. Throws ZeroSignal when D x = 0.
MarginReport thresholding_margin(const Dictionary& dict, const SparseSignal& x);

/// |x_min| / ||x||_inf > mu_1(S) + mu_1(S - 1), strictly.
bool thresholding_recovery_condition(const SparseSignal& x, double mu1_S, double mu1_Sm1);

double thresholding_sample_bound_coherent_value(const SparseSignal& x, Eigen::Index S, Eigen::Index K, double mu1_S,
                                                double mu1_Sm1, double t);
/// Throws NotRecoverable when the recovery condition fails.
std::int64_t thresholding_sample_bound_coherent(const SparseSignal& x, Eigen::Index S, Eigen::Index K, double mu1_S,
                                                double mu1_Sm1, double t);

/// Bennett/Bernstein: 2 exp(-x^2 / (2 (v + M x))).
double bennett_tail(double x, double v, double M);

}  // namespace dictcs
