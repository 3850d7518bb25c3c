#include "dictcs/measurement.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "dictcs/parallel.hpp"

namespace dictcs {

namespace {

void check_eps(double eps, double upper, const char* who) {
  if (!(eps > 0.0 && eps < upper)) throw Error(ErrorCode::OutOfRange, std::string(who) + ": eps out of range");
}

void check_spec(const EnsembleSpec& spec) {
  if (spec.n < 1 || spec.d < 1) throw Error(ErrorCode::InvalidDimension, "ensemble needs n >= 1 and d >= 1");
  if (spec.basis) {
    const DenseMatrix& U = *spec.basis;
    if (U.rows() != spec.d || U.cols() != spec.d) {
      throw Error(ErrorCode::NotOrthogonal, "basis must be d x d");
    }
    if (!all_finite(U) ||
        (U.transpose() * U - DenseMatrix::Identity(spec.d, spec.d)).cwiseAbs().maxCoeff() > 1e-10) {
      throw Error(ErrorCode::NotOrthogonal, "basis is not orthogonal within 1e-10");
    }
  }
}

ConcentrationReport finish_report(double parameter, Eigen::Index n, std::uint64_t trials, std::uint64_t events,
                                  double bound) {
  ConcentrationReport r;
  r.parameter = parameter;
  r.n = n;
  r.trials = trials;
  r.events = events;
  r.empirical_frequency = static_cast<double>(events) / static_cast<double>(trials);
  r.theoretical_bound = bound;
  r.slack = binomial_slack(r.empirical_frequency, trials);
  r.satisfied = r.empirical_frequency <= r.theoretical_bound + r.slack;
  return r;
}

template <typename Event>
std::uint64_t count_events(const EnsembleSpec& spec, std::uint64_t trials, unsigned workers, Event&& event) {
  std::vector<unsigned char> hit(trials, 0);
  const RngStream root(spec.seed);
  parallel_for(trials, workers, [&](std::size_t i) {
    RngStream rng = root.substream(i);
    hit[i] = event(draw(spec, rng)) ? 1 : 0;
  });
  std::uint64_t events = 0;
  for (auto h : hit) events += h;
  return events;
}

}  // namespace

std::string_view to_string(EnsembleKind kind) {
  return kind == EnsembleKind::Gaussian ? "gaussian" : "bernoulli";
}

EnsembleKind parse_ensemble_kind(std::string_view name) {
  if (name == "gaussian") return EnsembleKind::Gaussian;
  if (name == "bernoulli") return EnsembleKind::Bernoulli;
  throw Error(ErrorCode::ParseError, "unknown ensemble '" + std::string(name) + "'");
}

DenseMatrix draw(const EnsembleSpec& spec) {
  RngStream rng(spec.seed);
  return draw(spec, rng);
}

DenseMatrix draw(const EnsembleSpec& spec, RngStream& rng) {
  check_spec(spec);
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.n));
  DenseMatrix A(spec.n, spec.d);
  // Row-major consumption order.
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    for (Eigen::Index j = 0; j < spec.d; ++j) {
      A(i, j) = scale * (spec.kind == EnsembleKind::Gaussian ? rng.gaussian() : rng.rademacher());
    }
  }
  if (spec.basis) return A * *spec.basis;
  return A;
}

double concentration_bound(double eps, Eigen::Index n, double c) {
  check_eps(eps, 1.0 / 3.0, "concentration_bound");
  if (n < 1) throw Error(ErrorCode::OutOfRange, "concentration_bound: n must be >= 1");
  if (!(c > 0.0)) throw Error(ErrorCode::OutOfRange, "concentration_bound: c must be positive");
  return 2.0 * std::exp(-c * (static_cast<double>(n) / 2.0) * eps * eps);
}

double gaussian_concentration_bound(double eps, Eigen::Index n) {
  check_eps(eps, 1.0, "gaussian_concentration_bound");
  if (n < 1) throw Error(ErrorCode::OutOfRange, "gaussian_concentration_bound: n must be >= 1");
  return 2.0 * std::exp(-(static_cast<double>(n) / 2.0) * (eps * eps / 2.0 - eps * eps * eps / 3.0));
}

double ip_constant_c1() { return 4.0 * std::numbers::e / std::sqrt(6.0 * std::numbers::pi); }

double ip_constant_c2() { return std::numbers::e * std::numbers::sqrt2; }

double inner_product_tail_bound(double t, double n) {
  if (!(t > 0.0)) throw Error(ErrorCode::OutOfRange, "inner_product_tail_bound: t must be positive");
  if (!(n > 0.0)) throw Error(ErrorCode::OutOfRange, "inner_product_tail_bound: n must be positive");
  return 2.0 * std::exp(-n * t * t / (ip_constant_c1() + ip_constant_c2() * t));
}

double binomial_slack(double frequency, std::uint64_t trials) {
  const double m = static_cast<double>(trials);
  return 3.0 * std::sqrt(frequency * (1.0 - frequency) / m) + 1.0 / m;
}

ConcentrationReport empirical_norm_concentration(const EnsembleSpec& spec, const Vector& v, double eps,
                                                 std::uint64_t trials, double c, unsigned workers) {
  if (trials < 1) throw Error(ErrorCode::OutOfRange, "trials must be >= 1");
  if (v.size() != spec.d) throw Error(ErrorCode::DimensionMismatch, "v must have length d");
  const double vv = v.squaredNorm();
  if (!(vv > 0.0)) throw Error(ErrorCode::OutOfRange, "v must be nonzero");
  const double bound = concentration_bound(eps, spec.n, c);
  const auto events = count_events(spec, trials, workers, [&](const DenseMatrix& A) {
    return std::abs((A * v).squaredNorm() - vv) >= eps * vv;
  });
  return finish_report(eps, spec.n, trials, events, bound);
}

ConcentrationReport empirical_ip_concentration(const EnsembleSpec& spec, const Vector& x, const Vector& y, double t,
                                               std::uint64_t trials, unsigned workers) {
  if (trials < 1) throw Error(ErrorCode::OutOfRange, "trials must be >= 1");
  if (spec.basis) throw Error(ErrorCode::OutOfRange, "inner-product concentration covers Gaussian/Bernoulli only");
  if (x.size() != spec.d || y.size() != spec.d) throw Error(ErrorCode::DimensionMismatch, "x, y must have length d");
  if (x.norm() > 1.0 + 1e-12 || y.norm() > 1.0 + 1e-12) {
    throw Error(ErrorCode::NormTooLarge, "x and y must have norm at most 1");
  }
  const double bound = inner_product_tail_bound(t, static_cast<double>(spec.n));
  const double xy = x.dot(y);
  const auto events = count_events(spec, trials, workers, [&](const DenseMatrix& A) {
    return std::abs((A * x).dot(A * y) - xy) >= t;
  });
  return finish_report(t, spec.n, trials, events, bound);
}

double chaos_second_moment(const Vector& x, const Vector& y, EnsembleKind kind) {
  if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "x and y differ in length");
  const double xy = x.dot(y);
  double value = xy * xy + x.squaredNorm() * y.squaredNorm();
  if (kind == EnsembleKind::Bernoulli) {
    value -= 2.0 * x.cwiseProduct(y).squaredNorm();
  }
  return value;
}

MomentEstimate empirical_chaos_moment(const EnsembleSpec& spec, const Vector& x, const Vector& y,
                                      std::uint64_t trials, unsigned workers) {
  if (trials < 2) throw Error(ErrorCode::OutOfRange, "need at least two trials");
  if (x.size() != spec.d || y.size() != spec.d) throw Error(ErrorCode::DimensionMismatch, "x, y must have length d");
  std::vector<double> w(trials);
  const RngStream root(spec.seed);
  parallel_for(trials, workers, [&](std::size_t i) {
    RngStream rng = root.substream(i);
    const DenseMatrix A = draw(spec, rng);
    w[i] = (A * x).dot(A * y);
  });
  const double m = static_cast<double>(trials);
  double mean = 0.0;
  for (double v : w) mean += v;
  mean /= m;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : w) {
    const double c2 = (v - mean) * (v - mean);
    m2 += c2;
    m4 += c2 * c2;
  }
  const double var = m2 / (m - 1.0);
  m4 /= m;
  const double se_var = std::sqrt(std::max(0.0, m4 - (m2 / m) * (m2 / m)) / m);
  const double n = static_cast<double>(spec.n);
  return {n * var, n * se_var};
}

}  // namespace dictcs
