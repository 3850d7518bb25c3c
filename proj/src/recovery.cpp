#include "dictcs/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dictcs {

namespace {

void check_system(const DenseMatrix& Phi, const Vector& s) {
  if (Phi.rows() < 1 || Phi.cols() < 1) throw Error(ErrorCode::InvalidDimension, "Phi must be nonempty");
  if (Phi.rows() != s.size()) throw Error(ErrorCode::DimensionMismatch, "size(s) != rows(Phi)");
}

void finalize(RecoveryResult& r, const DenseMatrix& Phi, const Vector& s) {
  r.residual_l2 = (s - Phi * r.estimate).norm();
}

/// Index of the largest |c_j| among unmasked entries; lowest index on ties.
Eigen::Index argmax_abs(const Vector& c, const std::vector<bool>& excluded) {
  Eigen::Index best = -1;
  double best_value = -1.0;
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    if (excluded[static_cast<std::size_t>(j)]) continue;
    const double v = std::abs(c[j]);
    if (v > best_value) {
      best_value = v;
      best = j;
    }
  }
  return best;
}

Support sorted(Support s) {
  std::sort(s.begin(), s.end());
  return s;
}

Vector embed(Eigen::Index K, const Support& support, const Vector& values) {
  Vector x = Vector::Zero(K);
  for (std::size_t i = 0; i < support.size(); ++i) x[support[i]] = values[static_cast<Eigen::Index>(i)];
  return x;
}

Support threshold_support(const Vector& x, double relative) {
  Support out;
  const double peak = x.size() > 0 ? x.cwiseAbs().maxCoeff() : 0.0;
  if (!(peak > 0.0)) return out;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) > relative * peak) out.push_back(i);
  return out;
}

// ---------------------------------------------------------------------------
// l1 minimization with equality constraints.
//
// The constraint Phi x = s is first replaced by an equivalent system with
// orthonormal rows: with Phi^T P = Q R (column-pivoted QR) of rank r,
// Phi x = s  <=>  Q_r^T x = z  where R11^T z = (P^T s)_{1..r}, provided the
// remaining rows are consistent. The minimum-norm feasible point is Q_r z.

struct ReducedSystem {
  DenseMatrix B;  // r x K, orthonormal rows
  Vector b;       // r
  Vector min_norm_solution;
};

ReducedSystem reduce_constraints(const DenseMatrix& Phi, const Vector& s) {
  const Eigen::Index K = Phi.cols();
  Eigen::ColPivHouseholderQR<DenseMatrix> qr(Phi.transpose());
  qr.setThreshold(kRankTolerance);
  const Eigen::Index r = qr.rank();
  ReducedSystem out;
  if (r == 0) {
    out.B = DenseMatrix(0, K);
    out.b = Vector(0);
    out.min_norm_solution = Vector::Zero(K);
  } else {
    const DenseMatrix Qr = qr.householderQ() * DenseMatrix::Identity(K, r);
    const Vector ps = qr.colsPermutation().transpose() * s;
    const auto R11 = qr.matrixR().topLeftCorner(r, r).template triangularView<Eigen::Upper>();
    out.b = R11.transpose().solve(ps.head(r));
    out.B = Qr.transpose();
    out.min_norm_solution = Qr * out.b;
  }
  const double misfit = (Phi * out.min_norm_solution - s).norm();
  if (misfit > 1e-10 * std::max(1.0, s.norm())) {
    throw Error(ErrorCode::Infeasible, "measurement vector is not in the range of Phi");
  }
  return out;
}

struct LpOutcome {
  Vector x;
  int iterations = 0;
  bool converged = false;
};

/// Largest alpha keeping v + alpha dv >= 0 (unbounded when dv >= 0).
double max_step(const Vector& v, const Vector& dv) {
  double alpha = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  return alpha;
}

/// Mehrotra predictor-corrector for min 1^T(u + v) s.t. B(u - v) = b, u, v >= 0.
LpOutcome solve_l1_lp(const ReducedSystem& sys, const BpOptions& opts) {
  const DenseMatrix& B = sys.B;
  const Vector& b = sys.b;
  const Eigen::Index r = B.rows();
  const Eigen::Index K = B.cols();
  const double dim = 2.0 * static_cast<double>(K);

  // Starting point from the minimum-norm solution x0: primal [x0/2; -x0/2],
  // lambda = 0, slacks = 1, shifted into the interior.
  Vector xu = sys.min_norm_solution / 2.0;
  Vector xv = -sys.min_norm_solution / 2.0;
  Vector su = Vector::Ones(K);
  Vector sv = Vector::Ones(K);
  Vector lambda = Vector::Zero(r);
  {
    const double shift_x = std::max(0.0, -1.5 * std::min(xu.minCoeff(), xv.minCoeff()));
    xu.array() += shift_x;
    xv.array() += shift_x;
    const double xs = xu.dot(su) + xv.dot(sv);
    const double dx = 0.5 * xs / (su.sum() + sv.sum());
    const double ds = 0.5 * xs / std::max(xu.sum() + xv.sum(), 1e-300);
    xu.array() += std::max(dx, 1e-8);
    xv.array() += std::max(dx, 1e-8);
    su.array() += ds;
    sv.array() += ds;
  }

  LpOutcome out;
  const double b_scale = 1.0 + b.norm();
  const double c_scale = 1.0 + std::sqrt(dim);
  DenseMatrix M(r, r);
  DenseMatrix scaled(r, K);
  Eigen::LLT<DenseMatrix> chol;

  for (int iter = 0;; ++iter) {
    const Vector Btl = B.transpose() * lambda;
    const Vector rb = B * (xu - xv) - b;
    const Vector rcu = Btl + su - Vector::Ones(K);
    const Vector rcv = -Btl + sv - Vector::Ones(K);
    const double primal = xu.sum() + xv.sum();
    const double dual = b.dot(lambda);
    const double gap = std::abs(primal - dual) / (1.0 + std::abs(primal));
    const double pinf = rb.norm() / b_scale;
    const double dinf = std::sqrt(rcu.squaredNorm() + rcv.squaredNorm()) / c_scale;
    out.iterations = iter;
    if (gap <= opts.duality_gap_tol && pinf <= opts.duality_gap_tol && dinf <= opts.duality_gap_tol) {
      out.converged = true;
      break;
    }
    if (iter >= opts.max_iterations) break;

    const Vector du = xu.cwiseQuotient(su);
    const Vector dv = xv.cwiseQuotient(sv);
    scaled = B * (du + dv).cwiseSqrt().asDiagonal();
    M.setZero();
    M.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
    M.triangularView<Eigen::StrictlyUpper>() = M.transpose();
    chol.compute(M);
    if (chol.info() != Eigen::Success) {
      M.diagonal().array() += 1e-12 * std::max(1.0, M.diagonal().maxCoeff());
      chol.compute(M);
      if (chol.info() != Eigen::Success) break;
    }

    // Solves the Newton system for a complementarity right-hand side.
    auto newton = [&](const Vector& rxu, const Vector& rxv, Vector& dxu, Vector& dxv, Vector& dsu, Vector& dsv,
                      Vector& dl) {
      const Vector rhs = -rb + B * (rxu.cwiseQuotient(su) - rxv.cwiseQuotient(sv)) -
                         B * (du.cwiseProduct(rcu) - dv.cwiseProduct(rcv));
      dl = chol.solve(rhs);
      const Vector Btdl = B.transpose() * dl;
      dsu = -rcu - Btdl;
      dsv = -rcv + Btdl;
      dxu = -(rxu + xu.cwiseProduct(dsu)).cwiseQuotient(su);
      dxv = -(rxv + xv.cwiseProduct(dsv)).cwiseQuotient(sv);
    };

    Vector dxu, dxv, dsu, dsv, dl;
    const Vector xsu = xu.cwiseProduct(su);
    const Vector xsv = xv.cwiseProduct(sv);
    newton(xsu, xsv, dxu, dxv, dsu, dsv, dl);
    const double ap_aff = std::min({1.0, max_step(xu, dxu), max_step(xv, dxv)});
    const double ad_aff = std::min({1.0, max_step(su, dsu), max_step(sv, dsv)});
    const double mu = (xsu.sum() + xsv.sum()) / dim;
    const double mu_aff = ((xu + ap_aff * dxu).dot(su + ad_aff * dsu) + (xv + ap_aff * dxv).dot(sv + ad_aff * dsv)) / dim;
    const double sigma = std::pow(mu_aff / mu, 3.0);

    const Vector rxu = xsu + dxu.cwiseProduct(dsu) - Vector::Constant(K, sigma * mu);
    const Vector rxv = xsv + dxv.cwiseProduct(dsv) - Vector::Constant(K, sigma * mu);
    newton(rxu, rxv, dxu, dxv, dsu, dsv, dl);
    const double eta = std::max(0.9, 1.0 - mu);
    const double ap = std::min(1.0, eta * std::min(max_step(xu, dxu), max_step(xv, dxv)));
    const double ad = std::min(1.0, eta * std::min(max_step(su, dsu), max_step(sv, dsv)));
    xu += ap * dxu;
    xv += ap * dxv;
    su += ad * dsu;
    sv += ad * dsv;
    lambda += ad * dl;
  }
  out.x = xu - xv;
  return out;
}

// ---------------------------------------------------------------------------
// l1-penalized least squares by cyclic coordinate descent on the Gram matrix.

void lasso_coordinate_descent(const DenseMatrix& G, const Vector& corr, double penalty, Vector& x) {
  const Eigen::Index K = G.cols();
  Vector q = G * x;  // G x, kept current
  for (int sweep = 0; sweep < 100000; ++sweep) {
    double largest_change = 0.0;
    for (Eigen::Index j = 0; j < K; ++j) {
      const double gjj = G(j, j);
      if (!(gjj > 0.0)) continue;
      const double rho = corr[j] - q[j] + gjj * x[j];
      const double shrunk = std::copysign(std::max(std::abs(rho) - penalty, 0.0), rho) / gjj;
      const double delta = shrunk - x[j];
      if (delta != 0.0) {
        q += delta * G.col(j);
        x[j] = shrunk;
        largest_change = std::max(largest_change, std::abs(delta));
      }
    }
    if (largest_change <= 1e-14 * std::max(1.0, x.cwiseAbs().maxCoeff())) break;
  }
}

RecoveryResult noisy_basis_pursuit(const DenseMatrix& Phi, const Vector& s, const BpOptions& opts) {
  RecoveryResult r;
  r.algorithm = Algorithm::BasisPursuit;
  const Eigen::Index K = Phi.cols();
  const double eta = opts.noise_level;
  r.estimate = Vector::Zero(K);
  if (s.norm() <= eta) {
    r.converged = true;
    finalize(r, Phi, s);
    return r;
  }
  const DenseMatrix G = Phi.transpose() * Phi;
  const Vector corr = Phi.transpose() * s;
  const double lambda_max = corr.cwiseAbs().maxCoeff();

  auto residual_at = [&](double penalty, Vector& x) {
    lasso_coordinate_descent(G, corr, penalty, x);
    return (s - Phi * x).norm();
  };

  // Bisection in log(lambda); the residual is nondecreasing in lambda.
  double lo = std::log(lambda_max * 1e-12);
  double hi = std::log(lambda_max);
  Vector x_lo = Vector::Zero(K);
  const double res_lo = residual_at(std::exp(lo), x_lo);
  Vector best = x_lo;
  bool feasible = res_lo <= eta;
  bool landed = feasible && res_lo >= 0.95 * eta;
  int steps = 0;
  Vector x = x_lo;
  while (!landed && feasible && steps < 30) {
    ++steps;
    const double mid = 0.5 * (lo + hi);
    const double res = residual_at(std::exp(mid), x);
    if (res > eta) {
      hi = mid;
      x = best;  // warm start from the last feasible point
    } else {
      lo = mid;
      best = x;
      landed = res >= 0.95 * eta;
    }
  }
  r.estimate = best;
  r.iterations = steps;
  r.converged = feasible && landed;
  if (!r.converged) r.failure = ErrorCode::MaxIterationsExceeded;
  r.support = threshold_support(r.estimate, opts.support_threshold);
  finalize(r, Phi, s);
  return r;
}

}  // namespace

SparseSignal::SparseSignal(Eigen::Index K, Support support, Vector coefficients)
    : K_(K), support_(std::move(support)), coefficients_(std::move(coefficients)) {
  if (static_cast<Eigen::Index>(support_.size()) != coefficients_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "support and coefficient counts differ");
  }
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (support_[i] < 0 || support_[i] >= K_) throw Error(ErrorCode::OutOfRange, "support index outside [0, K)");
    if (i > 0 && support_[i] <= support_[i - 1]) {
      throw Error(ErrorCode::OutOfRange, "support must be strictly increasing");
    }
    if (!(std::abs(coefficients_[static_cast<Eigen::Index>(i)]) > 0.0)) {
      throw Error(ErrorCode::OutOfRange, "stored coefficients must be nonzero");
    }
  }
}

Vector SparseSignal::dense() const { return embed(K_, support_, coefficients_); }

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Thresholding: return "thresh";
    case Algorithm::Omp: return "omp";
    case Algorithm::BasisPursuit: return "bp";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "thresh") return Algorithm::Thresholding;
  if (name == "omp") return Algorithm::Omp;
  if (name == "bp") return Algorithm::BasisPursuit;
  throw Error(ErrorCode::ParseError, "unknown algorithm '" + std::string(name) + "'");
}

RecoveryResult thresholding_recover(const DenseMatrix& Phi, const Vector& s, Eigen::Index S) {
  check_system(Phi, s);
  const Eigen::Index K = Phi.cols();
  if (S < 1 || S > std::min(Phi.rows(), K)) throw Error(ErrorCode::OutOfRange, "thresholding: S outside [1, min(n, K)]");
  const Vector corr = (Phi.transpose() * s).cwiseAbs();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(K));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&corr](Eigen::Index a, Eigen::Index b) { return corr[a] > corr[b]; });

  RecoveryResult r;
  r.algorithm = Algorithm::Thresholding;
  r.iterations = 1;
  r.support = sorted(Support(order.begin(), order.begin() + S));
  try {
    r.estimate = refit_on_support(Phi, s, r.support);
    r.converged = true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::RankDeficient) throw;
    r.estimate = Vector::Zero(K);
    r.failure = ErrorCode::RankDeficient;
  }
  finalize(r, Phi, s);
  return r;
}

RecoveryResult omp_recover(const DenseMatrix& Phi, const Vector& s, OmpStop stop) {
  check_system(Phi, s);
  const Eigen::Index n = Phi.rows();
  const Eigen::Index K = Phi.cols();
  const Eigen::Index cap = std::min(n, K);
  const auto* max_atoms = std::get_if<MaxAtoms>(&stop);
  const auto* tol = std::get_if<ResidualTol>(&stop);
  if (max_atoms && (max_atoms->count < 0 || max_atoms->count > cap)) {
    throw Error(ErrorCode::OutOfRange, "omp: MaxAtoms outside [0, min(n, K)]");
  }
  if (tol && !(tol->tolerance >= 0.0)) throw Error(ErrorCode::OutOfRange, "omp: residual tolerance must be >= 0");

  RecoveryResult r;
  r.algorithm = Algorithm::Omp;
  r.estimate = Vector::Zero(K);
  const double s_norm = s.norm();
  const double exact_fit = 1e-13 * s_norm;
  std::vector<bool> selected(static_cast<std::size_t>(K), false);
  Support support;
  Vector residual = s;
  double res_norm = s_norm;

  while (true) {
    if (max_atoms && static_cast<Eigen::Index>(support.size()) == max_atoms->count) {
      r.converged = true;
      break;
    }
    if (tol && res_norm <= tol->tolerance) {
      r.converged = true;
      break;
    }
    if (res_norm <= exact_fit) {
      // s is already reproduced exactly; further atoms cannot reduce it.
      r.converged = true;
      break;
    }
    if (static_cast<Eigen::Index>(support.size()) == cap) {
      r.failure = ErrorCode::Stalled;
      break;
    }
    const Eigen::Index pick = argmax_abs(Phi.transpose() * residual, selected);
    support.push_back(pick);
    Vector coef;
    try {
      coef = least_squares(Phi(Eigen::all, support), s);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankDeficient) throw;
      support.pop_back();
      r.failure = ErrorCode::RankDeficient;
      break;
    }
    selected[static_cast<std::size_t>(pick)] = true;
    r.estimate = embed(K, support, coef);
    residual = s - Phi(Eigen::all, support) * coef;
    const double next_norm = residual.norm();
    ++r.iterations;
    if (!(res_norm - next_norm > 1e-14 * std::max(1.0, s_norm))) {
      res_norm = next_norm;
      r.failure = ErrorCode::Stalled;
      break;
    }
    res_norm = next_norm;
  }
  r.support = sorted(support);
  finalize(r, Phi, s);
  return r;
}

RecoveryResult basis_pursuit_recover(const DenseMatrix& Phi, const Vector& s, const BpOptions& opts) {
  check_system(Phi, s);
  if (!(opts.noise_level >= 0.0) || !(opts.duality_gap_tol > 0.0) || opts.max_iterations < 1 ||
      !(opts.support_threshold > 0.0)) {
    throw Error(ErrorCode::OutOfRange, "invalid BpOptions");
  }
  if (opts.noise_level > 0.0) return noisy_basis_pursuit(Phi, s, opts);

  const Eigen::Index K = Phi.cols();
  RecoveryResult r;
  r.algorithm = Algorithm::BasisPursuit;
  const ReducedSystem sys = reduce_constraints(Phi, s);
  if (s.norm() == 0.0) {
    r.estimate = Vector::Zero(K);
    r.converged = true;
  } else if (sys.B.rows() == K) {
    // Full column rank: the feasible set is a single point.
    r.estimate = sys.min_norm_solution;
    r.converged = true;
  } else {
    const LpOutcome lp = solve_l1_lp(sys, opts);
    r.estimate = lp.x;
    r.iterations = lp.iterations;
    r.converged = lp.converged;
    if (!lp.converged) r.failure = ErrorCode::MaxIterationsExceeded;
  }
  r.support = threshold_support(r.estimate, opts.support_threshold);
  finalize(r, Phi, s);
  return r;
}

bool support_recovered(const RecoveryResult& result, const SparseSignal& truth) {
  if (result.estimate.size() != truth.K()) throw Error(ErrorCode::DimensionMismatch, "estimate length != K");
  return sorted(result.support) == truth.support();
}

Vector refit_on_support(const DenseMatrix& Phi, const Vector& s, const Support& support) {
  check_system(Phi, s);
  if (support.empty()) return Vector::Zero(Phi.cols());
  for (Eigen::Index j : support)
    if (j < 0 || j >= Phi.cols()) throw Error(ErrorCode::OutOfRange, "support index outside column range");
  return embed(Phi.cols(), support, least_squares(Phi(Eigen::all, support), s));
}

double bp_error_bound(double delta4S, double eta) {
  if (!(delta4S <= 1.0 / 3.0)) throw Error(ErrorCode::NotApplicable, "constant known only for delta_4S <= 1/3");
  if (!(eta >= 0.0)) throw Error(ErrorCode::OutOfRange, "eta must be >= 0");
  return 15.41 * eta;
}

}  // namespace dictcs
