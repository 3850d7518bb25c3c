#include <doctest.h>

#include <cmath>

#include "../oracles.hpp"
#include "dictcs/recovery.hpp"

using namespace dictcs;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no dictcs::Error thrown");
  return ErrorCode::IoError;
}

DenseMatrix gaussian_matrix(Eigen::Index n, Eigen::Index K, RngStream& rng) {
  DenseMatrix A(n, K);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < K; ++j) A(i, j) = rng.gaussian() / std::sqrt(static_cast<double>(n));
  return A;
}

DenseMatrix random_orthogonal(Eigen::Index d, RngStream& rng) {
  Eigen::HouseholderQR<DenseMatrix> qr(gaussian_matrix(d, d, rng));
  return qr.householderQ() * DenseMatrix::Identity(d, d);
}

SparseSignal random_signal(Eigen::Index K, Eigen::Index S, bool unit_sign, RngStream& rng) {
  Support sup = random_support(K, S, rng);
  Vector c(S);
  for (Eigen::Index i = 0; i < S; ++i) c[i] = unit_sign ? rng.rademacher() : rng.gaussian();
  return SparseSignal(K, sup, c);
}

}  // namespace

TEST_CASE("SparseSignal invariants") {
  const SparseSignal x(6, {1, 4}, Vector{{2.0, -1.0}});
  CHECK(x.sparsity() == 2);
  CHECK(x.dense() == Vector{{0.0, 2.0, 0.0, 0.0, -1.0, 0.0}});
  CHECK(code_of([] { SparseSignal(6, {4, 1}, Vector{{2.0, -1.0}}); }) == ErrorCode::OutOfRange);
  CHECK(code_of([] { SparseSignal(6, {1, 6}, Vector{{2.0, -1.0}}); }) == ErrorCode::OutOfRange);
  CHECK(code_of([] { SparseSignal(6, {1, 2}, Vector{{2.0, 0.0}}); }) == ErrorCode::OutOfRange);
  CHECK(code_of([] { SparseSignal(6, {1}, Vector{{2.0, 1.0}}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("algorithm names round-trip") {
  for (auto a : {Algorithm::Thresholding, Algorithm::Omp, Algorithm::BasisPursuit})
    CHECK(parse_algorithm(to_string(a)) == a);
  CHECK(code_of([] { parse_algorithm("lasso"); }) == ErrorCode::ParseError);
}

TEST_CASE("thresholding: orthonormal columns give exact recovery") {
  RngStream rng(1);
  const DenseMatrix Q = random_orthogonal(20, rng);
  for (int rep = 0; rep < 20; ++rep) {
    const SparseSignal x = random_signal(20, 4, false, rng);
    const auto r = thresholding_recover(Q, Q * x.dense(), 4);
    CHECK(support_recovered(r, x));
    CHECK((r.estimate - x.dense()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(r.iterations == 1);
    CHECK(r.converged);
  }
}

TEST_CASE("thresholding: zero signal uses the lowest-index tie-break") {
  const auto r = thresholding_recover(DenseMatrix::Identity(5, 5), Vector::Zero(5), 3);
  CHECK(r.support == Support{0, 1, 2});
  CHECK(r.estimate.isZero(0.0));
  CHECK(r.residual_l2 == 0.0);
}

TEST_CASE("thresholding: Dirac-DCT with a square identity measurement") {
  // d = 64: mu_1(2) + mu_1(1) < 1, so every unit-sign 2-sparse signal satisfies
  // the coherence recovery condition and must be recovered.
  {
    const Dictionary D = make_dirac_dct(64);
    REQUIRE(babel(D, 2) + babel(D, 1) < 1.0);
    RngStream rng(2);
    for (int rep = 0; rep < 50; ++rep) {
      const SparseSignal x = random_signal(128, 2, true, rng);
      CHECK(support_recovered(thresholding_recover(D.matrix(), D.matrix() * x.dense(), 2), x));
    }
  }
  // d = 16: the coherence condition fails (mu_1(2) + mu_1(1) > 1), so recovery is
  // decided per signal by the correlation margin.
  const Dictionary D = make_dirac_dct(16);
  CHECK(babel(D, 2) + babel(D, 1) > 1.0);
  RngStream rng(3);
  int positive = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const SparseSignal x = random_signal(32, 2, true, rng);
    const Vector s = D.matrix() * x.dense();
    const Vector corr = (D.matrix().transpose() * s).cwiseAbs();
    double good = 1e300, bad = 0.0;
    for (Eigen::Index j = 0; j < 32; ++j) {
      const bool in = std::find(x.support().begin(), x.support().end(), j) != x.support().end();
      if (in) {
        good = std::min(good, corr[j]);
      } else {
        bad = std::max(bad, corr[j]);
      }
    }
    const bool recovered = support_recovered(thresholding_recover(D.matrix(), s, 2), x);
    if (good > bad) {
      ++positive;
      CHECK(recovered);
    } else if (good < bad) {
      CHECK(!recovered);
    }
  }
  CHECK(positive > 100);
}

TEST_CASE("thresholding: argument checks") {
  CHECK(code_of([] { thresholding_recover(DenseMatrix::Identity(3, 3), Vector::Ones(3), 4); }) ==
        ErrorCode::OutOfRange);
  CHECK(code_of([] { thresholding_recover(DenseMatrix::Identity(3, 3), Vector::Ones(2), 1); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("omp: orthonormal exact recovery in |support| iterations") {
  RngStream rng(3);
  const DenseMatrix Q = random_orthogonal(16, rng);
  const SparseSignal x = random_signal(16, 5, false, rng);
  const auto r = omp_recover(Q, Q * x.dense(), MaxAtoms{5});
  CHECK(r.iterations == 5);
  CHECK(support_recovered(r, x));
  CHECK(r.converged);
  CHECK((r.estimate - x.dense()).norm() < 1e-12);
}

TEST_CASE("omp: a single atom is found first and fits exactly") {
  RngStream rng(4);
  const DenseMatrix Phi = gaussian_matrix(10, 20, rng);
  const auto r = omp_recover(Phi, Phi.col(3), ResidualTol{1e-12});
  REQUIRE(r.support.size() == 1);
  CHECK(r.support[0] == 3);
  CHECK(r.iterations == 1);
  CHECK(r.residual_l2 < 1e-12);
}

TEST_CASE("omp: residual decreases strictly and stays orthogonal to selected columns") {
  RngStream rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const DenseMatrix Phi = gaussian_matrix(20, 40, rng);
    Vector s(20);
    for (Eigen::Index i = 0; i < 20; ++i) s[i] = rng.gaussian();
    double previous = s.norm();
    for (Eigen::Index k = 1; k <= 10; ++k) {
      const auto r = omp_recover(Phi, s, MaxAtoms{k});
      CHECK(r.residual_l2 < previous);
      previous = r.residual_l2;
      const Vector res = s - Phi * r.estimate;
      CHECK(std::abs(res.norm() - r.residual_l2) < 1e-9);
      CHECK((Phi(Eigen::all, r.support).transpose() * res).cwiseAbs().maxCoeff() < 1e-8 * s.norm());
    }
  }
}

TEST_CASE("omp: agrees with the l0 oracle on 20x40, S = 3, +-1 coefficients") {
  // Flat +-1 coefficients are the hard case for greedy selection; an independent
  // Monte-Carlo estimate at this size is 0.78 (4000 draws).
  RngStream rng(6);
  int agree = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const DenseMatrix Phi = gaussian_matrix(20, 40, rng);
    const SparseSignal x = random_signal(40, 3, true, rng);
    const Vector s = Phi * x.dense();
    const auto l0 = oracle::l0_solve(Phi, s, 3);
    REQUIRE(l0.unique());
    const auto r = omp_recover(Phi, s, MaxAtoms{3});
    const bool same = r.support == Support(l0.support.begin(), l0.support.end());
    // Any exact 3-term fit must be the unique sparsest one.
    if (r.residual_l2 <= 1e-9 * s.norm()) CHECK(same);
    agree += same ? 1 : 0;
  }
  CHECK(agree >= 65);
}

TEST_CASE("omp: stopping-rule validation and early exact fit") {
  const DenseMatrix I = DenseMatrix::Identity(4, 4);
  CHECK(code_of([&] { omp_recover(I, Vector::Ones(4), MaxAtoms{5}); }) == ErrorCode::OutOfRange);
  CHECK(code_of([&] { omp_recover(I, Vector::Ones(4), ResidualTol{-1.0}); }) == ErrorCode::OutOfRange);
  Vector s = Vector::Zero(4);
  s[2] = 1.0;
  const auto r = omp_recover(I, s, MaxAtoms{3});
  CHECK(r.support == Support{2});
  CHECK(r.converged);
  const auto zero = omp_recover(I, Vector::Zero(4), MaxAtoms{2});
  CHECK(zero.support.empty());
  CHECK(zero.converged);
}

TEST_CASE("omp: rank deficiency is reported, not thrown") {
  DenseMatrix Phi = DenseMatrix::Zero(3, 3);
  Phi(0, 0) = 1.0;
  Phi(0, 1) = 1.0;  // duplicate of column 0
  Phi(1, 2) = 1.0;
  const Vector s{{1.0, 0.5, 0.3}};
  // Picks 0 then 2; the only atom left is the duplicate.
  const auto r = omp_recover(Phi, s, MaxAtoms{3});
  CHECK(!r.converged);
  REQUIRE(r.failure.has_value());
  CHECK(*r.failure == ErrorCode::RankDeficient);
  CHECK(r.support == Support{0, 2});
  CHECK(r.residual_l2 == doctest::Approx(0.3));
}

TEST_CASE("basis pursuit: square orthonormal Phi returns Phi^T s") {
  RngStream rng(7);
  const DenseMatrix Q = random_orthogonal(12, rng);
  Vector s(12);
  for (Eigen::Index i = 0; i < 12; ++i) s[i] = rng.gaussian();
  const auto r = basis_pursuit_recover(Q, s);
  CHECK((r.estimate - Q.transpose() * s).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(r.converged);
}

TEST_CASE("basis pursuit: zero measurement gives zero") {
  RngStream rng(8);
  const auto r = basis_pursuit_recover(gaussian_matrix(6, 12, rng), Vector::Zero(6));
  CHECK(r.estimate.isZero(0.0));
  CHECK(r.support.empty());
}

TEST_CASE("basis pursuit: exact recovery where the sparsest solution is unique") {
  RngStream rng(9);
  int unique = 0;
  for (int trial = 0; trial < 25; ++trial) {
    const DenseMatrix Phi = gaussian_matrix(24, 48, rng);
    const SparseSignal x = random_signal(48, 3, false, rng);
    const Vector s = Phi * x.dense();
    const auto l0 = oracle::l0_solve(Phi, s, 3);
    if (!l0.unique()) continue;
    ++unique;
    const auto r = basis_pursuit_recover(Phi, s);
    CHECK(r.converged);
    CHECK((r.estimate - x.dense()).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(r.support == Support(l0.support.begin(), l0.support.end()));
  }
  CHECK(unique >= 20);
}

TEST_CASE("basis pursuit: l1 minimality against known feasible points") {
  RngStream rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const DenseMatrix Phi = gaussian_matrix(10, 30, rng);
    const SparseSignal x = random_signal(30, 6, false, rng);
    const Vector s = Phi * x.dense();
    const auto r = basis_pursuit_recover(Phi, s);
    CHECK((Phi * r.estimate - s).norm() < 1e-8 * s.norm());
    const double l1 = r.estimate.lpNorm<1>();
    CHECK(l1 <= x.dense().lpNorm<1>() + 1e-6);
    // Feasible points x + null-space directions.
    Eigen::FullPivLU<DenseMatrix> lu(Phi);
    const DenseMatrix N = lu.kernel();
    for (int k = 0; k < 20; ++k) {
      const Vector feasible = x.dense() + N * gaussian_sample(rng, N.cols()) * 0.1;
      CHECK(l1 <= feasible.lpNorm<1>() + 1e-6);
    }
  }
}

TEST_CASE("basis pursuit: infeasible measurement") {
  DenseMatrix Phi = DenseMatrix::Zero(3, 4);
  Phi(0, 0) = 1.0;
  Phi(1, 1) = 1.0;
  Phi(0, 2) = 1.0;
  const Vector s{{1.0, 1.0, 1.0}};
  CHECK(code_of([&] { basis_pursuit_recover(Phi, s); }) == ErrorCode::Infeasible);
  // Consistent but rank-deficient systems are fine.
  const auto r = basis_pursuit_recover(Phi, Vector{{1.0, 1.0, 0.0}});
  CHECK((Phi * r.estimate - Vector{{1.0, 1.0, 0.0}}).norm() < 1e-8);
  CHECK(r.estimate.lpNorm<1>() == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("basis pursuit: iteration cap reports MaxIterationsExceeded") {
  RngStream rng(11);
  const DenseMatrix Phi = gaussian_matrix(12, 40, rng);
  const SparseSignal x = random_signal(40, 4, false, rng);
  BpOptions opts;
  opts.max_iterations = 1;
  const auto r = basis_pursuit_recover(Phi, Phi * x.dense(), opts);
  CHECK(!r.converged);
  REQUIRE(r.failure.has_value());
  CHECK(*r.failure == ErrorCode::MaxIterationsExceeded);
  opts.duality_gap_tol = 0.0;
  CHECK(code_of([&] { basis_pursuit_recover(Phi, Phi * x.dense(), opts); }) == ErrorCode::OutOfRange);
}

TEST_CASE("basis pursuit: noisy residual lands in [0.95 eta, eta]") {
  RngStream rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const DenseMatrix Phi = gaussian_matrix(20, 40, rng);
    const SparseSignal x = random_signal(40, 3, false, rng);
    Vector noise = gaussian_sample(rng, 20);
    const double eta = 0.05;
    noise *= eta / noise.norm();
    BpOptions opts;
    opts.noise_level = eta;
    const auto r = basis_pursuit_recover(Phi, Phi * x.dense() + noise, opts);
    CHECK(r.converged);
    CHECK(r.residual_l2 <= eta * (1 + 1e-12));
    CHECK(r.residual_l2 >= 0.95 * eta);
    CHECK((r.estimate - x.dense()).norm() < 15.41 * eta);
  }
  BpOptions opts;
  opts.noise_level = 10.0;
  const auto r = basis_pursuit_recover(DenseMatrix::Identity(3, 3), Vector::Ones(3), opts);
  CHECK(r.estimate.isZero(0.0));
}

TEST_CASE("residual_l2 matches recomputation for every algorithm") {
  RngStream rng(13);
  const DenseMatrix Phi = gaussian_matrix(15, 30, rng);
  const SparseSignal x = random_signal(30, 3, false, rng);
  const Vector s = Phi * x.dense();
  for (const auto& r : {thresholding_recover(Phi, s, 3), omp_recover(Phi, s, MaxAtoms{3}), basis_pursuit_recover(Phi, s)})
    CHECK(std::abs(r.residual_l2 - (s - Phi * r.estimate).norm()) <= 1e-9);
}

TEST_CASE("support_recovered") {
  const SparseSignal x(5, {1, 3}, Vector{{1.0, 1.0}});
  RecoveryResult r;
  r.estimate = Vector::Zero(5);
  r.support = {1, 3};
  CHECK(support_recovered(r, x));
  r.support = {3, 1};
  CHECK(support_recovered(r, x));
  r.support = {1, 3, 4};
  CHECK(!support_recovered(r, x));
  r.estimate = Vector::Zero(4);
  CHECK(code_of([&] { support_recovered(r, x); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("refit_on_support") {
  RngStream rng(14);
  const DenseMatrix Phi = gaussian_matrix(6, 6, rng);
  const Vector x = gaussian_sample(rng, 6);
  CHECK((refit_on_support(Phi, Phi * x, {0, 1, 2, 3, 4, 5}) - x).norm() < 1e-10 * x.norm());
  const DenseMatrix Wide = gaussian_matrix(10, 20, rng);
  const SparseSignal sp(20, {2, 7, 11}, Vector{{1.0, -0.5, 2.0}});
  CHECK((refit_on_support(Wide, Wide * sp.dense(), sp.support()) - sp.dense()).norm() < 1e-10);
  CHECK(refit_on_support(Wide, Vector::Ones(10), {}).isZero(0.0));
}

TEST_CASE("bp_error_bound") {
  CHECK(bp_error_bound(0.2, 0.0) == 0.0);
  CHECK(bp_error_bound(1.0 / 3.0, 0.1) == doctest::Approx(1.541));
  CHECK(code_of([] { bp_error_bound(0.4, 0.1); }) == ErrorCode::NotApplicable);
}
