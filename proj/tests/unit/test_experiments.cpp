#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dictcs/experiments.hpp"

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

ExperimentConfig small_config(Algorithm algorithm, const std::string& dictionary = "dirac-dct") {
  ExperimentConfig c;
  c.d = 32;
  c.dictionary = dictionary;
  c.algorithm = algorithm;
  c.n_list = {8, 16, 24};
  c.s_list = {1, 2, 4};
  c.trials = 6;
  c.seed = 17;
  c.record_runtime = false;
  return c;
}

std::string csv_of(const PhaseGrid& g) {
  std::ostringstream out;
  write_csv(g, out);
  return out.str();
}

PhaseGrid synthetic_grid(std::vector<std::tuple<Eigen::Index, Eigen::Index, int>> cells, int trials) {
  PhaseGrid g;
  g.algorithm = "omp";
  g.dictionary = "dirac";
  g.ensemble = "gaussian";
  for (auto [n, S, succ] : cells) {
    g.cells.push_back({n, S, trials, succ, static_cast<double>(succ) / trials, 0.0});
  }
  return g;
}

}  // namespace

TEST_CASE("reference_default configurations") {
  const auto bp = ExperimentConfig::reference_default(Algorithm::BasisPursuit);
  CHECK(bp.d == 256);
  CHECK(bp.dictionary == "dirac-dct");
  CHECK(bp.trials == 100);
  CHECK(bp.n_list == std::vector<Eigen::Index>{64, 96, 128, 160, 192, 224});
  CHECK(bp.s_list.size() == 16);
  CHECK(bp.s_list.front() == 4);
  CHECK(bp.s_list.back() == 64);
  CHECK(bp.coeff_model == CoefficientModel::Gaussian);
  CHECK(bp.matrix_mode == MatrixMode::Fixed);
  const auto th = ExperimentConfig::reference_default(Algorithm::Thresholding);
  CHECK(th.s_list.size() == 16);
  CHECK(th.s_list.front() == 2);
  CHECK(th.s_list.back() == 32);
  CHECK(th.coeff_model == CoefficientModel::UnitSign);
}

TEST_CASE("config validation and digest") {
  auto c = small_config(Algorithm::Omp);
  CHECK_NOTHROW(c.validate());
  const auto digest = c.digest();
  CHECK(digest.size() == 16);
  CHECK(digest == small_config(Algorithm::Omp).digest());
  c.seed = 18;
  CHECK(c.digest() != digest);
  c.trials = 0;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::OutOfRange);
  c.trials = 1;
  c.n_list = {200};
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::OutOfRange);
  CHECK(parse_matrix_mode("fresh") == MatrixMode::Fresh);
  CHECK(parse_coefficient_model("unit-sign") == CoefficientModel::UnitSign);
  CHECK(code_of([] { parse_matrix_mode("x"); }) == ErrorCode::ParseError);
}

TEST_CASE("S beyond n is allowed; S beyond K is not") {
  auto c = small_config(Algorithm::BasisPursuit);
  c.n_list = {8};
  c.s_list = {12};
  c.trials = 5;
  const auto g = run_phase_transition(c);
  CHECK(g.cells.at(0).rate <= 0.2);
  c.s_list = {65};
  CHECK(code_of([&] { Experiment{c}; }) == ErrorCode::OutOfRange);
}

TEST_CASE("draw_sparse_signal") {
  RngStream rng(1);
  const auto full = draw_sparse_signal(6, 6, CoefficientModel::Gaussian, rng);
  CHECK(full.support() == Support{0, 1, 2, 3, 4, 5});
  const auto unit = draw_sparse_signal(50, 10, CoefficientModel::UnitSign, rng);
  CHECK((unit.coefficients().array().abs() == 1.0).all());
  CHECK(code_of([&] { draw_sparse_signal(5, 6, CoefficientModel::Gaussian, rng); }) == ErrorCode::OutOfRange);
  CHECK(code_of([&] { draw_sparse_signal(5, 0, CoefficientModel::Gaussian, rng); }) == ErrorCode::OutOfRange);

  std::vector<int> hits(16, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto x = draw_sparse_signal(16, 2, CoefficientModel::Gaussian, rng);
    for (auto j : x.support()) ++hits[static_cast<std::size_t>(j)];
  }
  const double p = 2.0 / 16.0;
  for (int h : hits) CHECK(std::abs(h - draws * p) <= 3.0 * std::sqrt(draws * p * (1 - p)) + 1.0);
}

TEST_CASE("run_cell: deterministic, and near-certain for a square Dirac system") {
  auto c = small_config(Algorithm::Omp, "dirac");
  c.n_list = {32};
  c.s_list = {1};
  const Experiment exp(c);
  int ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = exp.run_cell(32, 1, trial);
    const auto b = exp.run_cell(32, 1, trial);
    CHECK(a.success == b.success);
    ok += a.success ? 1 : 0;
  }
  CHECK(ok >= 99);
  CHECK(run_cell(c, 32, 1, 3) == exp.run_cell(32, 1, 3).success);
}

TEST_CASE("matrices depend on (seed, n) only in fixed mode") {
  const Experiment omp(small_config(Algorithm::Omp));
  const Experiment bp(small_config(Algorithm::BasisPursuit));
  CHECK(omp.sensing_matrix(16, 1, 0) == bp.sensing_matrix(16, 4, 5));
  CHECK(omp.sensing_matrix(16, 1, 0) != omp.sensing_matrix(24, 1, 0).topRows(16));

  auto fresh = small_config(Algorithm::Omp);
  fresh.matrix_mode = MatrixMode::Fresh;
  const Experiment f(fresh);
  CHECK(f.sensing_matrix(16, 2, 0) != f.sensing_matrix(16, 2, 1));
  CHECK(f.sensing_matrix(16, 2, 1) == f.sensing_matrix(16, 2, 1));
}

TEST_CASE("run_phase_transition: shape, rates and worker independence") {
  for (auto algo : {Algorithm::Thresholding, Algorithm::Omp, Algorithm::BasisPursuit}) {
    const auto c = small_config(algo);
    const auto g1 = run_phase_transition(c, 1);
    const auto g4 = run_phase_transition(c, 4);
    CHECK(g1 == g4);
    CHECK(csv_of(g1) == csv_of(g4));
    CHECK(g1.cells.size() == 9);
    for (const auto& cell : g1.cells) {
      CHECK(cell.successes <= cell.trials);
      CHECK(cell.rate == static_cast<double>(cell.successes) / cell.trials);
      CHECK(cell.mean_runtime == 0.0);
    }
  }
  auto one = small_config(Algorithm::Omp);
  one.n_list = {16};
  one.s_list = {2};
  one.trials = 1;
  CHECK(run_phase_transition(one).cells.size() == 1);
}

TEST_CASE("run_phase_transition: fresh mode is deterministic too") {
  auto c = small_config(Algorithm::Omp);
  c.matrix_mode = MatrixMode::Fresh;
  CHECK(csv_of(run_phase_transition(c, 1)) == csv_of(run_phase_transition(c, 3)));
}

TEST_CASE("qualitative ordering thresh < omp <= bp at n = 128, S = 16") {
  double rate[3];
  int i = 0;
  for (auto algo : {Algorithm::Thresholding, Algorithm::Omp, Algorithm::BasisPursuit}) {
    auto c = ExperimentConfig::reference_default(algo);
    c.n_list = {128};
    c.s_list = {16};
    c.trials = 25;
    c.coeff_model = CoefficientModel::Gaussian;
    rate[i++] = run_phase_transition(c).cells.at(0).rate;
  }
  CHECK(rate[0] < rate[1]);
  CHECK(rate[1] <= rate[2] + 0.2);
}

TEST_CASE("CSV export and import") {
  const auto path = std::filesystem::temp_directory_path() / "dictcs_test_grid.csv";
  PhaseGrid empty;
  export_csv(empty, path);
  {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == std::string(kPhaseCsvHeader) + "\n");
  }
  CHECK(import_csv(path).cells.empty());

  auto c = small_config(Algorithm::Omp);
  c.record_runtime = true;
  const auto g = run_phase_transition(c);
  export_csv(g, path);
  const auto back = import_csv(path);
  CHECK(back == g);
  for (const auto& cell : back.cells) CHECK(cell.rate == static_cast<double>(cell.successes) / cell.trials);

  std::istringstream bad_header("a,b\n");
  CHECK(code_of([&] { read_csv(bad_header); }) == ErrorCode::ParseError);
  std::istringstream bad_row(std::string(kPhaseCsvHeader) + "\nomp,dirac,gaussian,8,2,5,6,1.2,0\n");
  CHECK(code_of([&] { read_csv(bad_row); }) == ErrorCode::ParseError);
  std::filesystem::remove(path);
  CHECK(code_of([&] { export_csv(g, "/nonexistent/dir/grid.csv"); }) == ErrorCode::IoError);
}

TEST_CASE("compare_grids") {
  const auto g = run_phase_transition(small_config(Algorithm::Omp));
  const auto self = compare_grids(g, g);
  CHECK(self.max_abs_difference == 0.0);
  CHECK(self.a_dominates);
  CHECK(self.verdict == "a>=b");

  auto other = small_config(Algorithm::Omp);
  other.s_list = {1, 2};
  CHECK(code_of([&] { compare_grids(g, run_phase_transition(other)); }) == ErrorCode::CellMismatch);

  const auto a = synthetic_grid({{8, 1, 5}, {8, 2, 2}}, 5);
  const auto b = synthetic_grid({{8, 1, 4}, {8, 2, 3}}, 5);
  const auto cmp = compare_grids(a, b);
  CHECK(cmp.verdict == "mixed");
  CHECK(cmp.fraction_a_at_least_b == 0.5);
  CHECK(cmp.max_abs_difference == doctest::Approx(0.2));
}

TEST_CASE("Dirac grid dominates Dirac-DCT grid at desk scale (OMP)") {
  ExperimentConfig c;
  c.d = 64;
  c.algorithm = Algorithm::Omp;
  c.n_list = {16, 24, 32, 48};
  c.s_list = {2, 4, 6, 8};
  c.trials = 20;
  c.seed = 5;
  c.record_runtime = false;
  c.dictionary = "dirac";
  const auto dirac = run_phase_transition(c);
  c.dictionary = "dirac-dct";
  const auto dct = run_phase_transition(c);
  CHECK(compare_grids(dirac, dct).fraction_a_at_least_b >= 0.9);
}

TEST_CASE("success_frontier and check_monotonicity") {
  const auto g = synthetic_grid({{8, 1, 10}, {8, 2, 6}, {8, 3, 1}, {16, 1, 10}, {16, 2, 10}, {16, 3, 4}}, 10);
  CHECK(success_frontier(g, 8) == 2);
  CHECK(success_frontier(g, 16) == 2);
  CHECK(success_frontier(g, 16, 0.3) == 3);
  CHECK(success_frontier(g, 32) == 0);
  const auto ok = check_monotonicity(g);
  CHECK(ok.checked == 3 + 4);
  CHECK(ok.violations == 0);

  const auto bad = synthetic_grid({{8, 1, 10}, {8, 2, 10}, {16, 1, 0}, {16, 2, 10}}, 10);
  const auto rep = check_monotonicity(bad);
  CHECK(rep.violations == 2);
  CHECK(rep.details.size() == 2);
}
