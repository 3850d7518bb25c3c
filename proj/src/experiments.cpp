#include "dictcs/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "dictcs/parallel.hpp"

namespace dictcs {

namespace {

constexpr std::uint64_t kMatrixStream = 1;
constexpr std::uint64_t kSignalStream = 2;

std::string format_real(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string dictionary_label(const std::string& name) {
  if (name == "dirac" || name == "dirac-dct") return name;
  return std::filesystem::path(name).filename().string();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
T parse_number(const std::string& text, const char* what) {
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::ParseError, std::string("bad ") + what + " '" + text + "'");
  }
  return value;
}

double pooled_standard_error(double p1, double p2, int trials1, int trials2) {
  const double p = (p1 * trials1 + p2 * trials2) / static_cast<double>(trials1 + trials2);
  return std::sqrt(p * (1.0 - p) * (1.0 / trials1 + 1.0 / trials2));
}

}  // namespace

std::string_view to_string(CoefficientModel model) {
  return model == CoefficientModel::Gaussian ? "gaussian" : "unit-sign";
}

std::string_view to_string(MatrixMode mode) { return mode == MatrixMode::Fixed ? "fixed" : "fresh"; }

CoefficientModel parse_coefficient_model(std::string_view name) {
  if (name == "gaussian") return CoefficientModel::Gaussian;
  if (name == "unit-sign") return CoefficientModel::UnitSign;
  throw Error(ErrorCode::ParseError, "unknown coefficient model '" + std::string(name) + "'");
}

MatrixMode parse_matrix_mode(std::string_view name) {
  if (name == "fixed") return MatrixMode::Fixed;
  if (name == "fresh") return MatrixMode::Fresh;
  throw Error(ErrorCode::ParseError, "unknown matrix mode '" + std::string(name) + "'");
}

ExperimentConfig ExperimentConfig::reference_default(Algorithm algorithm) {
  ExperimentConfig c;
  c.d = 256;
  c.dictionary = "dirac-dct";
  c.algorithm = algorithm;
  c.trials = 100;
  for (Eigen::Index n = 64; n <= 224; n += 32) c.n_list.push_back(n);
  if (algorithm == Algorithm::Thresholding) {
    for (Eigen::Index s = 2; s <= 32; s += 2) c.s_list.push_back(s);
    c.coeff_model = CoefficientModel::UnitSign;
  } else {
    for (Eigen::Index s = 4; s <= 64; s += 4) c.s_list.push_back(s);
    c.coeff_model = CoefficientModel::Gaussian;
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (d < 1) throw Error(ErrorCode::InvalidDimension, "d must be >= 1");
  if (trials < 1) throw Error(ErrorCode::OutOfRange, "trials must be >= 1");
  if (n_list.empty() || s_list.empty()) throw Error(ErrorCode::OutOfRange, "n and S lists must be nonempty");
  for (Eigen::Index n : n_list) {
    if (n < 1 || n > 4 * d) throw Error(ErrorCode::OutOfRange, "n must lie in [1, 4d]");
  }
  for (Eigen::Index s : s_list) {
    if (s < 1) throw Error(ErrorCode::OutOfRange, "S must be >= 1");
  }
}

std::string ExperimentConfig::digest() const {
  std::ostringstream canon;
  canon << d << '|' << dictionary << '|' << to_string(ensemble) << '|';
  for (auto n : n_list) canon << n << ',';
  canon << '|';
  for (auto s : s_list) canon << s << ',';
  canon << '|' << trials << '|' << to_string(coeff_model) << '|' << to_string(algorithm) << '|' << seed << '|'
        << to_string(matrix_mode) << '|' << format_real(bp_options.noise_level) << '|'
        << format_real(bp_options.duality_gap_tol) << '|' << bp_options.max_iterations << '|'
        << format_real(bp_options.support_threshold);
  // FNV-1a, 64 bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon.str()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << h;
  return hex.str();
}

Dictionary resolve_dictionary(const std::string& name, Eigen::Index d) {
  if (name == "dirac") return make_dirac(d);
  if (name == "dirac-dct") return make_dirac_dct(d);
  return load_dictionary(name);
}

SparseSignal draw_sparse_signal(Eigen::Index K, Eigen::Index S, CoefficientModel model, RngStream& rng) {
  if (S < 1 || S > K) throw Error(ErrorCode::OutOfRange, "draw_sparse_signal: S outside [1, K]");
  Support support = random_support(K, S, rng);
  Vector coefficients(S);
  for (Eigen::Index i = 0; i < S; ++i) {
    if (model == CoefficientModel::UnitSign) {
      coefficients[i] = rng.rademacher();
    } else {
      double g = 0.0;
      while (g == 0.0) g = rng.gaussian();
      coefficients[i] = g;
    }
  }
  return SparseSignal(K, std::move(support), std::move(coefficients));
}

Experiment::Experiment(ExperimentConfig config)
    : config_(std::move(config)), dictionary_(resolve_dictionary(config_.dictionary, config_.d)) {
  config_.validate();
  for (Eigen::Index s : config_.s_list) {
    if (s > dictionary_.K()) throw Error(ErrorCode::OutOfRange, "S exceeds the number of atoms");
  }
  if (config_.matrix_mode == MatrixMode::Fixed) {
    for (Eigen::Index n : config_.n_list) {
      if (fixed_.count(n)) continue;
      fixed_.emplace(n, sensing_matrix(n, 0, 0));
    }
  }
}

DenseMatrix Experiment::sensing_matrix(Eigen::Index n, Eigen::Index S, int trial_index) const {
  if (config_.matrix_mode == MatrixMode::Fixed) {
    if (auto it = fixed_.find(n); it != fixed_.end()) return it->second;
  }
  RngStream rng = config_.matrix_mode == MatrixMode::Fixed
                      ? RngStream(config_.seed, {kMatrixStream, static_cast<std::uint64_t>(n)})
                      : RngStream(config_.seed, {kMatrixStream, static_cast<std::uint64_t>(n),
                                                 static_cast<std::uint64_t>(S), static_cast<std::uint64_t>(trial_index)});
  EnsembleSpec spec;
  spec.kind = config_.ensemble;
  spec.n = n;
  spec.d = dictionary_.d();
  const DenseMatrix A = draw(spec, rng);
  return A * dictionary_.matrix();
}

CellOutcome Experiment::run_cell(Eigen::Index n, Eigen::Index S, int trial_index) const {
  CellOutcome out;
  try {
    DenseMatrix fresh;
    const DenseMatrix* shared = nullptr;
    if (config_.matrix_mode == MatrixMode::Fixed) {
      shared = &fixed_.at(n);
    } else {
      fresh = sensing_matrix(n, S, trial_index);
    }
    const DenseMatrix& Phi = shared ? *shared : fresh;

    RngStream rng(config_.seed, {kSignalStream, static_cast<std::uint64_t>(S), static_cast<std::uint64_t>(trial_index)});
    const SparseSignal x = draw_sparse_signal(dictionary_.K(), S, config_.coeff_model, rng);
    const Vector s = Phi * x.dense();

    const auto start = std::chrono::steady_clock::now();
    RecoveryResult result;
    switch (config_.algorithm) {
      case Algorithm::Thresholding: result = thresholding_recover(Phi, s, S); break;
      case Algorithm::Omp: result = omp_recover(Phi, s, MaxAtoms{S}); break;
      case Algorithm::BasisPursuit: {
        BpOptions opts = config_.bp_options;
        opts.noise_level = 0.0;
        result = basis_pursuit_recover(Phi, s, opts);
        break;
      }
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (result.failure) {
      out.reason = std::string(to_string(*result.failure));
      out.success = false;
    } else {
      out.success = support_recovered(result, x);
    }
  } catch (const Error& e) {
    out.success = false;
    out.reason = e.what();
  }
  return out;
}

bool run_cell(const ExperimentConfig& config, Eigen::Index n, Eigen::Index S, int trial_index) {
  ExperimentConfig single = config;
  single.n_list = {n};
  single.s_list = {S};
  return Experiment(std::move(single)).run_cell(n, S, trial_index).success;
}

const PhaseCell& PhaseGrid::at(Eigen::Index n, Eigen::Index S) const {
  for (const auto& c : cells)
    if (c.n == n && c.S == S) return c;
  throw Error(ErrorCode::CellMismatch, "no cell (" + std::to_string(n) + ", " + std::to_string(S) + ")");
}

PhaseGrid run_phase_transition(const ExperimentConfig& config, unsigned workers, std::ostream* log) {
  const Experiment experiment(config);
  const auto& cfg = experiment.config();
  const std::size_t trials = static_cast<std::size_t>(cfg.trials);
  const std::size_t n_count = cfg.n_list.size();
  const std::size_t s_count = cfg.s_list.size();
  std::vector<CellOutcome> outcomes(n_count * s_count * trials);

  parallel_for(outcomes.size(), workers, [&](std::size_t task) {
    const std::size_t trial = task % trials;
    const std::size_t cell = task / trials;
    const Eigen::Index n = cfg.n_list[cell / s_count];
    const Eigen::Index S = cfg.s_list[cell % s_count];
    outcomes[task] = experiment.run_cell(n, S, static_cast<int>(trial));
  });

  PhaseGrid grid;
  grid.algorithm = std::string(to_string(cfg.algorithm));
  grid.dictionary = dictionary_label(cfg.dictionary);
  grid.ensemble = std::string(to_string(cfg.ensemble));
  grid.config_digest = cfg.digest();
  for (std::size_t cell = 0; cell < n_count * s_count; ++cell) {
    PhaseCell pc;
    pc.n = cfg.n_list[cell / s_count];
    pc.S = cfg.s_list[cell % s_count];
    pc.trials = cfg.trials;
    double seconds = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      const auto& o = outcomes[cell * trials + t];
      pc.successes += o.success ? 1 : 0;
      seconds += o.seconds;
      if (log && !o.reason.empty()) {
        *log << "n=" << pc.n << " S=" << pc.S << " trial=" << t << ": " << o.reason << '\n';
      }
    }
    pc.rate = static_cast<double>(pc.successes) / static_cast<double>(pc.trials);
    pc.mean_runtime = cfg.record_runtime ? seconds / static_cast<double>(pc.trials) : 0.0;
    grid.cells.push_back(pc);
  }
  return grid;
}

void write_csv(const PhaseGrid& grid, std::ostream& out) {
  out << kPhaseCsvHeader << '\n';
  for (const auto& c : grid.cells) {
    out << grid.algorithm << ',' << grid.dictionary << ',' << grid.ensemble << ',' << c.n << ',' << c.S << ','
        << c.trials << ',' << c.successes << ',' << format_real(c.rate) << ',' << format_real(c.mean_runtime) << '\n';
  }
}

void export_csv(const PhaseGrid& grid, const std::filesystem::path& path) {
  for (const auto* label : {&grid.algorithm, &grid.dictionary, &grid.ensemble}) {
    if (label->find_first_of(",\n\r") != std::string::npos) {
      throw Error(ErrorCode::IoError, "grid label contains a CSV delimiter: " + *label);
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_csv(grid, out);
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

PhaseGrid read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kPhaseCsvHeader) {
    throw Error(ErrorCode::ParseError, "missing or unexpected phase CSV header");
  }
  PhaseGrid grid;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 9) throw Error(ErrorCode::ParseError, "expected 9 fields: " + line);
    if (first) {
      grid.algorithm = f[0];
      grid.dictionary = f[1];
      grid.ensemble = f[2];
      first = false;
    } else if (f[0] != grid.algorithm || f[1] != grid.dictionary || f[2] != grid.ensemble) {
      throw Error(ErrorCode::ParseError, "mixed grid labels in one file");
    }
    PhaseCell c;
    c.n = parse_number<Eigen::Index>(f[3], "n");
    c.S = parse_number<Eigen::Index>(f[4], "S");
    c.trials = parse_number<int>(f[5], "trials");
    c.successes = parse_number<int>(f[6], "successes");
    c.rate = parse_number<double>(f[7], "rate");
    c.mean_runtime = parse_number<double>(f[8], "mean_runtime_s");
    if (c.trials < 1 || c.successes < 0 || c.successes > c.trials) {
      throw Error(ErrorCode::ParseError, "inconsistent trial counts: " + line);
    }
    grid.cells.push_back(c);
  }
  return grid;
}

PhaseGrid import_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_csv(in);
}

GridComparison compare_grids(const PhaseGrid& a, const PhaseGrid& b) {
  std::set<std::pair<Eigen::Index, Eigen::Index>> keys_a, keys_b;
  for (const auto& c : a.cells) keys_a.emplace(c.n, c.S);
  for (const auto& c : b.cells) keys_b.emplace(c.n, c.S);
  if (keys_a != keys_b || keys_a.size() != a.cells.size() || keys_b.size() != b.cells.size()) {
    throw Error(ErrorCode::CellMismatch, "grids do not cover the same (n, S) cells");
  }
  GridComparison out;
  int at_least = 0;
  for (const auto& ca : a.cells) {
    const auto& cb = b.at(ca.n, ca.S);
    CellDifference diff{ca.n, ca.S, ca.rate, cb.rate, ca.rate - cb.rate};
    if (diff.difference >= 0.0) ++at_least;
    out.max_abs_difference = std::max(out.max_abs_difference, std::abs(diff.difference));
    out.cells.push_back(diff);
  }
  out.fraction_a_at_least_b = out.cells.empty() ? 1.0 : static_cast<double>(at_least) / out.cells.size();
  out.a_dominates = at_least == static_cast<int>(out.cells.size());
  out.verdict = out.a_dominates ? "a>=b" : "mixed";
  return out;
}

Eigen::Index success_frontier(const PhaseGrid& grid, Eigen::Index n, double level) {
  Eigen::Index best = 0;
  for (const auto& c : grid.cells)
    if (c.n == n && c.rate >= level) best = std::max(best, c.S);
  return best;
}

MonotonicityReport check_monotonicity(const PhaseGrid& grid, double z) {
  MonotonicityReport report;
  std::set<Eigen::Index> ns, ss;
  for (const auto& c : grid.cells) {
    ns.insert(c.n);
    ss.insert(c.S);
  }
  auto compare = [&](const PhaseCell& lower, const PhaseCell& higher, const char* axis) {
    // `higher` is expected to have a rate at least that of `lower`.
    ++report.checked;
    const double se = pooled_standard_error(lower.rate, higher.rate, lower.trials, higher.trials);
    if (higher.rate < lower.rate - z * se) {
      ++report.violations;
      std::ostringstream msg;
      msg << axis << ": rate " << higher.rate << " at (n=" << higher.n << ", S=" << higher.S << ") below "
          << lower.rate << " at (n=" << lower.n << ", S=" << lower.S << ")";
      report.details.push_back(msg.str());
    }
  };
  const std::vector<Eigen::Index> nv(ns.begin(), ns.end());
  const std::vector<Eigen::Index> sv(ss.begin(), ss.end());
  for (Eigen::Index S : sv)
    for (std::size_t i = 0; i + 1 < nv.size(); ++i) compare(grid.at(nv[i], S), grid.at(nv[i + 1], S), "n");
  for (Eigen::Index n : nv)
    for (std::size_t i = 0; i + 1 < sv.size(); ++i) compare(grid.at(n, sv[i + 1]), grid.at(n, sv[i]), "S");
  return report;
}

}  // namespace dictcs
