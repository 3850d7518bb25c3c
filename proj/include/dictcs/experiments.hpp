#pragma once

// Seeded phase-transition harness: recovery rates over an (n, S) grid.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dictcs/dictionary.hpp"
#include "dictcs/measurement.hpp"
#include "dictcs/recovery.hpp"

namespace dictcs {

enum class CoefficientModel { Gaussian, UnitSign };
enum class MatrixMode { Fixed, Fresh };

std::string_view to_string(CoefficientModel model);
std::string_view to_string(MatrixMode mode);
CoefficientModel parse_coefficient_model(std::string_view name);
MatrixMode parse_matrix_mode(std::string_view name);

struct ExperimentConfig {
  Eigen::Index d = 256;
  /// "dirac", "dirac-dct" or a CSV dictionary path.
  std::string dictionary = "dirac-dct";
  EnsembleKind ensemble = EnsembleKind::Gaussian;
  std::vector<Eigen::Index> n_list;
  std::vector<Eigen::Index> s_list;
  int trials = 100;
  CoefficientModel coeff_model = CoefficientModel::Gaussian;
  Algorithm algorithm = Algorithm::BasisPursuit;
  std::uint64_t seed = 0;
  MatrixMode matrix_mode = MatrixMode::Fixed;
  BpOptions bp_options;
  /// When false, mean_runtime_s is written as 0 so output is byte-stable.
  bool record_runtime = true;

  /// d = 256 Dirac-DCT, n = 64..224 step 32, S = 4..64 step 4 (2..32 step 2
  /// and unit-sign coefficients for thresholding), 100 trials.
  static ExperimentConfig reference_default(Algorithm algorithm);

  void validate() const;
  std::string digest() const;
};

/// Builds the named dictionary ("dirac", "dirac-dct") or loads a CSV file.
Dictionary resolve_dictionary(const std::string& name, Eigen::Index d);

/// Uniform support by partial Fisher-Yates, then N(0,1) (redrawn if exactly
/// zero) or uniform +-1 coefficients.
SparseSignal draw_sparse_signal(Eigen::Index K, Eigen::Index S, CoefficientModel model, RngStream& rng);

struct CellOutcome {
  bool success = false;
  double seconds = 0.0;
  std::string reason;  // nonempty when the recovery call failed
};

/// Holds the dictionary and, in fixed mode, one sensing matrix Phi = A D per
/// n. Matrices derive from (seed, n) only, so every algorithm run with the
/// same seed sees the same matrices; signals derive from (seed, S, trial).
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config);

  const ExperimentConfig& config() const noexcept { return config_; }
  const Dictionary& dictionary() const noexcept { return dictionary_; }

  CellOutcome run_cell(Eigen::Index n, Eigen::Index S, int trial_index) const;
  DenseMatrix sensing_matrix(Eigen::Index n, Eigen::Index S, int trial_index) const;

 private:
  ExperimentConfig config_;
  Dictionary dictionary_;
  std::map<Eigen::Index, DenseMatrix> fixed_;
};

bool run_cell(const ExperimentConfig& config, Eigen::Index n, Eigen::Index S, int trial_index);

struct PhaseCell {
  Eigen::Index n = 0;
  Eigen::Index S = 0;
  int trials = 0;
  int successes = 0;
  double rate = 0.0;
  double mean_runtime = 0.0;

  bool operator==(const PhaseCell&) const = default;
};

struct PhaseGrid {
  std::string algorithm;
  std::string dictionary;
  std::string ensemble;
  /// Not persisted in CSV and not part of equality.
  std::string config_digest;
  std::vector<PhaseCell> cells;

  const PhaseCell& at(Eigen::Index n, Eigen::Index S) const;
  bool operator==(const PhaseGrid& other) const {
    return algorithm == other.algorithm && dictionary == other.dictionary && ensemble == other.ensemble &&
           cells == other.cells;
  }
};

/// Evaluates every (n, S, trial) task on `workers` threads; the grid is
/// identical for any worker count. Failure reasons go to `log` if given.
PhaseGrid run_phase_transition(const ExperimentConfig& config, unsigned workers = 1, std::ostream* log = nullptr);

inline constexpr const char* kPhaseCsvHeader = "algorithm,dictionary,ensemble,n,S,trials,successes,rate,mean_runtime_s";

void write_csv(const PhaseGrid& grid, std::ostream& out);
void export_csv(const PhaseGrid& grid, const std::filesystem::path& path);
PhaseGrid read_csv(std::istream& in);
PhaseGrid import_csv(const std::filesystem::path& path);

struct CellDifference {
  Eigen::Index n = 0;
  Eigen::Index S = 0;
  double rate_a = 0.0;
  double rate_b = 0.0;
  double difference = 0.0;  // rate_a - rate_b
};

struct GridComparison {
  std::vector<CellDifference> cells;
  bool a_dominates = false;       // rate_a >= rate_b on every cell
  double fraction_a_at_least_b = 0.0;
  double max_abs_difference = 0.0;
  std::string verdict;  // "a>=b" or "mixed"
};

/// Throws CellMismatch unless both grids cover the same (n, S) cells.
GridComparison compare_grids(const PhaseGrid& a, const PhaseGrid& b);

/// Largest S whose rate is >= `level` at this n (0 if none).
Eigen::Index success_frontier(const PhaseGrid& grid, Eigen::Index n, double level = 0.5);

struct MonotonicityReport {
  int checked = 0;
  int violations = 0;
  std::vector<std::string> details;
};

/// Rates should not decrease along increasing n (fixed S) nor increase along
/// increasing S (fixed n) by more than `z` pooled binomial standard errors.
MonotonicityReport check_monotonicity(const PhaseGrid& grid, double z = 2.0);

}  // namespace dictcs
