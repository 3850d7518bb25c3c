// Command-line front end: phase-transition runs, isometry constants,
// coherence, closed-form bounds and concentration checks.
//
// Exit codes: 0 success, 2 invalid arguments, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dictcs/bounds.hpp"
#include "dictcs/dictionary.hpp"
#include "dictcs/experiments.hpp"
#include "dictcs/measurement.hpp"
#include "dictcs/recovery.hpp"

using namespace dictcs;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

const std::vector<std::string> kEnsembles{"gaussian", "bernoulli"};
const std::vector<std::string> kAlgorithms{"bp", "omp", "thresh"};

void print(const char* key, double value) { std::cout << key << ": " << std::setprecision(17) << value << '\n'; }
void print(const char* key, std::int64_t value) { std::cout << key << ": " << value << '\n'; }
void print(const char* key, const std::string& value) { std::cout << key << ": " << value << '\n'; }

struct DictArgs {
  std::string dict = "dirac-dct";
  Eigen::Index d = 256;
};

void add_dict_options(CLI::App* cmd, DictArgs& args) {
  cmd->add_option("--dict", args.dict, "dirac | dirac-dct | path to a CSV dictionary")->capture_default_str();
  cmd->add_option("--d", args.d, "signal dimension for built-in dictionaries")->capture_default_str();
}

void report_isometry(const IsometryReport& r) {
  print("S", static_cast<std::int64_t>(r.S));
  print("delta", r.delta);
  print("method", std::string(to_string(r.method)));
  print("supports_evaluated", static_cast<std::int64_t>(r.supports_evaluated));
  print("note", r.confidence_note);
}

void report_concentration(const ConcentrationReport& r) {
  print("parameter", r.parameter);
  print("n", static_cast<std::int64_t>(r.n));
  print("trials", static_cast<std::int64_t>(r.trials));
  print("events", static_cast<std::int64_t>(r.events));
  print("empirical_frequency", r.empirical_frequency);
  print("theoretical_bound", r.theoretical_bound);
  print("slack", r.slack);
  print("satisfied", std::string(r.satisfied ? "true" : "false"));
}

Vector random_unit(Eigen::Index d, RngStream& rng) {
  Vector v = gaussian_sample(rng, d);
  return v / v.norm();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse recovery in redundant dictionaries: experiments and bounds"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  // phase -------------------------------------------------------------------
  ExperimentConfig phase_cfg;
  std::string phase_algo = "bp", phase_ensemble = "gaussian", phase_mode = "fixed", phase_coeff, phase_out;
  unsigned phase_workers = 1;
  bool phase_no_timing = false, phase_verbose = false;
  auto* phase = app.add_subcommand("phase", "Run a phase-transition grid and write CSV");
  phase->add_option("--d", phase_cfg.d, "signal dimension")->capture_default_str();
  phase->add_option("--dict", phase_cfg.dictionary, "dirac | dirac-dct | CSV path")->capture_default_str();
  phase->add_option("--ensemble", phase_ensemble)->check(CLI::IsMember(kEnsembles))->capture_default_str();
  phase->add_option("--algo", phase_algo)->check(CLI::IsMember(kAlgorithms))->capture_default_str();
  phase->add_option("--n", phase_cfg.n_list, "comma-separated measurement counts")->delimiter(',')->required();
  phase->add_option("--s", phase_cfg.s_list, "comma-separated sparsity levels")->delimiter(',')->required();
  phase->add_option("--trials", phase_cfg.trials)->capture_default_str();
  phase->add_option("--seed", phase_cfg.seed)->capture_default_str();
  phase->add_option("--matrix-mode", phase_mode)->check(CLI::IsMember({"fixed", "fresh"}))->capture_default_str();
  phase->add_option("--coeff", phase_coeff, "gaussian | unit-sign (default: unit-sign for thresh, else gaussian)")
      ->check(CLI::IsMember({"gaussian", "unit-sign"}));
  phase->add_option("--out", phase_out, "output CSV path (default: stdout)");
  phase->add_option("--workers", phase_workers, "worker threads (0 = hardware concurrency)")->capture_default_str();
  phase->add_flag("--no-timing", phase_no_timing, "write mean_runtime_s as 0 for byte-stable output");
  phase->add_flag("--verbose", phase_verbose, "log per-trial failure reasons to stderr");

  // ric ---------------------------------------------------------------------
  DictArgs ric_dict;
  Eigen::Index ric_s = 2, ric_n = 0;
  std::uint64_t ric_limit = kDefaultEnumerationLimit, ric_samples = 0, ric_seed = 0;
  std::string ric_ensemble = "gaussian";
  bool ric_with_measurement = false;
  auto* ric = app.add_subcommand("ric", "Restricted isometry constant of D or of A D");
  add_dict_options(ric, ric_dict);
  ric->add_option("--s", ric_s, "sparsity level")->required();
  auto* ric_limit_opt = ric->add_option("--exact-limit", ric_limit, "maximum supports to enumerate");
  auto* ric_samples_opt = ric->add_option("--samples", ric_samples, "Monte-Carlo lower bound from random supports");
  ric_limit_opt->excludes(ric_samples_opt);
  auto* ric_meas = ric->add_flag("--with-measurement", ric_with_measurement, "use Phi = A D instead of D");
  ric->add_option("--n", ric_n, "rows of A")->needs(ric_meas);
  ric->add_option("--ensemble", ric_ensemble)->check(CLI::IsMember(kEnsembles))->capture_default_str();
  ric->add_option("--seed", ric_seed)->capture_default_str();

  // coherence ---------------------------------------------------------------
  DictArgs coh_dict;
  Eigen::Index coh_max_k = 1;
  auto* coh = app.add_subcommand("coherence", "Coherence and Babel function of a dictionary");
  add_dict_options(coh, coh_dict);
  coh->add_option("--max-k", coh_max_k, "print mu_1(k) for k = 1..max-k")->capture_default_str();

  // bounds ------------------------------------------------------------------
  auto* bounds = app.add_subcommand("bounds", "Evaluate closed-form bounds");
  bounds->require_subcommand(1);
  Eigen::Index b_S = 1, b_K = 1;
  double b_delta = 13.0 / 51.0, b_t = 1.0, b_c = kGaussianConcentrationConstant, b_eps = 0.5;
  std::string b_form = "printed";
  auto* bp_samples = bounds->add_subcommand("bp-samples", "RIP sample count for Phi = A D");
  bp_samples->add_option("--S", b_S)->required();
  bp_samples->add_option("--K", b_K)->required();
  bp_samples->add_option("--delta", b_delta)->capture_default_str();
  bp_samples->add_option("--t", b_t)->capture_default_str();
  bp_samples->add_option("--c", b_c)->capture_default_str();
  bp_samples->add_option("--form", b_form)->check(CLI::IsMember({"printed", "strict"}))->capture_default_str();

  auto* cor_samples = bounds->add_subcommand("corollary-samples", "Coherence-condition sample count C1 (S log(K/S) + C2 + t)");
  cor_samples->add_option("--S", b_S)->required();
  cor_samples->add_option("--K", b_K)->required();
  cor_samples->add_option("--t", b_t)->capture_default_str();
  cor_samples->add_option("--c", b_c)->capture_default_str();
  double cor_mu = -1.0;
  cor_samples->add_option("--mu", cor_mu, "coherence; also reports whether S - 1 <= 1/(16 mu)");

  auto* thresh_samples = bounds->add_subcommand("thresh-samples", "Thresholding sample count C(eps)(log 2K + t)");
  thresh_samples->add_option("--eps", b_eps)->capture_default_str();
  thresh_samples->add_option("--K", b_K)->required();
  thresh_samples->add_option("--t", b_t)->capture_default_str();

  std::vector<double> tc_coeffs;
  double tc_mu1_s = 0.0, tc_mu1_sm1 = 0.0;
  auto* thresh_coherent = bounds->add_subcommand("thresh-coherent", "Thresholding sample count from Babel values");
  thresh_coherent->add_option("--coeffs", tc_coeffs, "nonzero coefficients of x")->delimiter(',')->required();
  thresh_coherent->add_option("--K", b_K)->required();
  thresh_coherent->add_option("--mu1-s", tc_mu1_s)->required();
  thresh_coherent->add_option("--mu1-sm1", tc_mu1_sm1)->required();
  thresh_coherent->add_option("--t", b_t)->capture_default_str();

  std::string tail_kind = "ip";
  double tail_param = 0.1, tail_n = 1.0, tail_v = 1.0, tail_M = 0.0;
  auto* tail = bounds->add_subcommand("tail", "Tail and failure-probability bounds");
  tail->add_option("--kind", tail_kind)
      ->check(CLI::IsMember({"conc", "gauss", "ip", "bennett", "local", "global"}))
      ->capture_default_str();
  tail->add_option("--param", tail_param, "eps (conc, gauss), t (ip), x (bennett) or delta (local, global)")
      ->capture_default_str();
  tail->add_option("--n", tail_n)->capture_default_str();
  tail->add_option("--c", b_c)->capture_default_str();
  tail->add_option("--v", tail_v, "bennett variance term")->capture_default_str();
  tail->add_option("--M", tail_M, "bennett range term")->capture_default_str();
  tail->add_option("--S", b_S)->capture_default_str();
  tail->add_option("--K", b_K)->capture_default_str();

  double cond_d3 = 0.0, cond_d4 = 0.0;
  auto* bp_cond = bounds->add_subcommand("bp-condition", "delta_3S + 3 delta_4S < 2 and the error constant");
  bp_cond->add_option("--delta3s", cond_d3)->required();
  bp_cond->add_option("--delta4s", cond_d4)->required();
  double err_eta = 0.0;
  bp_cond->add_option("--eta", err_eta, "noise level for the error bound")->capture_default_str();

  double comp_ds = 0.0;
  auto* composed = bounds->add_subcommand("composed", "delta_S(D) + delta (1 + delta_S(D))");
  composed->add_option("--delta-s", comp_ds)->required();
  composed->add_option("--delta", b_delta)->required();

  auto* constants = bounds->add_subcommand("constants", "Print the inner-product and corollary constants");

  // concentration -------------------------------------------------------------
  EnsembleSpec conc_spec;
  std::string conc_ensemble = "gaussian", conc_mode = "norm";
  std::uint64_t conc_trials = 10000;
  double conc_param = 0.2;
  unsigned conc_workers = 1;
  auto* conc = app.add_subcommand("concentration", "Monte-Carlo check of a concentration inequality");
  conc->add_option("--ensemble", conc_ensemble)->check(CLI::IsMember(kEnsembles))->capture_default_str();
  conc->add_option("--n", conc_spec.n)->required();
  conc->add_option("--d", conc_spec.d)->required();
  conc->add_option("--trials", conc_trials)->capture_default_str();
  conc->add_option("--mode", conc_mode)->check(CLI::IsMember({"norm", "ip"}))->capture_default_str();
  conc->add_option("--param", conc_param, "eps (norm) or t (ip)")->capture_default_str();
  conc->add_option("--seed", conc_spec.seed)->capture_default_str();
  conc->add_option("--workers", conc_workers)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }

  try {
    if (*phase) {
      phase_cfg.algorithm = parse_algorithm(phase_algo);
      phase_cfg.ensemble = parse_ensemble_kind(phase_ensemble);
      phase_cfg.matrix_mode = parse_matrix_mode(phase_mode);
      phase_cfg.coeff_model = phase_coeff.empty()
                                  ? (phase_cfg.algorithm == Algorithm::Thresholding ? CoefficientModel::UnitSign
                                                                                    : CoefficientModel::Gaussian)
                                  : parse_coefficient_model(phase_coeff);
      phase_cfg.record_runtime = !phase_no_timing;
      if (phase_workers == 0) phase_workers = std::max(1u, std::thread::hardware_concurrency());
      const PhaseGrid grid = run_phase_transition(phase_cfg, phase_workers, phase_verbose ? &std::cerr : nullptr);
      if (phase_out.empty() || phase_out == "-") {
        write_csv(grid, std::cout);
      } else {
        export_csv(grid, phase_out);
      }
      return 0;
    }

    if (*ric) {
      const Dictionary D = resolve_dictionary(ric_dict.dict, ric_dict.d);
      DenseMatrix M = D.matrix();
      if (ric_with_measurement) {
        if (ric_n < 1) throw Error(ErrorCode::OutOfRange, "--with-measurement needs --n >= 1");
        EnsembleSpec spec;
        spec.kind = parse_ensemble_kind(ric_ensemble);
        spec.n = ric_n;
        spec.d = D.d();
        spec.seed = ric_seed;
        M = draw(spec) * D.matrix();
      }
      if (ric_samples > 0) {
        RngStream rng(ric_seed, {3});
        report_isometry(restricted_isometry_sampled(M, ric_s, ric_samples, rng));
      } else {
        report_isometry(restricted_isometry_exact(M, ric_s, ric_limit));
      }
      if (!ric_with_measurement && D.K() >= 2) {
        const auto bound = ric_coherence_bound(D, ric_s);
        print("babel_bound", bound.babel);
        print("coherence_bound", bound.coherence);
      }
      return 0;
    }

    if (*coh) {
      const Dictionary D = resolve_dictionary(coh_dict.dict, coh_dict.d);
      for (const auto& w : D.warnings()) std::cerr << "warning: " << w << '\n';
      print("d", static_cast<std::int64_t>(D.d()));
      print("K", static_cast<std::int64_t>(D.K()));
      print("mu", coherence(D));
      if (D.K() > D.d()) print("mu_lower_bound", coherence_lower_bound(D.d(), D.K()));
      for (Eigen::Index k = 1; k <= coh_max_k; ++k) {
        std::cout << "mu1(" << k << "): " << std::setprecision(17) << babel(D, k) << '\n';
      }
      return 0;
    }

    if (*bp_samples) {
      const auto form = b_form == "strict" ? SampleBoundForm::DerivationStrict : SampleBoundForm::Printed;
      print("value", sample_bound_bp_value(b_S, b_K, b_delta, b_t, b_c, form));
      print("n", sample_bound_bp(b_S, b_K, b_delta, b_t, b_c, form));
      return 0;
    }
    if (*cor_samples) {
      print("C1", corollary_c1(b_c));
      print("C2", corollary_c2());
      print("value", sample_bound_corollary_value(b_S, b_K, b_t, b_c));
      print("n", sample_bound_corollary(b_S, b_K, b_t, b_c));
      if (cor_mu >= 0.0) {
        print("sparsity_condition", std::string(corollary_sparsity_condition(b_S, cor_mu) ? "true" : "false"));
      }
      return 0;
    }
    if (*thresh_samples) {
      print("C_eps", thresholding_constant(b_eps));
      print("value", thresholding_sample_bound_value(b_eps, b_K, b_t));
      print("n", thresholding_sample_bound(b_eps, b_K, b_t));
      return 0;
    }
    if (*thresh_coherent) {
      const auto S = static_cast<Eigen::Index>(tc_coeffs.size());
      Support sup(tc_coeffs.size());
      for (Eigen::Index i = 0; i < S; ++i) sup[static_cast<std::size_t>(i)] = i;
      const SparseSignal x(std::max(b_K, S), sup, Eigen::Map<const Vector>(tc_coeffs.data(), S));
      const bool ok = thresholding_recovery_condition(x, tc_mu1_s, tc_mu1_sm1);
      print("recovery_condition", std::string(ok ? "true" : "false"));
      print("value", thresholding_sample_bound_coherent_value(x, S, b_K, tc_mu1_s, tc_mu1_sm1, b_t));
      print("n", thresholding_sample_bound_coherent(x, S, b_K, tc_mu1_s, tc_mu1_sm1, b_t));
      return 0;
    }
    if (*tail) {
      const auto n_int = static_cast<Eigen::Index>(tail_n);
      double value = 0.0;
      if (tail_kind == "conc") {
        value = concentration_bound(tail_param, n_int, b_c);
      } else if (tail_kind == "gauss") {
        value = gaussian_concentration_bound(tail_param, n_int);
      } else if (tail_kind == "ip") {
        value = inner_product_tail_bound(tail_param, tail_n);
      } else if (tail_kind == "bennett") {
        value = bennett_tail(tail_param, tail_v, tail_M);
      } else if (tail_kind == "local") {
        value = local_iso_failure_prob(b_S, tail_param, tail_n, b_c);
      } else {
        value = global_ric_failure_prob(b_S, b_K, tail_param, tail_n, b_c);
      }
      print("bound", value);
      return 0;
    }
    if (*bp_cond) {
      print("condition", std::string(bp_ric_condition(cond_d3, cond_d4) ? "true" : "false"));
      print("error_bound", bp_error_bound(cond_d4, err_eta));
      return 0;
    }
    if (*composed) {
      print("delta_S", composed_ric_bound(comp_ds, b_delta));
      return 0;
    }
    if (*constants) {
      print("ip_C1", ip_constant_c1());
      print("ip_C2", ip_constant_c2());
      print("thresh_C3", thresholding_c3());
      print("corollary_C1_times_c", corollary_c1(1.0));
      print("corollary_C1_gaussian", corollary_c1(kGaussianConcentrationConstant));
      print("corollary_C2", corollary_c2());
      return 0;
    }

    if (*conc) {
      conc_spec.kind = parse_ensemble_kind(conc_ensemble);
      RngStream rng(conc_spec.seed, {4});
      const Vector x = random_unit(conc_spec.d, rng);
      if (conc_mode == "norm") {
        report_concentration(empirical_norm_concentration(conc_spec, x, conc_param, conc_trials,
                                                          kGaussianConcentrationConstant, conc_workers));
      } else {
        const Vector y = random_unit(conc_spec.d, rng);
        report_concentration(empirical_ip_concentration(conc_spec, x, y, conc_param, conc_trials, conc_workers));
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_numerical(e.code()) ? kExitNumerical : kExitInvalid;
  }
  return kExitInvalid;
}
