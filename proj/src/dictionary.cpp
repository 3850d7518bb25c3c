#include "dictcs/dictionary.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>

namespace dictcs {

namespace {

constexpr double kUnitNormTolerance = 1e-12;
constexpr double kLoadWarnTolerance = 1e-6;

DenseMatrix symmetric_gram(const DenseMatrix& M) {
  DenseMatrix G = M.transpose() * M;
  return (G + G.transpose()) / 2.0;
}

double isometry_from_gram_block(const DenseMatrix& G, const Support& support) {
  if (support.size() == 1) {
    return std::abs(G(support[0], support[0]) - 1.0);
  }
  const DenseMatrix block = G(support, support);
  const auto ext = sym_eig_extremes(block);
  return std::max(1.0 - ext.lambda_min, ext.lambda_max - 1.0);
}

void check_support(const DenseMatrix& M, const Support& support) {
  if (support.empty()) throw Error(ErrorCode::EmptySupport, "support is empty");
  for (Eigen::Index j : support) {
    if (j < 0 || j >= M.cols()) throw Error(ErrorCode::OutOfRange, "support index outside column range");
  }
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

Dictionary::Dictionary(DenseMatrix atoms) : Dictionary(std::move(atoms), {}) {
  for (Eigen::Index j = 0; j < atoms_.cols(); ++j) {
    if (std::abs(atoms_.col(j).norm() - 1.0) > kUnitNormTolerance) {
      throw Error(ErrorCode::OutOfRange, "atom " + std::to_string(j) + " does not have unit norm");
    }
  }
}

Dictionary::Dictionary(DenseMatrix atoms, std::vector<std::string> warnings)
    : atoms_(std::move(atoms)), warnings_(std::move(warnings)) {
  if (atoms_.rows() < 1 || atoms_.cols() < 1) {
    throw Error(ErrorCode::InvalidDimension, "dictionary must have at least one row and one atom");
  }
  if (!all_finite(atoms_)) throw Error(ErrorCode::InvalidDimension, "dictionary has non-finite entries");
}

Dictionary Dictionary::normalized(DenseMatrix atoms) {
  std::vector<std::string> warnings;
  for (Eigen::Index j = 0; j < atoms.cols(); ++j) {
    const double norm = atoms.col(j).norm();
    if (!(norm > 0.0)) throw Error(ErrorCode::ZeroColumn, "atom " + std::to_string(j) + " is zero");
    if (std::abs(norm - 1.0) > kLoadWarnTolerance) {
      std::ostringstream msg;
      msg << "atom " << j << " had norm " << norm << "; normalized";
      warnings.push_back(msg.str());
    }
    atoms.col(j) /= norm;
  }
  return Dictionary(std::move(atoms), std::move(warnings));
}

Dictionary make_dirac_dct(Eigen::Index d) {
  if (d < 2 || d % 2 != 0) throw Error(ErrorCode::InvalidDimension, "Dirac-DCT needs even d >= 2");
  DenseMatrix atoms(d, 2 * d);
  atoms.leftCols(d).setIdentity();
  const double dd = static_cast<double>(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double scale = j == 0 ? std::sqrt(1.0 / dd) : std::sqrt(2.0 / dd);
    for (Eigen::Index t = 0; t < d; ++t) {
      atoms(t, d + j) = scale * std::cos(std::numbers::pi * static_cast<double>((2 * t + 1) * j) / (2.0 * dd));
    }
  }
  return Dictionary::normalized(std::move(atoms));
}

Dictionary make_dirac(Eigen::Index d) {
  if (d < 1) throw Error(ErrorCode::InvalidDimension, "Dirac basis needs d >= 1");
  return Dictionary(DenseMatrix::Identity(d, d));
}

Dictionary load_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = trim(line);
    if (content.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (start <= content.size()) {
      const auto comma = content.find(',', start);
      const auto field = trim(content.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                    : comma - start));
      double value = 0.0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
      if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size() ||
          !std::isfinite(value)) {
        throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": bad number '" +
                                               std::string(field) + "'");
      }
      row.push_back(value);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                             std::to_string(rows.front().size()) + " fields, got " +
                                             std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::ParseError, path.string() + ": no data");
  DenseMatrix atoms(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index t = 0; t < atoms.rows(); ++t)
    for (Eigen::Index j = 0; j < atoms.cols(); ++j) atoms(t, j) = rows[t][j];
  return Dictionary::normalized(std::move(atoms));
}

void save_dictionary(const Dictionary& dict, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  char buf[32];
  for (Eigen::Index t = 0; t < dict.d(); ++t) {
    for (Eigen::Index j = 0; j < dict.K(); ++j) {
      const auto res = std::to_chars(buf, buf + sizeof buf, dict.matrix()(t, j));
      if (j > 0) out << ',';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

double coherence(const Dictionary& dict) {
  if (dict.K() < 2) throw Error(ErrorCode::TooFewAtoms, "coherence needs at least two atoms");
  DenseMatrix G = symmetric_gram(dict.matrix()).cwiseAbs();
  G.diagonal().setZero();
  return std::min(1.0, G.maxCoeff());
}

double babel(const Dictionary& dict, Eigen::Index k) {
  const Eigen::Index K = dict.K();
  if (k < 0 || k > K - 1) throw Error(ErrorCode::OutOfRange, "babel: k outside [0, K-1]");
  if (k == 0) return 0.0;
  const DenseMatrix G = symmetric_gram(dict.matrix()).cwiseAbs();
  std::vector<double> column(static_cast<std::size_t>(K - 1));
  double best = 0.0;
  for (Eigen::Index j = 0; j < K; ++j) {
    std::size_t pos = 0;
    for (Eigen::Index i = 0; i < K; ++i)
      if (i != j) column[pos++] = G(i, j);
    std::partial_sort(column.begin(), column.begin() + k, column.end(), std::greater<>());
    double sum = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) sum += column[static_cast<std::size_t>(i)];
    best = std::max(best, sum);
  }
  return best;
}

double local_isometry(const DenseMatrix& M, const Support& support) {
  check_support(M, support);
  const DenseMatrix sub = M(Eigen::all, support);
  const DenseMatrix G = symmetric_gram(sub);
  Support all(support.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Eigen::Index>(i);
  return isometry_from_gram_block(G, all);
}

std::string_view to_string(IsometryMethod method) {
  switch (method) {
    case IsometryMethod::ExactEnumeration: return "exact-enumeration";
    case IsometryMethod::MonteCarlo: return "monte-carlo";
    case IsometryMethod::CoherenceBound: return "coherence-bound";
  }
  return "unknown";
}

std::uint64_t binomial_capped(std::uint64_t K, std::uint64_t S, std::uint64_t cap) {
  if (S > K) return 0;
  S = std::min(S, K - S);
  // Multiplicative form; each partial product is itself a binomial coefficient.
  std::uint64_t value = 1;
  for (std::uint64_t i = 1; i <= S; ++i) {
    // value * (K - S + i) / i is exact; cancel i first so nothing overflows.
    const std::uint64_t g = std::gcd(value, i);
    const std::uint64_t factor = (K - S + i) / (i / g);
    value /= g;
    if (value > cap / factor) return 0;
    value *= factor;
  }
  return value;
}

IsometryReport restricted_isometry_exact(const DenseMatrix& M, Eigen::Index S, std::uint64_t enumeration_limit) {
  const Eigen::Index K = M.cols();
  if (S < 1 || S > K) throw Error(ErrorCode::OutOfRange, "restricted_isometry_exact: S outside [1, K]");
  const std::uint64_t count =
      binomial_capped(static_cast<std::uint64_t>(K), static_cast<std::uint64_t>(S), enumeration_limit);
  if (count == 0) {
    throw Error(ErrorCode::CombinatorialBlowup,
                "C(" + std::to_string(K) + "," + std::to_string(S) + ") exceeds enumeration limit " +
                    std::to_string(enumeration_limit));
  }
  const DenseMatrix G = symmetric_gram(M);
  Support support(static_cast<std::size_t>(S));
  for (Eigen::Index i = 0; i < S; ++i) support[static_cast<std::size_t>(i)] = i;

  double delta = 0.0;
  std::uint64_t evaluated = 0;
  while (true) {
    delta = std::max(delta, isometry_from_gram_block(G, support));
    ++evaluated;
    // Advance to the next combination in lexicographic order.
    Eigen::Index i = S - 1;
    while (i >= 0 && support[static_cast<std::size_t>(i)] == K - S + i) --i;
    if (i < 0) break;
    ++support[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i + 1; j < S; ++j)
      support[static_cast<std::size_t>(j)] = support[static_cast<std::size_t>(j - 1)] + 1;
  }
  return {S, delta, IsometryMethod::ExactEnumeration, evaluated, "exact over all supports"};
}

Support random_support(Eigen::Index K, Eigen::Index S, RngStream& rng) {
  if (S < 0 || S > K) throw Error(ErrorCode::OutOfRange, "random_support: S outside [0, K]");
  Support pool(static_cast<std::size_t>(K));
  for (Eigen::Index i = 0; i < K; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (Eigen::Index i = 0; i < S; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(K - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(S));
  std::sort(pool.begin(), pool.end());
  return pool;
}

IsometryReport restricted_isometry_sampled(const DenseMatrix& M, Eigen::Index S, std::uint64_t samples,
                                           RngStream& rng) {
  const Eigen::Index K = M.cols();
  if (S < 1 || S > K) throw Error(ErrorCode::OutOfRange, "restricted_isometry_sampled: S outside [1, K]");
  if (samples < 1) throw Error(ErrorCode::OutOfRange, "restricted_isometry_sampled: samples must be >= 1");
  const DenseMatrix G = symmetric_gram(M);
  double delta = 0.0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    delta = std::max(delta, isometry_from_gram_block(G, random_support(K, S, rng)));
  }
  return {S, delta, IsometryMethod::MonteCarlo, samples,
          "lower bound from " + std::to_string(samples) + " random supports"};
}

CoherenceRicBound ric_coherence_bound(const Dictionary& dict, Eigen::Index S) {
  if (S < 1 || S > dict.K()) throw Error(ErrorCode::OutOfRange, "ric_coherence_bound: S outside [1, K]");
  if (S == 1) return {0.0, 0.0};
  return {babel(dict, S - 1), static_cast<double>(S - 1) * coherence(dict)};
}

IsometryReport ric_coherence_report(const Dictionary& dict, Eigen::Index S) {
  const auto bound = ric_coherence_bound(dict, S);
  return {S, bound.babel, IsometryMethod::CoherenceBound, 0, "upper bound mu_1(S-1)"};
}

double coherence_lower_bound(Eigen::Index d, Eigen::Index K) {
  if (d < 1 || K <= d) throw Error(ErrorCode::OutOfRange, "coherence_lower_bound needs K > d >= 1");
  const double dd = static_cast<double>(d);
  const double kk = static_cast<double>(K);
  return std::sqrt((kk - dd) / (dd * (kk - 1.0)));
}

}  // namespace dictcs
