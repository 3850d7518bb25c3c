#include "dictcs/numerics.hpp"

#include <numbers>

namespace dictcs {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t key, std::uint64_t index) {
  return splitmix64(key ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> substream)
    : seed_(seed), key_(splitmix64(seed)) {
  for (std::uint64_t index : substream) key_ = mix(key_, index);
  engine_.seed(key_);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t key) : seed_(seed), key_(key), engine_(key) {}

RngStream RngStream::substream(std::uint64_t index) const { return RngStream(seed_, mix(key_, index)); }

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t RngStream::uniform_index(std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorCode::OutOfRange, "uniform_index: bound must be positive");
  // Reject the top partial block so every residue is equally likely.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % bound;
}

double RngStream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1] keeps the log finite.
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Vector gaussian_sample(RngStream& rng, Eigen::Index count) {
  if (count < 0) throw Error(ErrorCode::OutOfRange, "gaussian_sample: negative count");
  Vector out(count);
  for (Eigen::Index i = 0; i < count; ++i) out[i] = rng.gaussian();
  return out;
}

Vector rademacher_sample(RngStream& rng, Eigen::Index count) {
  if (count < 0) throw Error(ErrorCode::OutOfRange, "rademacher_sample: negative count");
  Vector out(count);
  for (Eigen::Index i = 0; i < count; ++i) out[i] = rng.rademacher();
  return out;
}

double log_binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) throw Error(ErrorCode::OutOfRange, "log_binomial: k outside [0, n]");
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace dictcs
