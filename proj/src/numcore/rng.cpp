#include "sib/numcore/rng.hpp"

#include <cmath>
#include <numbers>

namespace sib {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::array<std::uint32_t, 4> Rng::philox(std::array<std::uint32_t, 4> ctr,
                                         std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

Rng Rng::derive(Purpose purpose, std::uint64_t a, std::uint64_t b) const {
  std::uint64_t h = splitmix64(seed_);
  h = splitmix64(h ^ stream_);
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return Rng(h, 0);
}

void Rng::refill() {
  const std::array<std::uint32_t, 4> counter = {
      static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
      static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                            static_cast<std::uint32_t>(seed_ >> 32)};
  buffer_ = philox(counter, key);
  ++block_;
  position_ = 0;
}

std::uint32_t Rng::next_u32() {
  if (position_ == 4) refill();
  return buffer_[position_++];
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t lo = next_u32();
  const std::uint64_t hi = next_u32();
  return (hi << 32) | lo;
}

double Rng::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::standard_normal() {
  if (spare_normal_) {
    const double v = *spare_normal_;
    spare_normal_.reset();
    return v;
  }
  const double u1 = 1.0 - uniform01();  // (0, 1]
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw ValidationError("Rng::below: empty range");
  // Rejection on the top of the range keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

template <class T>
Matrix<T> rng_standard_normal(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix<T> out(rows, cols);
  for (auto& v : out.values()) v = static_cast<T>(rng.standard_normal());
  return out;
}

template <class T>
Matrix<T> rng_uniform01(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix<T> out(rows, cols);
  for (auto& v : out.values()) v = static_cast<T>(rng.uniform01());
  return out;
}

template <class T>
Matrix<T> rng_bernoulli(Rng& rng, const Matrix<T>& probs) {
  Matrix<T> out(probs.rows(), probs.cols());
  auto src = probs.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double p = static_cast<double>(src[i]);
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("rng_bernoulli: probability " + std::to_string(p) +
                            " outside [0, 1]");
    }
    dst[i] = rng.uniform01() < p ? T{1} : T{0};
  }
  return out;
}

std::vector<std::size_t> rng_permutation(Rng& rng, std::size_t n) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

template Matrix<float> rng_standard_normal(Rng&, std::size_t, std::size_t);
template Matrix<double> rng_standard_normal(Rng&, std::size_t, std::size_t);
template Matrix<float> rng_uniform01(Rng&, std::size_t, std::size_t);
template Matrix<double> rng_uniform01(Rng&, std::size_t, std::size_t);
template Matrix<float> rng_bernoulli(Rng&, const Matrix<float>&);
template Matrix<double> rng_bernoulli(Rng&, const Matrix<double>&);

}  // namespace sib
