#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "sib/numcore/tensor.hpp"

namespace sib {

// Purposes used to split one master seed into independent streams.
enum class Purpose : std::uint64_t {
  init = 1,
  shuffle = 2,
  encode = 3,
  noise = 4,
  attack = 5,
  evaluation = 6,
  query_encode = 7,
  split = 8,
};

// Counter-based generator: Philox4x32 with 10 rounds (Salmon et al., SC'11).
//
// The 64-bit seed is the Philox key. The 128-bit counter holds a 64-bit block
// index in words 0-1 and a 64-bit stream id in words 2-3, so every (seed,
// stream) pair addresses its own sequence of 2^64 blocks of four 32-bit words.
// Derived generators hash (seed, stream, purpose, a, b) through splitmix64
// into a fresh key. All conversions to reals use integer arithmetic only:
//   uniform01 = (u64 >> 11) * 2^-53, a double in [0, 1).
// Normals use Box-Muller on two uniforms (both outputs are consumed).
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Independent generator for (purpose, a, b), e.g. (encode, sample, epoch).
  Rng derive(Purpose purpose, std::uint64_t a = 0, std::uint64_t b = 0) const;

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  double uniform01();
  double standard_normal();
  // Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  // Raw Philox4x32-10 block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> counter,
                                             std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  unsigned position_ = 4;
  std::optional<double> spare_normal_;
};

std::uint64_t splitmix64(std::uint64_t x);

template <class T>
Matrix<T> rng_standard_normal(Rng& rng, std::size_t rows, std::size_t cols);

template <class T>
Matrix<T> rng_uniform01(Rng& rng, std::size_t rows, std::size_t cols);

// Entry-wise Bernoulli draws; every probability must lie in [0, 1].
template <class T>
Matrix<T> rng_bernoulli(Rng& rng, const Matrix<T>& probs);

// Fisher-Yates permutation of [0, n).
std::vector<std::size_t> rng_permutation(Rng& rng, std::size_t n);

}  // namespace sib
