#pragma once

#include <functional>
#include <span>

#include "sib/numcore/rng.hpp"
#include "sib/numcore/tensor.hpp"

namespace sib::spike {

struct SpikeTrain {
  std::size_t steps = 0;
  std::size_t dim = 0;
  Tensor2D bits;  // steps × dim, entries in {0, 1}
};

// Independent Bernoulli(pixel) draw per step and pixel. Each draw consumes one
// 32-bit word u and fires iff u < pixel·2^32, so 0 never fires and 1 always does.
// Draws are taken step-major: all pixels of step 0, then step 1, ...
SpikeTrain rate_encode(std::span<const float> image, std::size_t steps, Rng& rng);

// Encodes every row of images with its own stream and lays the result out
// time-major: row t·batch + b holds sample b at step t. Identical, row for
// row, to calling rate_encode with stream_for_row(b).
template <class T>
Matrix<T> rate_encode_batch(const Tensor2D& images, std::size_t steps,
                            const std::function<Rng(std::size_t)>& stream_for_row);

}  // namespace sib::spike
