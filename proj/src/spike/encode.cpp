#include "sib/spike/encode.hpp"

#include <cmath>
#include <vector>

namespace sib::spike {
namespace {

std::vector<double> thresholds_for(std::span<const float> image) {
  std::vector<double> thresholds(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double p = image[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("rate_encode: pixel " + std::to_string(i) + " = " + std::to_string(p) +
                            " outside [0, 1]");
    }
    thresholds[i] = std::ldexp(p, 32);
  }
  return thresholds;
}

}  // namespace

SpikeTrain rate_encode(std::span<const float> image, std::size_t steps, Rng& rng) {
  const auto thresholds = thresholds_for(image);
  SpikeTrain train{steps, image.size(), Tensor2D(steps, image.size())};
  for (std::size_t t = 0; t < steps; ++t) {
    auto row = train.bits.row(t);
    for (std::size_t i = 0; i < image.size(); ++i) {
      row[i] = static_cast<double>(rng.next_u32()) < thresholds[i] ? 1.0f : 0.0f;
    }
  }
  return train;
}

template <class T>
Matrix<T> rate_encode_batch(const Tensor2D& images, std::size_t steps,
                            const std::function<Rng(std::size_t)>& stream_for_row) {
  const std::size_t batch = images.rows();
  const std::size_t dim = images.cols();
  Matrix<T> out(steps * batch, dim);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto thresholds = thresholds_for(images.row(b));
    Rng rng = stream_for_row(b);
    for (std::size_t t = 0; t < steps; ++t) {
      auto row = out.row(t * batch + b);
      for (std::size_t i = 0; i < dim; ++i) {
        row[i] = static_cast<double>(rng.next_u32()) < thresholds[i] ? T{1} : T{0};
      }
    }
  }
  return out;
}

template Matrix<float> rate_encode_batch(const Tensor2D&, std::size_t, const std::function<Rng(std::size_t)>&);
template Matrix<double> rate_encode_batch(const Tensor2D&, std::size_t, const std::function<Rng(std::size_t)>&);

}  // namespace sib::spike
