#pragma once

#ifdef SIB_BLACK_BOX_SEAL
#error "victim internals are not visible behind the black-box boundary; use sib/oracle/black_box.hpp"
#endif

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <variant>

#include "sib/dataio/dataset.hpp"
#include "sib/numcore/archive.hpp"
#include "sib/numcore/mlp.hpp"
#include "sib/spike/snn.hpp"

namespace sib::victim {

enum class VictimKind { ann, snn };

std::string to_string(VictimKind kind);
VictimKind parse_victim_kind(const std::string& name);

struct VictimConfig {
  VictimKind kind = VictimKind::ann;
  std::size_t input_dim = 784;
  std::size_t hidden_dim = 3000;
  std::size_t num_classes = 10;
  std::size_t epochs = 10;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  spike::LifParams lif;
  std::size_t steps = 25;
  spike::DecodeMode decode = spike::DecodeMode::membrane_sum;
  double learning_rate = 1e-3;
  // Early stop once the epoch training loss fails to improve by a relative
  // min_delta for `patience` consecutive epochs. patience 0 disables it.
  std::size_t patience = 3;
  double min_delta = 1e-3;

  void validate() const;
};

nlohmann::json to_json(const VictimConfig& config);
VictimConfig victim_config_from_json(const nlohmann::json& j);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double test_accuracy = 0.0;
  double seconds = 0.0;
};

struct TrainingMetadata {
  std::size_t epochs_run = 0;
  double final_test_accuracy = 0.0;
  std::uint64_t seed = 0;
  bool early_stopped = false;
  std::vector<EpochRecord> history;
};

// Maps a batch row to the encoding stream used for it. Unused by ANN models.
using EncodeStream = std::function<Rng(std::size_t row)>;

// A trained or trainable target classifier: dense(hidden) + ReLU + dense(k)
// for ANN, rate-encode → dense → LIF(hidden) → dense → LIF(k) for SNN.
class VictimModel {
 public:
  VictimModel() = default;
  VictimModel(const VictimConfig& config, Rng& init);
  VictimModel(const VictimConfig& config, Mlp<float> ann);
  VictimModel(const VictimConfig& config, spike::SnnNetwork<float> snn);

  const VictimConfig& config() const noexcept { return config_; }
  VictimKind kind() const noexcept { return config_.kind; }

  // {input, hidden, classes}; identical for both kinds at equal config.
  std::vector<std::size_t> layer_widths() const;

  // Class probabilities, batch × k; each row sums to 1.
  Tensor2D predict(const Tensor2D& images, const EncodeStream& stream) const;

  // Parameter access. Every call is counted so tests can prove that a code
  // path never looked at the weights.
  const Mlp<float>& ann() const;
  const spike::SnnNetwork<float>& snn() const;
  Mlp<float>& mutable_ann();
  spike::SnnNetwork<float>& mutable_snn();

  std::uint64_t weight_reads() const noexcept { return weight_reads_.value.load(); }
  std::uint64_t forward_rows() const noexcept { return forward_rows_.value.load(); }
  void reset_counters() const noexcept {
    weight_reads_.value = 0;
    forward_rows_.value = 0;
  }

 private:
  void check_widths() const;

  VictimConfig config_;
  std::variant<Mlp<float>, spike::SnnNetwork<float>> net_;
  // Copyable atomic tally; predict() may run on several threads at once.
  struct Counter {
    std::atomic<std::uint64_t> value{0};
    Counter() = default;
    Counter(const Counter& other) : value(other.value.load()) {}
    Counter& operator=(const Counter& other) {
      value = other.value.load();
      return *this;
    }
  };

  mutable Counter weight_reads_;
  mutable Counter forward_rows_;
};

struct Checkpoint {
  VictimModel model;
  TrainingMetadata training;

  const VictimConfig& config() const noexcept { return model.config(); }
};

// Per-epoch progress hook; may be empty.
using EpochCallback = std::function<void(const EpochRecord&)>;

Checkpoint train_victim(const VictimConfig& config, const dataio::Dataset& train, const dataio::Dataset& test,
                        const EpochCallback& on_epoch = {});

// Fraction of argmax predictions equal to the labels. SNN encodings use the
// stream Rng(seed).derive(evaluation, sample index).
double evaluate_accuracy(const VictimModel& model, const dataio::Dataset& dataset, std::uint64_t seed = 0);
inline double evaluate_accuracy(const Checkpoint& checkpoint, const dataio::Dataset& dataset,
                                std::uint64_t seed = 0) {
  return evaluate_accuracy(checkpoint.model, dataset, seed);
}

ModelArchive to_archive(const Checkpoint& checkpoint);
Checkpoint from_archive(const ModelArchive& archive);
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sib::victim
