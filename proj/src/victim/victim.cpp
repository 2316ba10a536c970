#include "sib/victim/victim.hpp"

#include <chrono>
#include <cmath>

#include "sib/numcore/adam.hpp"
#include "sib/numcore/loss.hpp"

namespace sib::victim {

using nlohmann::json;
using spike::SnnNetwork;

std::string to_string(VictimKind kind) { return kind == VictimKind::ann ? "ann" : "snn"; }

VictimKind parse_victim_kind(const std::string& name) {
  if (name == "ann") return VictimKind::ann;
  if (name == "snn") return VictimKind::snn;
  throw ConfigError("unknown victim kind '" + name + "' (expected ann or snn)");
}

void VictimConfig::validate() const {
  if (input_dim == 0) throw ConfigError("victim: input_dim must be positive");
  if (hidden_dim == 0) throw ConfigError("victim: hidden_dim must be positive");
  if (num_classes < 2) throw ConfigError("victim: num_classes must be at least 2");
  if (batch_size == 0) throw ConfigError("victim: batch_size must be positive");
  if (kind == VictimKind::snn && steps == 0) throw ConfigError("victim: steps must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("victim: learning_rate must be positive");
  if (!(min_delta >= 0.0)) throw ConfigError("victim: min_delta must be non-negative");
  lif.validate();
}

json to_json(const VictimConfig& c) {
  return {{"kind", to_string(c.kind)},
          {"input_dim", c.input_dim},
          {"hidden_dim", c.hidden_dim},
          {"num_classes", c.num_classes},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"alpha", c.lif.alpha},
          {"eta", c.lif.eta},
          {"surrogate_slope", c.lif.surrogate_slope},
          {"steps", c.steps},
          {"decode", spike::to_string(c.decode)},
          {"learning_rate", c.learning_rate},
          {"patience", c.patience},
          {"min_delta", c.min_delta}};
}

VictimConfig victim_config_from_json(const json& j) {
  VictimConfig c;
  try {
    if (j.contains("kind")) c.kind = parse_victim_kind(j.at("kind").get<std::string>());
    auto read = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    read("input_dim", c.input_dim);
    read("hidden_dim", c.hidden_dim);
    read("num_classes", c.num_classes);
    read("epochs", c.epochs);
    read("batch_size", c.batch_size);
    read("seed", c.seed);
    read("alpha", c.lif.alpha);
    read("eta", c.lif.eta);
    read("surrogate_slope", c.lif.surrogate_slope);
    read("steps", c.steps);
    if (j.contains("decode")) c.decode = spike::parse_decode_mode(j.at("decode").get<std::string>());
    read("learning_rate", c.learning_rate);
    read("patience", c.patience);
    read("min_delta", c.min_delta);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("victim config: ") + e.what());
  }
  c.validate();
  return c;
}

VictimModel::VictimModel(const VictimConfig& config, Rng& init) : config_(config) {
  config_.validate();
  if (config_.kind == VictimKind::ann) {
    net_ = Mlp<float>({config_.input_dim, config_.hidden_dim, config_.num_classes},
                      {Activation::relu, Activation::identity}, init);
  } else {
    net_ = SnnNetwork<float>(config_.input_dim, config_.hidden_dim, config_.num_classes, config_.lif, init);
  }
  check_widths();
}

VictimModel::VictimModel(const VictimConfig& config, Mlp<float> ann) : config_(config), net_(std::move(ann)) {
  config_.validate();
  if (config_.kind != VictimKind::ann) throw ConfigError("VictimModel: ANN network given for an snn config");
  const auto& acts = std::get<Mlp<float>>(net_).activations();
  if (acts != std::vector<Activation>{Activation::relu, Activation::identity}) {
    throw ConfigError("VictimModel: ANN victim must be dense+relu, dense+identity");
  }
  check_widths();
}

VictimModel::VictimModel(const VictimConfig& config, SnnNetwork<float> snn) : config_(config), net_(std::move(snn)) {
  config_.validate();
  if (config_.kind != VictimKind::snn) throw ConfigError("VictimModel: SNN network given for an ann config");
  std::get<SnnNetwork<float>>(net_).set_lif(config_.lif);
  check_widths();
}

std::vector<std::size_t> VictimModel::layer_widths() const {
  if (const auto* mlp = std::get_if<Mlp<float>>(&net_)) return mlp->widths();
  const auto& snn = std::get<SnnNetwork<float>>(net_);
  return {snn.input_dim(), snn.hidden_dim(), snn.num_classes()};
}

void VictimModel::check_widths() const {
  const std::vector<std::size_t> expected{config_.input_dim, config_.hidden_dim, config_.num_classes};
  if (layer_widths() != expected) {
    throw DimensionError("VictimModel: network widths do not match the configured {input, hidden, classes}");
  }
}

const Mlp<float>& VictimModel::ann() const {
  ++weight_reads_.value;
  if (const auto* mlp = std::get_if<Mlp<float>>(&net_)) return *mlp;
  throw Error("VictimModel: not an ANN victim");
}

const SnnNetwork<float>& VictimModel::snn() const {
  ++weight_reads_.value;
  if (const auto* snn = std::get_if<SnnNetwork<float>>(&net_)) return *snn;
  throw Error("VictimModel: not an SNN victim");
}

Mlp<float>& VictimModel::mutable_ann() { return const_cast<Mlp<float>&>(std::as_const(*this).ann()); }

SnnNetwork<float>& VictimModel::mutable_snn() {
  return const_cast<SnnNetwork<float>&>(std::as_const(*this).snn());
}

Tensor2D VictimModel::predict(const Tensor2D& images, const EncodeStream& stream) const {
  if (images.cols() != config_.input_dim) {
    throw DimensionError("VictimModel::predict: got " + std::to_string(images.cols()) + " features, expected " +
                         std::to_string(config_.input_dim));
  }
  forward_rows_.value += images.rows();
  if (const auto* mlp = std::get_if<Mlp<float>>(&net_)) return softmax_rows(mlp->infer(images));

  const auto& snn = std::get<SnnNetwork<float>>(net_);
  if (!stream) throw Error("VictimModel::predict: SNN victims need an encoding stream");
  constexpr std::size_t kChunk = 128;
  Tensor2D out(images.rows(), config_.num_classes);
  for (std::size_t start = 0; start < images.rows(); start += kChunk) {
    const std::size_t n = std::min(kChunk, images.rows() - start);
    const auto encoded = spike::rate_encode_batch<float>(images.slice_rows(start, n), config_.steps,
                                                         [&](std::size_t r) { return stream(start + r); });
    const auto trace = snn.forward(encoded, config_.steps);
    const auto probs = spike::decode(trace, config_.decode);
    std::copy(probs.values().begin(), probs.values().end(),
              out.values().begin() + static_cast<std::ptrdiff_t>(start * config_.num_classes));
  }
  return out;
}

namespace {

Tensor2D gather_rows(const Tensor2D& m, std::span<const std::size_t> idx) {
  Tensor2D out(idx.size(), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    auto src = m.row(idx[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

void check_dataset(const VictimConfig& config, const dataio::Dataset& d, const char* which) {
  d.validate();
  if (d.size() == 0) throw ValidationError(std::string("train_victim: ") + which + " set is empty");
  if (d.dim() != config.input_dim) {
    throw DimensionError(std::string("train_victim: ") + which + " set has " + std::to_string(d.dim()) +
                         " features, config expects " + std::to_string(config.input_dim));
  }
  if (d.class_count > config.num_classes) {
    throw DimensionError(std::string("train_victim: ") + which + " set has more classes than the victim");
  }
}

}  // namespace

Checkpoint train_victim(const VictimConfig& config, const dataio::Dataset& train, const dataio::Dataset& test,
                        const EpochCallback& on_epoch) {
  config.validate();
  check_dataset(config, train, "training");
  check_dataset(config, test, "test");

  const Rng root(config.seed);
  Rng init = root.derive(Purpose::init);
  Checkpoint ckpt{VictimModel(config, init), {}};
  ckpt.training.seed = config.seed;
  Adam<float> adam(AdamConfig{.learning_rate = config.learning_rate});

  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  const std::size_t n = train.size();
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    Rng shuffle = root.derive(Purpose::shuffle, epoch);
    const auto order = rng_permutation(shuffle, n);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size, ++batch_index) {
      const std::span<const std::size_t> idx(order.data() + start, std::min(config.batch_size, n - start));
      const Tensor2D x = gather_rows(train.images, idx);
      std::vector<std::size_t> labels(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) labels[i] = train.labels[idx[i]];
      const Tensor2D y = one_hot<float>(labels, config.num_classes);

      double loss = 0.0;
      if (config.kind == VictimKind::ann) {
        auto& net = ckpt.model.mutable_ann();
        net.zero_grad();
        const auto step = softmax_cross_entropy(net.forward(x), y);
        loss = step.loss;
        if (std::isfinite(loss)) {
          net.backward(step.grad);
          adam.step(net.parameters());
        }
      } else {
        auto& net = ckpt.model.mutable_snn();
        const auto encoded = spike::rate_encode_batch<float>(
            x, config.steps, [&](std::size_t r) { return root.derive(Purpose::encode, idx[r], epoch); });
        const auto trace = net.forward(encoded, config.steps);
        const auto step = spike::snn_loss(trace.output_membrane, config.steps, y);
        loss = step.loss;
        if (std::isfinite(loss)) {
          net.zero_grad();
          net.backward(trace, step.grad_output_membrane);
          adam.step(net.parameters());
        }
      }
      if (!std::isfinite(loss)) {
        throw TrainingError("training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                std::to_string(batch_index),
                            epoch, batch_index);
      }
      loss_sum += loss * static_cast<double>(idx.size());
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(n);
    record.test_accuracy = evaluate_accuracy(ckpt.model, test, config.seed);
    record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    ckpt.training.history.push_back(record);
    ckpt.training.epochs_run = epoch + 1;
    ckpt.training.final_test_accuracy = record.test_accuracy;
    if (on_epoch) on_epoch(record);

    if (record.train_loss < best_loss * (1.0 - config.min_delta)) {
      best_loss = record.train_loss;
      stale = 0;
    } else if (config.patience > 0 && ++stale >= config.patience) {
      ckpt.training.early_stopped = true;
      break;
    }
  }
  ckpt.model.reset_counters();
  return ckpt;
}

double evaluate_accuracy(const VictimModel& model, const dataio::Dataset& dataset, std::uint64_t seed) {
  if (dataset.size() == 0) return 0.0;
  const Rng root(seed);
  constexpr std::size_t kChunk = 512;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < dataset.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, dataset.size() - start);
    const auto probs = model.predict(dataset.images.slice_rows(start, n),
                                     [&](std::size_t r) { return root.derive(Purpose::evaluation, start + r); });
    const auto predicted = argmax_rows(probs);
    for (std::size_t i = 0; i < n; ++i) correct += predicted[i] == dataset.labels[start + i] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

namespace {

json training_to_json(const TrainingMetadata& t) {
  json history = json::array();
  for (const auto& r : t.history) {
    history.push_back(
        {{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"test_accuracy", r.test_accuracy}, {"seconds", r.seconds}});
  }
  return {{"epochs_run", t.epochs_run},
          {"final_test_accuracy", t.final_test_accuracy},
          {"seed", t.seed},
          {"early_stopped", t.early_stopped},
          {"history", history}};
}

TrainingMetadata training_from_json(const json& j) {
  TrainingMetadata t;
  t.epochs_run = j.at("epochs_run").get<std::size_t>();
  t.final_test_accuracy = j.at("final_test_accuracy").get<double>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.early_stopped = j.at("early_stopped").get<bool>();
  for (const auto& r : j.at("history")) {
    t.history.push_back({r.at("epoch").get<std::size_t>(), r.at("train_loss").get<double>(),
                         r.at("test_accuracy").get<double>(), r.at("seconds").get<double>()});
  }
  return t;
}

constexpr const char* kArchiveKind = "victim";

}  // namespace

ModelArchive to_archive(const Checkpoint& ckpt) {
  ModelArchive a;
  a.kind = kArchiveKind;
  a.metadata = {{"config", to_json(ckpt.config())}, {"training", training_to_json(ckpt.training)}};
  if (ckpt.model.kind() == VictimKind::ann) {
    const auto& layers = ckpt.model.ann().layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
      a.add("layer" + std::to_string(i) + ".weight", layers[i].weights());
      a.add("layer" + std::to_string(i) + ".bias", layers[i].bias());
    }
  } else {
    const auto& snn = ckpt.model.snn();
    a.add("input.weight", snn.input_layer().weights());
    a.add("input.bias", snn.input_layer().bias());
    a.add("output.weight", snn.output_layer().weights());
    a.add("output.bias", snn.output_layer().bias());
  }
  return a;
}

Checkpoint from_archive(const ModelArchive& a) {
  if (a.kind != kArchiveKind) {
    throw DataError(DataError::Kind::corrupt, "checkpoint: archive kind '" + a.kind + "' is not a victim");
  }
  VictimConfig config;
  TrainingMetadata training;
  try {
    config = victim_config_from_json(a.metadata.at("config"));
    training = training_from_json(a.metadata.at("training"));
  } catch (const json::exception& e) {
    throw DataError(DataError::Kind::corrupt, std::string("checkpoint: bad metadata: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(DataError::Kind::corrupt, std::string("checkpoint: bad config: ") + e.what());
  }
  try {
    if (config.kind == VictimKind::ann) {
      std::vector<DenseLayer<float>> layers;
      layers.emplace_back(a.tensor("layer0.weight"), a.tensor("layer0.bias"));
      layers.emplace_back(a.tensor("layer1.weight"), a.tensor("layer1.bias"));
      Mlp<float> mlp(std::move(layers), {Activation::relu, Activation::identity});
      return {VictimModel(config, std::move(mlp)), training};
    }
    SnnNetwork<float> snn(DenseLayer<float>(a.tensor("input.weight"), a.tensor("input.bias")),
                          DenseLayer<float>(a.tensor("output.weight"), a.tensor("output.bias")), config.lif);
    return {VictimModel(config, std::move(snn)), training};
  } catch (const DimensionError& e) {
    throw DataError(DataError::Kind::corrupt, std::string("checkpoint: tensor shapes disagree: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  save_archive(to_archive(checkpoint), path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return from_archive(load_archive(path)); }

}  // namespace sib::victim
