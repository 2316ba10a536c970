#include <filesystem>

#include "doctest.h"
#include "sib/victim/victim.hpp"

using namespace sib;
using namespace sib::victim;
namespace fs = std::filesystem;

namespace {

// Two well separated Gaussian blobs in 8 dimensions, clipped to [0, 1].
dataio::Dataset blobs(std::size_t per_class, std::uint64_t seed) {
  Rng rng(seed);
  dataio::Dataset d;
  d.class_count = 2;
  d.images = Tensor2D(2 * per_class, 8);
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const std::size_t label = i % 2;
    d.labels.push_back(label);
    for (std::size_t j = 0; j < 8; ++j) {
      const double centre = (j < 4) == (label == 0) ? 0.8 : 0.2;
      d.images(i, j) = static_cast<float>(std::clamp(centre + 0.05 * rng.standard_normal(), 0.0, 1.0));
    }
  }
  return d;
}

VictimConfig toy_config(VictimKind kind) {
  VictimConfig c;
  c.kind = kind;
  c.input_dim = 8;
  c.hidden_dim = 16;
  c.num_classes = 2;
  c.epochs = 5;
  c.batch_size = 16;
  c.seed = 3;
  c.steps = 8;
  c.learning_rate = 1e-2;
  return c;
}

struct TempFile {
  fs::path path = fs::temp_directory_path() / ("sib_victim_" + std::to_string(::getpid()) + "_" +
                                               std::to_string(reinterpret_cast<std::uintptr_t>(this)));
  ~TempFile() { fs::remove(path); }
};

}  // namespace

TEST_SUITE("train_victim") {
  TEST_CASE("separable blobs reach full training accuracy with the ANN") {
    const auto train = blobs(100, 1);
    const auto ckpt = train_victim(toy_config(VictimKind::ann), train, blobs(20, 2));
    CHECK(evaluate_accuracy(ckpt, train) == 1.0);
    CHECK(ckpt.training.epochs_run >= 1);
    CHECK(ckpt.training.history.size() == ckpt.training.epochs_run);
  }

  TEST_CASE("the SNN learns the blobs as well") {
    auto cfg = toy_config(VictimKind::snn);
    cfg.epochs = 10;
    const auto train = blobs(100, 1);
    const auto ckpt = train_victim(cfg, train, blobs(20, 2));
    CHECK(evaluate_accuracy(ckpt, train) >= 0.95);
    const auto& h = ckpt.training.history;
    CHECK(h.back().train_loss < h.front().train_loss);
  }

  TEST_CASE("identical seeds give identical checkpoints") {
    for (auto kind : {VictimKind::ann, VictimKind::snn}) {
      auto cfg = toy_config(kind);
      cfg.epochs = 2;
      const auto a = train_victim(cfg, blobs(40, 5), blobs(10, 6));
      const auto b = train_victim(cfg, blobs(40, 5), blobs(10, 6));
      auto strip = [](ModelArchive ar) {
        for (auto& r : ar.metadata["training"]["history"]) r["seconds"] = 0.0;
        return encode_archive(ar);
      };
      CHECK(strip(to_archive(a)) == strip(to_archive(b)));
    }
  }

  TEST_CASE("divergence reports epoch and batch") {
    auto cfg = toy_config(VictimKind::ann);
    cfg.learning_rate = 1e36;
    try {
      train_victim(cfg, blobs(100, 1), blobs(10, 2));
      FAIL("expected divergence");
    } catch (const TrainingError& e) {
      CHECK(e.epoch() < cfg.epochs);
      CHECK(std::string(e.what()).find("batch") != std::string::npos);
    }
  }

  TEST_CASE("mismatched data and bad configs are rejected") {
    auto cfg = toy_config(VictimKind::ann);
    cfg.input_dim = 9;
    CHECK_THROWS_AS(train_victim(cfg, blobs(10, 1), blobs(10, 2)), DimensionError);
    cfg = toy_config(VictimKind::snn);
    cfg.steps = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = toy_config(VictimKind::ann);
    cfg.hidden_dim = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
}

TEST_SUITE("victim structure") {
  TEST_CASE("ANN and SNN share layer widths") {
    Rng a(1), b(1);
    VictimConfig ann_cfg;
    VictimConfig snn_cfg;
    snn_cfg.kind = VictimKind::snn;
    const VictimModel ann(ann_cfg, a);
    const VictimModel snn(snn_cfg, b);
    CHECK(ann.layer_widths() == std::vector<std::size_t>{784, 3000, 10});
    CHECK(ann.layer_widths() == snn.layer_widths());
  }

  TEST_CASE("networks that disagree with the config are refused") {
    Rng rng(1);
    auto cfg = toy_config(VictimKind::ann);
    Mlp<float> wrong({8, 15, 2}, {Activation::relu, Activation::identity}, rng);
    CHECK_THROWS_AS(VictimModel(cfg, wrong), DimensionError);
    Mlp<float> sig({8, 16, 2}, {Activation::sigmoid, Activation::identity}, rng);
    CHECK_THROWS_AS(VictimModel(cfg, sig), ConfigError);
  }

  TEST_CASE("predictions are probability rows and are counted") {
    Rng rng(4);
    const VictimModel snn(toy_config(VictimKind::snn), rng);
    const auto x = rng_uniform01<float>(rng, 300, 8);
    const auto p = snn.predict(x, [](std::size_t r) { return Rng(1).derive(Purpose::query_encode, r); });
    CHECK(p.rows() == 300);
    for (std::size_t r = 0; r < p.rows(); ++r) {
      double s = 0;
      for (float v : p.row(r)) s += v;
      CHECK(std::abs(s - 1.0) < 1e-6);
    }
    CHECK(snn.forward_rows() == 300);
    CHECK(snn.weight_reads() == 0);
    CHECK_THROWS_AS(snn.predict(Tensor2D(1, 7), {}), DimensionError);
  }
}

TEST_SUITE("evaluate_accuracy") {
  TEST_CASE("constant class-0 model on a balanced ten-class set scores 0.10") {
    VictimConfig cfg;
    cfg.input_dim = 4;
    cfg.hidden_dim = 3;
    std::vector<DenseLayer<float>> layers;
    layers.emplace_back(4, 3);
    Tensor2D bias(1, 10);
    bias(0, 0) = 5.0f;
    layers.emplace_back(Tensor2D(10, 3), bias);
    const VictimModel model(cfg, Mlp<float>(std::move(layers), {Activation::relu, Activation::identity}));
    dataio::Dataset d;
    d.class_count = 10;
    d.images = Tensor2D(100, 4, 0.5f);
    for (std::size_t i = 0; i < 100; ++i) d.labels.push_back(i % 10);
    CHECK(evaluate_accuracy(model, d) == doctest::Approx(0.10));
  }

  TEST_CASE("repeat evaluation with the same seed is identical") {
    auto cfg = toy_config(VictimKind::snn);
    cfg.epochs = 1;
    const auto ckpt = train_victim(cfg, blobs(30, 1), blobs(10, 2));
    const auto test = blobs(50, 9);
    CHECK(evaluate_accuracy(ckpt, test, 17) == evaluate_accuracy(ckpt, test, 17));
  }
}

TEST_SUITE("checkpoint") {
  TEST_CASE("save, load, save is byte identical and preserves accuracy") {
    for (auto kind : {VictimKind::ann, VictimKind::snn}) {
      auto cfg = toy_config(kind);
      cfg.epochs = 2;
      const auto ckpt = train_victim(cfg, blobs(40, 1), blobs(10, 2));
      TempFile first, second;
      save_checkpoint(ckpt, first.path);
      const auto loaded = load_checkpoint(first.path);
      save_checkpoint(loaded, second.path);
      CHECK(read_file_bytes(first.path) == read_file_bytes(second.path));
      const auto test = blobs(40, 3);
      CHECK(evaluate_accuracy(loaded, test, 5) == evaluate_accuracy(ckpt, test, 5));
      CHECK(loaded.config().kind == kind);
      CHECK(loaded.training.epochs_run == ckpt.training.epochs_run);
    }
  }

  TEST_CASE("truncated or foreign files raise load errors") {
    const auto ckpt = train_victim(toy_config(VictimKind::ann), blobs(20, 1), blobs(5, 2));
    TempFile f;
    save_checkpoint(ckpt, f.path);
    auto bytes = read_file_bytes(f.path);
    bytes.resize(bytes.size() - 100);
    write_file_atomic(f.path, bytes);
    CHECK_THROWS_AS(load_checkpoint(f.path), DataError);

    ModelArchive other;
    other.kind = "snapshot";
    save_archive(other, f.path);
    CHECK_THROWS_AS(load_checkpoint(f.path), DataError);
    CHECK_THROWS_AS(load_checkpoint(f.path.string() + ".missing"), DataError);
  }

  TEST_CASE("config json round trip") {
    auto cfg = toy_config(VictimKind::snn);
    cfg.decode = spike::DecodeMode::spike_count;
    cfg.lif.alpha = 0.5;
    const auto back = victim_config_from_json(to_json(cfg));
    CHECK(to_json(back) == to_json(cfg));
    CHECK_THROWS_AS(victim_config_from_json({{"kind", "cnn"}}), ConfigError);
    CHECK_THROWS_AS(victim_config_from_json({{"hidden_dim", "wide"}}), ConfigError);
  }
}
