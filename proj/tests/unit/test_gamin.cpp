#include <filesystem>

#include "doctest.h"
#include "sib/gamin/gamin.hpp"
#include "sib/numcore/loss.hpp"
#include "sib/oracle/oracle.hpp"
#include "support/check.hpp"

using namespace sib;
using namespace sib::gamin;
using sib::testing::central_differences;
using sib::testing::close_rel;

namespace {

std::shared_ptr<const victim::VictimModel> tiny_victim(victim::VictimKind kind) {
  victim::VictimConfig cfg;
  cfg.kind = kind;
  cfg.input_dim = 6;
  cfg.hidden_dim = 12;
  cfg.num_classes = 3;
  cfg.steps = 4;
  Rng rng(2);
  auto model = std::make_shared<victim::VictimModel>(cfg, rng);
  model->reset_counters();
  return model;
}

AttackConfig tiny_attack(std::size_t batches) {
  AttackConfig c;
  c.target_label = 1;
  c.batch_size = 16;
  c.total_batches = batches;
  c.noise_dim = 5;
  c.generator_hidden = {8};
  c.surrogate_hidden = {8};
  c.seed = 4;
  return c;
}

Matrix<double> random_probs(Rng& rng, std::size_t rows, std::size_t k) {
  return softmax_rows(rng_standard_normal<double>(rng, rows, k));
}

// Every parameter gradient of `net` against central differences of `loss`.
template <class Net>
void check_parameter_gradients(Net& net, const std::function<double()>& loss, double rtol) {
  double worst = 0;
  for (auto& p : net.parameters()) {
    std::vector<double> values(p.value.begin(), p.value.end());
    const std::vector<double> analytic(p.grad.begin(), p.grad.end());
    const auto numeric = central_differences(values, [&] {
      std::copy(values.begin(), values.end(), p.value.begin());
      return loss();
    }, 1e-6);
    std::copy(values.begin(), values.end(), p.value.begin());
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      CHECK(close_rel(analytic[i], numeric[i], rtol, 1e-8));
      worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / (std::abs(numeric[i]) + 1e-8));
    }
  }
  MESSAGE("worst relative gradient error " << worst);
}

}  // namespace

TEST_SUITE("update_k") {
  TEST_CASE("direct substitution") {
    const auto next = update_k({0.0, 0.001, 0.5}, 2.0, 0.5);
    CHECK(next.k == doctest::Approx(0.0005).epsilon(1e-12));
    CHECK(next.lambda_k == 0.001);
    CHECK(next.gamma_k == 0.5);
  }

  TEST_CASE("equilibrium is a fixed point") {
    CHECK(update_k({0.3, 0.001, 0.5}, 1.2, 0.6).k == 0.3);
  }

  TEST_CASE("clamped to the unit interval") {
    CHECK(update_k({0.0001, 0.001, 0.5}, 0.0, 5.0).k == 0.0);
    CHECK(update_k({0.9999, 0.1, 0.5}, 10.0, 0.0).k == 1.0);
  }
}

TEST_SUITE("compute_m_global") {
  TEST_CASE("both readings by direct substitution") {
    const EquilibriumState eq{0.2, 0.001, 0.5};
    CHECK(compute_m_global(1.0, 0.6, eq, MGlobalMode::as_written) == doctest::Approx(0.9));
    CHECK(compute_m_global(1.0, 0.6, eq, MGlobalMode::began) == doctest::Approx(1.1));
  }

  TEST_CASE("balanced losses reduce both to L_H(X_S)") {
    const EquilibriumState eq;
    CHECK(compute_m_global(0.8, 0.4, eq, MGlobalMode::as_written) == 0.8);
    CHECK(compute_m_global(0.8, 0.4, eq, MGlobalMode::began) == 0.8);
  }

  TEST_CASE("perfect surrogate gives zero") {
    CHECK(compute_m_global(0.0, 0.0, EquilibriumState{}, MGlobalMode::began) == 0.0);
    CHECK(compute_m_global(1e-12, 1e-12, EquilibriumState{}, MGlobalMode::as_written) < 1e-11);
  }

  TEST_CASE("mode names") {
    CHECK(parse_m_global_mode("began") == MGlobalMode::began);
    CHECK(parse_m_global_mode(to_string(MGlobalMode::as_written)) == MGlobalMode::as_written);
    CHECK_THROWS_AS(parse_m_global_mode("wgan"), ConfigError);
  }
}

TEST_SUITE("surrogate_loss") {
  TEST_CASE("k = 0 keeps only the random-input term") {
    Rng rng(1);
    auto s = make_surrogate<double>(4, {5}, 3, rng);
    const auto xs = rng_uniform01<double>(rng, 6, 4), xg = rng_uniform01<double>(rng, 6, 4);
    const auto ys = random_probs(rng, 6, 3), yg = random_probs(rng, 6, 3);
    const auto r = surrogate_loss(s, xs, ys, xg, yg, 0.0);
    CHECK(r.loss == r.loss_xs);
    CHECK(r.loss_xs == doctest::Approx(softmax_cross_entropy(s.infer(xs), ys).loss).epsilon(1e-12));
  }

  TEST_CASE("L_S is the definitional combination") {
    Rng rng(2);
    auto s = make_surrogate<float>(4, {5}, 3, rng);
    const auto xs = rng_uniform01<float>(rng, 6, 4), xg = rng_uniform01<float>(rng, 6, 4);
    const auto ys = softmax_rows(rng_standard_normal<float>(rng, 6, 3));
    const auto yg = softmax_rows(rng_standard_normal<float>(rng, 6, 3));
    const auto r = surrogate_loss(s, xs, ys, xg, yg, 0.37);
    CHECK(std::abs(r.loss - (r.loss_xs - 0.37 * r.loss_xg)) < 1e-6);
  }

  TEST_CASE("gradients match finite differences on a four-dimensional toy") {
    Rng rng(3);
    auto s = make_surrogate<double>(4, {6, 5}, 3, rng);
    for (auto& l : s.layers()) l.bias() = rng_standard_normal<double>(rng, 1, l.out_dim());
    const auto xs = rng_uniform01<double>(rng, 5, 4), xg = rng_uniform01<double>(rng, 5, 4);
    const auto ys = random_probs(rng, 5, 3), yg = random_probs(rng, 5, 3);
    const double k = 0.6;
    surrogate_loss(s, xs, ys, xg, yg, k);
    check_parameter_gradients(s, [&] {
      return softmax_cross_entropy(s.infer(xs), ys).loss - k * softmax_cross_entropy(s.infer(xg), yg).loss;
    }, 1e-4);
  }
}

TEST_SUITE("generator_loss") {
  TEST_CASE("gradients match finite differences") {
    Rng rng(4);
    auto g = make_generator<double>(3, {7}, 4, rng);
    for (auto& l : g.layers()) l.bias() = rng_standard_normal<double>(rng, 1, l.out_dim());
    const auto s = make_surrogate<double>(4, {6}, 3, rng);
    const auto z = rng_standard_normal<double>(rng, 5, 3);
    generator_loss(g, s, z, 2);
    check_parameter_gradients(g, [&] {
      return softmax_cross_entropy(s.infer(g.infer(z)), one_hot_repeated<double>(2, 5, 3)).loss;
    }, 1e-4);
  }

  TEST_CASE("an already-confident surrogate gives near-zero loss and gradients") {
    Rng rng(5);
    auto g = make_generator<float>(4, {8}, 6, rng);
    std::vector<DenseLayer<float>> layers;
    Tensor2D bias(1, 3);
    bias(0, 1) = 40.0f;
    layers.emplace_back(Tensor2D(3, 6), bias);
    const Mlp<float> s(std::move(layers), {Activation::identity});
    Adam<float> opt(AdamConfig{});
    const double loss = generator_train_step(g, opt, s, 1, 32, rng);
    CHECK(loss < 1e-12);
    for (auto& p : g.parameters())
      for (float v : p.grad) CHECK(std::abs(v) < 1e-12);
  }

  TEST_CASE("the surrogate is untouched by a generator step") {
    Rng rng(6);
    auto g = make_generator<float>(4, {8}, 6, rng);
    const auto s = make_surrogate<float>(6, {8}, 3, rng);
    const auto before = s;
    Adam<float> opt(AdamConfig{});
    for (int i = 0; i < 5; ++i) generator_train_step(g, opt, s, 0, 16, rng);
    for (std::size_t i = 0; i < s.layers().size(); ++i) {
      CHECK(s.layers()[i].weights() == before.layers()[i].weights());
      CHECK(s.layers()[i].bias() == before.layers()[i].bias());
    }
  }

  TEST_CASE("loss falls across 500 steps against a fixed two-class surrogate") {
    Rng rng(7);
    auto g = make_generator<float>(4, {16}, 6, rng);
    const auto s = make_surrogate<float>(6, {8}, 2, rng);
    Adam<float> opt(AdamConfig{.learning_rate = 5e-4, .beta1 = 0.5});
    std::vector<double> window_means;
    double sum = 0;
    for (int i = 1; i <= 500; ++i) {
      sum += generator_train_step(g, opt, s, 1, 32, rng);
      if (i % 50 == 0) {
        window_means.push_back(sum / 50);
        sum = 0;
      }
    }
    for (std::size_t i = 1; i < window_means.size(); ++i) CHECK(window_means[i] < window_means[i - 1]);
  }

  TEST_CASE("white-box ablation: the true linear target as surrogate drives L_G below 0.1") {
    // Separable target: class 1 iff the mean of the first half exceeds the second half.
    Rng rng(8);
    std::vector<DenseLayer<float>> layers;
    layers.emplace_back(Tensor2D{{-3, -3, -3, 3, 3, 3}, {3, 3, 3, -3, -3, -3}}, Tensor2D(1, 2));
    const Mlp<float> target(std::move(layers), {Activation::identity});
    auto g = make_generator<float>(4, {16}, 6, rng);
    Adam<float> opt(AdamConfig{.learning_rate = 5e-4, .beta1 = 0.5});
    double last = 1e9;
    for (int i = 0; i < 1000 && last >= 0.1; ++i) last = generator_train_step(g, opt, target, 1, 32, rng);
    CHECK(last < 0.1);
  }
}

TEST_SUITE("surrogate_train_step") {
  TEST_CASE("charges two batches and refuses atomically when short") {
    oracle::OracleHandle oracle(tiny_victim(victim::VictimKind::ann), {.budget = 48});
    Rng rng(1);
    auto s = make_surrogate<float>(6, {8}, 3, rng);
    const auto g = make_generator<float>(5, {8}, 6, rng);
    Adam<float> opt(AdamConfig{});
    const auto r = surrogate_train_step(s, opt, oracle, g, EquilibriumState{}, 16, 5, rng);
    CHECK(std::isfinite(r.loss));
    CHECK(oracle.ledger().tally(oracle::QueryPhase::surrogate) == 16);
    CHECK(oracle.ledger().tally(oracle::QueryPhase::generator) == 16);
    const auto before = s.layers()[0].weights();
    CHECK_THROWS_AS(surrogate_train_step(s, opt, oracle, g, EquilibriumState{}, 16, 5, rng), BudgetError);
    CHECK(oracle.ledger().queries_used() == 32);
    CHECK(s.layers()[0].weights() == before);
  }
}

TEST_SUITE("run_attack") {
  TEST_CASE("query accounting, retention rule and k range") {
    auto model = tiny_victim(victim::VictimKind::ann);
    oracle::OracleHandle oracle(model);
    Rng rng(11);
    const auto result = run_attack(tiny_attack(40), oracle, rng);
    CHECK(result.batches_run == 40);
    CHECK(result.queries_used == 2 * 16 * 40);
    CHECK(oracle.ledger().queries_used() == result.queries_used);
    CHECK(model->forward_rows() == oracle.ledger().queries_used());
    CHECK(model->weight_reads() == 0);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& row : result.history) {
      best = std::min(best, row.m_global);
      CHECK((row.k >= 0.0 && row.k <= 1.0));
    }
    CHECK(result.best.best_m_global == best);
    CHECK(result.history[result.best.batch].m_global == best);
    CHECK(!result.budget_exhausted);
  }

  TEST_CASE("identical seeds give identical histories and reconstructions") {
    for (auto kind : {victim::VictimKind::ann, victim::VictimKind::snn}) {
      auto model = tiny_victim(kind);
      oracle::OracleHandle o1(model), o2(model);
      Rng r1(5), r2(5);
      const auto a = run_attack(tiny_attack(15), o1, r1);
      const auto b = run_attack(tiny_attack(15), o2, r2);
      CHECK(history_csv(a.history) == history_csv(b.history));
      Rng i1(9), i2(9);
      CHECK(invert(a.best, 4, i1) == invert(b.best, 4, i2));
    }
  }

  TEST_CASE("budget exhaustion mid-run keeps the best snapshot and flags it") {
    oracle::OracleHandle oracle(tiny_victim(victim::VictimKind::ann), {.budget = 16 * 2 * 7 + 10});
    Rng rng(3);
    const auto result = run_attack(tiny_attack(100), oracle, rng);
    CHECK(result.budget_exhausted);
    CHECK(result.batches_run == 7);
    CHECK(result.history.size() == 7);
    CHECK(std::isfinite(result.best.best_m_global));
    CHECK(oracle.remaining() == 10);
  }

  TEST_CASE("exempting X_S batches halves the charged queries") {
    oracle::OracleHandle oracle(tiny_victim(victim::VictimKind::ann), {.exempt = {oracle::QueryPhase::surrogate}});
    Rng rng(3);
    const auto result = run_attack(tiny_attack(10), oracle, rng);
    CHECK(result.queries_used == 16 * 10);
    CHECK(oracle.ledger().totals().rows_served == 2 * 16 * 10);
  }

  TEST_CASE("labels outside the target are refused") {
    oracle::OracleHandle oracle(tiny_victim(victim::VictimKind::ann));
    auto cfg = tiny_attack(1);
    cfg.target_label = 3;
    Rng rng(1);
    CHECK_THROWS_AS(run_attack(cfg, oracle, rng), ConfigError);
  }
}

TEST_SUITE("invert and snapshots") {
  TEST_CASE("reconstructions stay in the unit box for extreme noise") {
    Rng rng(1);
    AttackSnapshot snap{make_generator<float>(5, {8}, 6, rng), make_surrogate<float>(6, {8}, 3, rng), 1.0, 0, 0};
    for (auto& w : snap.generator.layers()[0].weights().values()) w *= 1000.0f;
    const auto x = invert(snap, 200, rng);
    for (float v : x.values()) CHECK((v >= 0.0f && v <= 1.0f));
  }

  TEST_CASE("snapshot save, load, save is byte identical") {
    oracle::OracleHandle oracle(tiny_victim(victim::VictimKind::ann));
    Rng rng(2);
    const auto result = run_attack(tiny_attack(5), oracle, rng);
    const auto dir = std::filesystem::temp_directory_path();
    const auto p1 = dir / "sib_snap_a.bin", p2 = dir / "sib_snap_b.bin";
    save_snapshot(result.best, p1, {{"label", 1}});
    const auto loaded = load_snapshot(p1);
    save_snapshot(loaded, p2, {{"label", 1}});
    CHECK(read_file_bytes(p1) == read_file_bytes(p2));
    CHECK(loaded.best_m_global == result.best.best_m_global);
    Rng a(3), b(3);
    CHECK(invert(loaded, 3, a) == invert(result.best, 3, b));
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
  }

  TEST_CASE("history csv layout") {
    const auto csv = history_csv({{0, 1.5, 0.25, 0.0005, 2.0}});
    CHECK(csv == "batch,L_S,L_G,k_t,M_global\n0,1.5,0.25,0.0005,2\n");
  }

  TEST_CASE("config json round trip and validation") {
    auto cfg = tiny_attack(20);
    cfg.m_global_mode = MGlobalMode::as_written;
    CHECK(to_json(attack_config_from_json(to_json(cfg))) == to_json(cfg));
    CHECK_THROWS_AS(attack_config_from_json({{"batch_size", 0}}), ConfigError);
    CHECK(cfg.queries_per_batch() == 32);
    CHECK(cfg.queries_per_batch(true) == 16);
  }
}
