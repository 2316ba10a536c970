#include <filesystem>
#include <fstream>
#include <thread>

#include "doctest.h"
#include "sib/oracle/oracle.hpp"

using namespace sib;
using namespace sib::oracle;

namespace {

std::shared_ptr<const victim::VictimModel> tiny_victim(victim::VictimKind kind, std::uint64_t seed = 1) {
  victim::VictimConfig cfg;
  cfg.kind = kind;
  cfg.input_dim = 6;
  cfg.hidden_dim = 12;
  cfg.num_classes = 3;
  cfg.steps = 5;
  Rng rng(seed);
  auto model = std::make_shared<victim::VictimModel>(cfg, rng);
  // Bigger input weights so the SNN actually spikes.
  if (kind == victim::VictimKind::snn) {
    for (auto& w : model->mutable_snn().input_layer().weights().values()) w *= 4.0f;
  }
  model->reset_counters();
  return model;
}

Tensor2D uniform_batch(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  return rng_uniform01<float>(rng, rows, 6);
}

}  // namespace

TEST_SUITE("query_ledger") {
  TEST_CASE("fresh ledger, one batch, full budget") {
    QueryLedger ledger;
    CHECK(ledger.remaining() == 1'280'000);
    ledger.charge(QueryPhase::surrogate, 64);
    CHECK(ledger.remaining() == 1'279'936);
    for (int i = 1; i < 20'000; ++i) ledger.charge(i % 2 ? QueryPhase::generator : QueryPhase::surrogate, 64);
    CHECK(ledger.remaining() == 0);
    CHECK(ledger.queries_used() == ledger.tally(QueryPhase::surrogate) + ledger.tally(QueryPhase::generator) +
                                       ledger.tally(QueryPhase::evaluation));
    CHECK_THROWS_AS(ledger.charge(QueryPhase::surrogate, 1), BudgetError);
  }

  TEST_CASE("refused charges leave the ledger untouched") {
    QueryLedger ledger(100);
    ledger.charge(QueryPhase::surrogate, 64);
    const auto before = ledger.totals();
    try {
      ledger.charge(QueryPhase::generator, 64);
      FAIL("expected budget error");
    } catch (const BudgetError& e) {
      CHECK(e.queries_used() == 64);
      CHECK(e.budget() == 100);
    }
    const auto after = ledger.totals();
    CHECK(after.queries_used == before.queries_used);
    CHECK(after.batches == before.batches);
    CHECK(after.rows_served == before.rows_served);
  }

  TEST_CASE("exempt phases are served and numbered but not charged") {
    QueryLedger ledger(128, {QueryPhase::surrogate});
    CHECK(ledger.charge(QueryPhase::surrogate, 64) == 0);
    CHECK(ledger.charge(QueryPhase::generator, 64) == 64);
    CHECK(ledger.charge(QueryPhase::surrogate, 64) == 128);
    CHECK(ledger.queries_used() == 64);
    CHECK(ledger.totals().rows_served == 192);
    CHECK(ledger.tally(QueryPhase::surrogate) == 0);
  }

  TEST_CASE("concurrent charges serialize exactly") {
    QueryLedger ledger(10'000);
    std::vector<std::thread> threads;
    std::atomic<int> refused{0};
    for (int t = 0; t < 4; ++t) {
      threads.emplace_back([&] {
        for (int i = 0; i < 40; ++i) {
          try {
            ledger.charge(QueryPhase::surrogate, 64);
          } catch (const BudgetError&) {
            ++refused;
          }
        }
      });
    }
    for (auto& th : threads) th.join();
    CHECK(ledger.queries_used() == 156 * 64);
    CHECK(refused == 4);
  }
}

TEST_SUITE("oracle_handle") {
  TEST_CASE("queries return probability rows and charge the ledger") {
    for (auto kind : {victim::VictimKind::ann, victim::VictimKind::snn}) {
      OracleHandle oracle(tiny_victim(kind));
      const auto p = oracle.query(uniform_batch(64, 2), QueryPhase::surrogate);
      CHECK(oracle.ledger().queries_used() == 64);
      CHECK(p.rows() == 64);
      CHECK(p.cols() == 3);
      for (std::size_t r = 0; r < p.rows(); ++r) {
        double s = 0;
        for (float v : p.row(r)) {
          CHECK(v >= 0.0f);
          s += v;
        }
        CHECK(std::abs(s - 1.0) < 1e-6);
      }
    }
  }

  TEST_CASE("budget refusal is atomic") {
    OracleHandle oracle(tiny_victim(victim::VictimKind::ann), {.budget = 100});
    oracle.query(uniform_batch(64, 1), QueryPhase::surrogate);
    CHECK_THROWS_AS(oracle.query(uniform_batch(64, 2), QueryPhase::generator), BudgetError);
    CHECK(oracle.ledger().queries_used() == 64);
    CHECK(oracle.remaining() == 36);
  }

  TEST_CASE("bad inputs are rejected before charging") {
    OracleHandle oracle(tiny_victim(victim::VictimKind::ann));
    auto batch = uniform_batch(4, 1);
    batch(2, 3) = 1.01f;
    CHECK_THROWS_AS(oracle.query(batch, QueryPhase::surrogate), ValidationError);
    CHECK_THROWS_AS(oracle.query(Tensor2D(2, 5), QueryPhase::surrogate), DimensionError);
    CHECK(oracle.ledger().queries_used() == 0);
  }

  TEST_CASE("ANN answers are repeatable; SNN answers follow the query index") {
    OracleHandle ann(tiny_victim(victim::VictimKind::ann));
    const auto x = uniform_batch(32, 3);
    CHECK(ann.query(x, QueryPhase::surrogate) == ann.query(x, QueryPhase::surrogate));

    auto model = tiny_victim(victim::VictimKind::snn);
    OracleHandle a(model, {.encode_seed = 9});
    OracleHandle b(model, {.encode_seed = 9});
    const auto a1 = a.query(x, QueryPhase::surrogate);
    const auto a2 = a.query(x, QueryPhase::surrogate);
    CHECK(a1 == b.query(x, QueryPhase::surrogate));
    CHECK(a2 == b.query(x, QueryPhase::surrogate));
    CHECK(a1 != a2);
  }

  TEST_CASE("forward passes equal charged queries and weights are never read") {
    auto model = tiny_victim(victim::VictimKind::snn);
    OracleHandle oracle(model);
    for (int i = 0; i < 5; ++i) {
      oracle.query(uniform_batch(64, i), QueryPhase::surrogate);
      oracle.query(uniform_batch(64, 10 + i), QueryPhase::generator);
    }
    CHECK(model->forward_rows() == oracle.ledger().queries_used());
    CHECK(model->weight_reads() == 0);
  }

  TEST_CASE("evaluation clone is unbudgeted and separate") {
    OracleHandle oracle(tiny_victim(victim::VictimKind::ann), {.budget = 64});
    auto eval = oracle.evaluation_clone();
    for (int i = 0; i < 10; ++i) eval->query(uniform_batch(64, i), QueryPhase::evaluation);
    CHECK(oracle.ledger().queries_used() == 0);
    CHECK(oracle.remaining() == 64);
    CHECK(eval->ledger().queries_used() == 640);
    CHECK(eval->input_dim() == 6);
    CHECK(eval->num_classes() == 3);
  }

  TEST_CASE("query log has one line per batch") {
    const auto path = std::filesystem::temp_directory_path() / "sib_query_log_test.csv";
    {
      OracleHandle oracle(tiny_victim(victim::VictimKind::ann), {.query_log = path});
      oracle.query(uniform_batch(64, 1), QueryPhase::surrogate);
      oracle.query(uniform_batch(10, 2), QueryPhase::generator);
    }
    std::ifstream in(path);
    std::string header, l1, l2, extra;
    std::getline(in, header);
    std::getline(in, l1);
    std::getline(in, l2);
    CHECK(header == "batch,first_row,rows,phase");
    CHECK(l1 == "0,0,64,surrogate");
    CHECK(l2 == "1,64,10,generator");
    CHECK(!std::getline(in, extra));
    std::filesystem::remove(path);
  }
}
