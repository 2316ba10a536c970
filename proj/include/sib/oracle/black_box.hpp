#pragma once

// The only view of a target model that attack and measurement code gets:
// probability vectors in exchange for budgeted queries.

#include <cstdint>
#include <memory>
#include <mutex>
#include <set>
#include <string>

#include "sib/numcore/tensor.hpp"

namespace sib::oracle {

enum class QueryPhase { surrogate, generator, evaluation };

std::string to_string(QueryPhase phase);

struct LedgerTotals {
  std::uint64_t budget = 0;
  std::uint64_t queries_used = 0;   // charged rows
  std::uint64_t rows_served = 0;    // charged plus exempt rows
  std::uint64_t batches = 0;
  std::uint64_t surrogate = 0;      // charged per phase
  std::uint64_t generator = 0;
  std::uint64_t evaluation = 0;
};

// Monotone budget accountant. Rows of exempt phases are served and numbered
// but not charged.
class QueryLedger {
 public:
  static constexpr std::uint64_t kDefaultBudget = 1'280'000;
  static constexpr std::uint64_t kUnlimited = UINT64_MAX;

  explicit QueryLedger(std::uint64_t budget = kDefaultBudget, std::set<QueryPhase> exempt = {});

  // Reserves rows and returns the global index of the first one. Throws
  // BudgetError and changes nothing when the charge would exceed the budget.
  std::uint64_t charge(QueryPhase phase, std::uint64_t rows);

  std::uint64_t budget() const noexcept { return budget_; }
  std::uint64_t queries_used() const;
  std::uint64_t remaining() const;
  std::uint64_t tally(QueryPhase phase) const;
  bool is_exempt(QueryPhase phase) const { return exempt_.count(phase) != 0; }
  LedgerTotals totals() const;

 private:
  mutable std::mutex mutex_;
  std::uint64_t budget_;
  std::set<QueryPhase> exempt_;
  std::uint64_t used_ = 0;
  std::uint64_t served_ = 0;
  std::uint64_t batches_ = 0;
  std::uint64_t tallies_[3] = {0, 0, 0};
};

class BlackBox {
 public:
  virtual ~BlackBox() = default;

  // batch × d in [0, 1] → batch × k class probabilities.
  virtual Tensor2D query(const Tensor2D& batch, QueryPhase phase) = 0;

  virtual std::size_t input_dim() const = 0;
  virtual std::size_t num_classes() const = 0;
  virtual const QueryLedger& ledger() const = 0;
  std::uint64_t remaining() const { return ledger().remaining(); }

  // Same target, unbudgeted, independent encoding stream. For measurements
  // that must not spend the attack budget.
  virtual std::unique_ptr<BlackBox> evaluation_clone() const = 0;
};

}  // namespace sib::oracle
