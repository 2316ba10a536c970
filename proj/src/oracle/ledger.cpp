#include "sib/error.hpp"
#include "sib/oracle/black_box.hpp"

namespace sib::oracle {

std::string to_string(QueryPhase phase) {
  switch (phase) {
    case QueryPhase::surrogate: return "surrogate";
    case QueryPhase::generator: return "generator";
    case QueryPhase::evaluation: return "evaluation";
  }
  return "unknown";
}

QueryLedger::QueryLedger(std::uint64_t budget, std::set<QueryPhase> exempt)
    : budget_(budget), exempt_(std::move(exempt)) {}

std::uint64_t QueryLedger::charge(QueryPhase phase, std::uint64_t rows) {
  std::lock_guard lock(mutex_);
  const bool charged = exempt_.count(phase) == 0;
  if (charged && rows > budget_ - used_) {
    throw BudgetError("query budget exhausted: " + std::to_string(used_) + " of " + std::to_string(budget_) +
                          " used, batch of " + std::to_string(rows) + " refused",
                      used_, budget_);
  }
  const std::uint64_t first = served_;
  served_ += rows;
  ++batches_;
  if (charged) {
    used_ += rows;
    tallies_[static_cast<int>(phase)] += rows;
  }
  return first;
}

std::uint64_t QueryLedger::queries_used() const {
  std::lock_guard lock(mutex_);
  return used_;
}

std::uint64_t QueryLedger::remaining() const {
  std::lock_guard lock(mutex_);
  return budget_ - used_;
}

std::uint64_t QueryLedger::tally(QueryPhase phase) const {
  std::lock_guard lock(mutex_);
  return tallies_[static_cast<int>(phase)];
}

LedgerTotals QueryLedger::totals() const {
  std::lock_guard lock(mutex_);
  return {budget_, used_, served_, batches_, tallies_[0], tallies_[1], tallies_[2]};
}

}  // namespace sib::oracle
