#pragma once

#ifdef SIB_BLACK_BOX_SEAL
#error "oracle construction is not visible behind the black-box boundary; use sib/oracle/black_box.hpp"
#endif

#include <filesystem>
#include <optional>

#include "sib/oracle/black_box.hpp"
#include "sib/victim/victim.hpp"

namespace sib::oracle {

struct OracleOptions {
  std::uint64_t budget = QueryLedger::kDefaultBudget;
  std::set<QueryPhase> exempt;
  // Root of the SNN encoding streams; row i of the whole query sequence is
  // encoded with Rng(encode_seed).derive(query_encode, i).
  std::uint64_t encode_seed = 0;
  // One line per batch: batch, first_row, rows, phase.
  std::optional<std::filesystem::path> query_log;
};

class OracleHandle final : public BlackBox {
 public:
  OracleHandle(std::shared_ptr<const victim::VictimModel> model, OracleOptions options = {});
  ~OracleHandle() override;
  OracleHandle(const OracleHandle&) = delete;
  OracleHandle& operator=(const OracleHandle&) = delete;

  Tensor2D query(const Tensor2D& batch, QueryPhase phase) override;
  std::size_t input_dim() const override;
  std::size_t num_classes() const override;
  const QueryLedger& ledger() const override;
  std::unique_ptr<BlackBox> evaluation_clone() const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sib::oracle
