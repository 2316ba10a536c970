#include "sib/oracle/oracle.hpp"

#include <cmath>
#include <fstream>

#include "sib/error.hpp"

namespace sib::oracle {

struct OracleHandle::Impl {
  std::shared_ptr<const victim::VictimModel> model;
  OracleOptions options;
  QueryLedger ledger;
  Rng encode_root;
  std::mutex query_mutex;
  std::ofstream log;

  Impl(std::shared_ptr<const victim::VictimModel> m, OracleOptions o)
      : model(std::move(m)), options(std::move(o)), ledger(options.budget, options.exempt),
        encode_root(options.encode_seed) {}
};

OracleHandle::OracleHandle(std::shared_ptr<const victim::VictimModel> model, OracleOptions options) {
  if (!model) throw Error("OracleHandle: no model");
  impl_ = std::make_unique<Impl>(std::move(model), std::move(options));
  if (impl_->options.query_log) {
    impl_->log.open(*impl_->options.query_log, std::ios::trunc);
    if (!impl_->log) {
      throw DataError(DataError::Kind::io, "cannot open query log " + impl_->options.query_log->string());
    }
    impl_->log << "batch,first_row,rows,phase\n";
  }
}

OracleHandle::~OracleHandle() = default;

Tensor2D OracleHandle::query(const Tensor2D& batch, QueryPhase phase) {
  if (batch.cols() != input_dim()) {
    throw DimensionError("query: batch has " + std::to_string(batch.cols()) + " features, target expects " +
                         std::to_string(input_dim()));
  }
  for (float v : batch.values()) {
    if (!(v >= 0.0f && v <= 1.0f)) throw ValidationError("query: inputs must lie in [0, 1]");
  }
  std::lock_guard lock(impl_->query_mutex);
  const std::uint64_t first = impl_->ledger.charge(phase, batch.rows());
  if (impl_->log.is_open()) {
    impl_->log << impl_->ledger.totals().batches - 1 << ',' << first << ',' << batch.rows() << ','
               << to_string(phase) << '\n';
  }
  const Rng& root = impl_->encode_root;
  return impl_->model->predict(batch, [&](std::size_t r) { return root.derive(Purpose::query_encode, first + r); });
}

std::size_t OracleHandle::input_dim() const { return impl_->model->config().input_dim; }

std::size_t OracleHandle::num_classes() const { return impl_->model->config().num_classes; }

const QueryLedger& OracleHandle::ledger() const { return impl_->ledger; }

std::unique_ptr<BlackBox> OracleHandle::evaluation_clone() const {
  OracleOptions opts;
  opts.budget = QueryLedger::kUnlimited;
  opts.encode_seed = splitmix64(impl_->options.encode_seed ^ 0x6576616c756174ULL);
  return std::make_unique<OracleHandle>(impl_->model, opts);
}

}  // namespace sib::oracle
