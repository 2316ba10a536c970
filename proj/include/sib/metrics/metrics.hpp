#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sib/dataio/dataset.hpp"
#include "sib/numcore/mlp.hpp"
#include "sib/oracle/black_box.hpp"

namespace sib::metrics {

// 1 − mean |target − surrogate| over every probability entry.
double fidelity_of(const Tensor2D& target_probs, const Tensor2D& surrogate_probs);

// F_S on n_batches × batch_size uniform inputs. Pass an evaluation oracle;
// queries are tagged with the evaluation phase.
double fidelity(oracle::BlackBox& oracle, const Mlp<float>& surrogate, std::size_t n_batches, std::size_t batch_size,
                Rng& rng);

// Percent of samples the surrogate classifies correctly.
double surrogate_test_accuracy(const Mlp<float>& surrogate, const dataio::Dataset& test);

// Percent of n generated samples the surrogate assigns to target_label.
double combined_accuracy(const Mlp<float>& generator, const Mlp<float>& surrogate, std::size_t target_label,
                         std::size_t n, Rng& rng);

// Percent of reconstructions the target assigns to target_label.
double target_accuracy_on_inversions(oracle::BlackBox& oracle, const Tensor2D& reconstructions,
                                     std::size_t target_label);

// Everything measured for one (label, seed) attack.
struct LabelMetrics {
  std::size_t label = 0;
  std::uint64_t seed = 0;
  double m_global = 0.0;
  double fidelity = 0.0;
  double surrogate_accuracy = 0.0;
  double combined_accuracy = 0.0;
  double target_accuracy = 0.0;
};

struct AttackReport {
  std::string dataset;
  std::string model_type;  // "ANN" or "SNN"
  std::vector<std::size_t> labels;
  std::vector<std::uint64_t> seeds;
  double m_global = 0.0;
  std::optional<double> m_global_sd;
  double fidelity = 0.0;
  double surrogate_accuracy = 0.0;
  std::optional<double> surrogate_accuracy_sd;
  double combined_accuracy = 0.0;
  double target_accuracy = 0.0;
};

// Averages over labels within each seed, then over seeds. The sample
// standard deviation across seed means is kept for M_global and A_S when
// there are at least two seeds.
AttackReport aggregate(const std::string& dataset, const std::string& model_type,
                       const std::vector<LabelMetrics>& runs);

struct RenderedReport {
  std::string text;
  std::string csv;
};

// Rows grouped by dataset (first-seen order), then ANN before SNN.
RenderedReport render_report(const std::vector<AttackReport>& reports);

std::string label_metrics_csv(const std::vector<LabelMetrics>& runs);

}  // namespace sib::metrics
