#include "sib/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "sib/error.hpp"
#include "sib/numcore/loss.hpp"

namespace sib::metrics {

double fidelity_of(const Tensor2D& target_probs, const Tensor2D& surrogate_probs) {
  require_same_shape(target_probs, surrogate_probs, "fidelity");
  if (target_probs.empty()) throw ValidationError("fidelity: no predictions");
  double total = 0.0;
  for (std::size_t i = 0; i < target_probs.size(); ++i) {
    total += std::abs(static_cast<double>(target_probs.values()[i]) - surrogate_probs.values()[i]);
  }
  return 1.0 - total / static_cast<double>(target_probs.size());
}

double fidelity(oracle::BlackBox& oracle, const Mlp<float>& surrogate, std::size_t n_batches, std::size_t batch_size,
                Rng& rng) {
  if (n_batches == 0 || batch_size == 0) throw ValidationError("fidelity: need at least one sample");
  double total = 0.0;
  for (std::size_t b = 0; b < n_batches; ++b) {
    const auto x = rng_uniform01<float>(rng, batch_size, oracle.input_dim());
    const auto target = oracle.query(x, oracle::QueryPhase::evaluation);
    total += fidelity_of(target, softmax_rows(surrogate.infer(x)));
  }
  return total / static_cast<double>(n_batches);
}

namespace {

double percent_equal(const std::vector<std::size_t>& predicted, std::size_t label) {
  if (predicted.empty()) throw ValidationError("accuracy: empty batch");
  const auto hits = std::count(predicted.begin(), predicted.end(), label);
  return 100.0 * static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double sample_sd(const std::vector<double>& v) {
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

double surrogate_test_accuracy(const Mlp<float>& surrogate, const dataio::Dataset& test) {
  if (test.size() == 0) throw ValidationError("surrogate_test_accuracy: empty test set");
  if (test.dim() != surrogate.input_dim()) throw DimensionError("surrogate_test_accuracy: dimension mismatch");
  std::size_t correct = 0;
  constexpr std::size_t kChunk = 1024;
  for (std::size_t start = 0; start < test.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, test.size() - start);
    const auto predicted = argmax_rows(surrogate.infer(test.images.slice_rows(start, n)));
    for (std::size_t i = 0; i < n; ++i) correct += predicted[i] == test.labels[start + i] ? 1 : 0;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(test.size());
}

double combined_accuracy(const Mlp<float>& generator, const Mlp<float>& surrogate, std::size_t target_label,
                         std::size_t n, Rng& rng) {
  const auto z = rng_standard_normal<float>(rng, n, generator.input_dim());
  return percent_equal(argmax_rows(surrogate.infer(generator.infer(z))), target_label);
}

double target_accuracy_on_inversions(oracle::BlackBox& oracle, const Tensor2D& reconstructions,
                                     std::size_t target_label) {
  if (reconstructions.rows() == 0) throw ValidationError("target_accuracy_on_inversions: no reconstructions");
  return percent_equal(argmax_rows(oracle.query(reconstructions, oracle::QueryPhase::evaluation)), target_label);
}

AttackReport aggregate(const std::string& dataset, const std::string& model_type,
                       const std::vector<LabelMetrics>& runs) {
  if (runs.empty()) throw ValidationError("aggregate: no runs");
  std::map<std::uint64_t, std::vector<const LabelMetrics*>> by_seed;
  std::vector<std::size_t> labels;
  for (const auto& r : runs) {
    by_seed[r.seed].push_back(&r);
    if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) labels.push_back(r.label);
  }
  std::sort(labels.begin(), labels.end());

  std::vector<double> m, f, as, asg, at;
  AttackReport report;
  report.dataset = dataset;
  report.model_type = model_type;
  report.labels = labels;
  for (const auto& [seed, group] : by_seed) {
    report.seeds.push_back(seed);
    auto seed_mean = [&](double LabelMetrics::*field) {
      double s = 0.0;
      for (const auto* r : group) s += r->*field;
      return s / static_cast<double>(group.size());
    };
    m.push_back(seed_mean(&LabelMetrics::m_global));
    f.push_back(seed_mean(&LabelMetrics::fidelity));
    as.push_back(seed_mean(&LabelMetrics::surrogate_accuracy));
    asg.push_back(seed_mean(&LabelMetrics::combined_accuracy));
    at.push_back(seed_mean(&LabelMetrics::target_accuracy));
  }
  report.m_global = mean(m);
  report.fidelity = mean(f);
  report.surrogate_accuracy = mean(as);
  report.combined_accuracy = mean(asg);
  report.target_accuracy = mean(at);
  if (by_seed.size() >= 2) {
    report.m_global_sd = sample_sd(m);
    report.surrogate_accuracy_sd = sample_sd(as);
  }
  return report;
}

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string with_sd(const char* format, double v, const char* sd_format, const std::optional<double>& sd) {
  return sd ? fmt(format, v) + " ± " + fmt(sd_format, *sd) : fmt(format, v);
}

// Display width in code points; every glyph used here is single-width.
std::size_t display_width(const std::string& s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

std::string pad(const std::string& s, std::size_t width) { return s + std::string(width - display_width(s), ' '); }

std::string join_labels(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + std::to_string(v[i]);
  return out;
}

}  // namespace

RenderedReport render_report(const std::vector<AttackReport>& reports) {
  if (reports.empty()) throw ValidationError("render_report: no reports");
  std::vector<std::string> dataset_order;
  for (const auto& r : reports) {
    if (std::find(dataset_order.begin(), dataset_order.end(), r.dataset) == dataset_order.end()) {
      dataset_order.push_back(r.dataset);
    }
  }
  std::vector<const AttackReport*> rows;
  for (const auto& r : reports) rows.push_back(&r);
  std::stable_sort(rows.begin(), rows.end(), [&](const AttackReport* a, const AttackReport* b) {
    const auto da = std::find(dataset_order.begin(), dataset_order.end(), a->dataset);
    const auto db = std::find(dataset_order.begin(), dataset_order.end(), b->dataset);
    if (da != db) return da < db;
    return a->model_type < b->model_type;
  });

  std::vector<std::vector<std::string>> cells{{"Dataset", "Model Type", "M_global", "F_S", "A_S", "A_S∘G", "A_T"}};
  for (const auto* r : rows) {
    cells.push_back({r->dataset, r->model_type, with_sd("%.4f", r->m_global, "%.2f", r->m_global_sd),
                     fmt("%.4f", r->fidelity), with_sd("%.2f", r->surrogate_accuracy, "%.1f", r->surrogate_accuracy_sd),
                     fmt("%.1f", r->combined_accuracy), fmt("%.1f", r->target_accuracy)});
  }
  std::vector<std::size_t> widths(cells[0].size(), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], display_width(row[c]));

  RenderedReport out;
  auto emit = [&](const std::vector<std::string>& row) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) line += (c ? "  " : "") + pad(row[c], widths[c]);
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out.text += line + "\n";
  };
  emit(cells[0]);
  std::size_t total = 0;
  for (std::size_t w : widths) total += w;
  out.text += std::string(total + 2 * (widths.size() - 1), '-') + "\n";
  for (std::size_t i = 1; i < cells.size(); ++i) emit(cells[i]);

  out.csv = "dataset,model_type,m_global,m_global_sd,fidelity,surrogate_accuracy,surrogate_accuracy_sd,"
            "combined_accuracy,target_accuracy,labels,seeds\n";
  for (const auto* r : rows) {
    std::vector<std::size_t> seeds(r->seeds.begin(), r->seeds.end());
    out.csv += r->dataset + "," + r->model_type + "," + fmt("%.9g", r->m_global) + "," +
               (r->m_global_sd ? fmt("%.9g", *r->m_global_sd) : "") + "," + fmt("%.9g", r->fidelity) + "," +
               fmt("%.9g", r->surrogate_accuracy) + "," +
               (r->surrogate_accuracy_sd ? fmt("%.9g", *r->surrogate_accuracy_sd) : "") + "," +
               fmt("%.9g", r->combined_accuracy) + "," + fmt("%.9g", r->target_accuracy) + "," +
               join_labels(r->labels) + "," + join_labels(seeds) + "\n";
  }
  return out;
}

std::string label_metrics_csv(const std::vector<LabelMetrics>& runs) {
  std::string out = "label,seed,m_global,fidelity,surrogate_accuracy,combined_accuracy,target_accuracy\n";
  for (const auto& r : runs) {
    out += std::to_string(r.label) + "," + std::to_string(r.seed) + "," + fmt("%.9g", r.m_global) + "," +
           fmt("%.9g", r.fidelity) + "," + fmt("%.9g", r.surrogate_accuracy) + "," +
           fmt("%.9g", r.combined_accuracy) + "," + fmt("%.9g", r.target_accuracy) + "\n";
  }
  return out;
}

}  // namespace sib::metrics
