#include "sib/cli/commands.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "sib/dataio/mnist.hpp"
#include "sib/dataio/orl.hpp"
#include "sib/dataio/pgm.hpp"
#include "sib/error.hpp"
#include "sib/gamin/gamin.hpp"
#include "sib/numcore/archive.hpp"
#include "sib/oracle/oracle.hpp"
#include "sib/victim/victim.hpp"

namespace sib::cli {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
      dynamic_cast<const DimensionError*>(&e)) {
    return config_error;
  }
  if (dynamic_cast<const DataError*>(&e)) return data_error;
  if (dynamic_cast<const BudgetError*>(&e)) return budget_error;
  if (dynamic_cast<const TrainingError*>(&e)) return numeric_error;
  return other;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

fs::path dir_or_env(const fs::path& configured, const char* env, const char* what) {
  if (!configured.empty()) return configured;
  if (const char* v = std::getenv(env); v && *v) return v;
  throw DataError(DataError::Kind::io, std::string("no ") + what + " directory: set data." + what + "_dir or " + env);
}

fs::path find_idx(const fs::path& dir, const std::string& stem) {
  for (const auto& name : {stem, stem + ".gz"}) {
    if (fs::exists(dir / name)) return dir / name;
  }
  throw DataError(DataError::Kind::io, "missing " + stem + " in " + dir.string());
}

dataio::Dataset head(const dataio::Dataset& d, std::size_t limit) {
  if (limit == 0 || limit >= d.size()) return d;
  std::vector<std::size_t> idx(limit);
  for (std::size_t i = 0; i < limit; ++i) idx[i] = i;
  return d.subset(idx);
}

std::string upper_kind(victim::VictimKind kind) { return kind == victim::VictimKind::ann ? "ANN" : "SNN"; }

std::pair<std::size_t, std::size_t> image_shape(DatasetKind kind) {
  return kind == DatasetKind::mnist ? std::pair<std::size_t, std::size_t>{28, 28}
                                    : std::pair<std::size_t, std::size_t>{dataio::kOrlWidth, dataio::kOrlHeight};
}

// Runs fn(0..n-1) on up to `threads` workers. After the first failure no new
// jobs start; that failure is rethrown once every worker has stopped.
void run_pool(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      if (failed) return;
      const std::size_t i = next++;
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  const std::size_t t = std::max<std::size_t>(1, std::min(threads, n));
  if (t == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < t; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

std::shared_ptr<const victim::VictimModel> load_victim(const RunConfig& config) {
  const auto path = config.checkpoint_path();
  if (!fs::exists(path)) {
    throw DataError(DataError::Kind::io, "checkpoint not found: " + path.string() + " (run train-target first)");
  }
  auto ckpt = victim::load_checkpoint(path);
  const auto& vc = ckpt.config();
  if (vc.kind != config.victim.kind || vc.input_dim != config.victim.input_dim ||
      vc.num_classes != config.victim.num_classes) {
    throw ConfigError("checkpoint " + path.string() + " holds a " + victim::to_string(vc.kind) + " model with " +
                      std::to_string(vc.input_dim) + " inputs and " + std::to_string(vc.num_classes) +
                      " classes, which does not match the config");
  }
  return std::make_shared<const victim::VictimModel>(std::move(ckpt.model));
}

json totals_json(const oracle::LedgerTotals& t) {
  return {{"budget", t.budget},         {"queries_used", t.queries_used}, {"rows_served", t.rows_served},
          {"batches", t.batches},       {"surrogate", t.surrogate},       {"generator", t.generator},
          {"evaluation", t.evaluation}};
}

json job_json(const AttackJobRecord& r) {
  return {{"label", r.label},
          {"seed", r.seed},
          {"batches_run", r.batches_run},
          {"queries_used", r.queries_used},
          {"budget_exhausted", r.budget_exhausted},
          {"best_m_global", r.best_m_global},
          {"best_batch", r.best_batch},
          {"seconds", r.seconds}};
}

AttackJobRecord job_from_json(const json& j) {
  AttackJobRecord r;
  r.label = j.at("label").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.batches_run = j.at("batches_run").get<std::size_t>();
  r.queries_used = j.at("queries_used").get<std::uint64_t>();
  r.budget_exhausted = j.at("budget_exhausted").get<bool>();
  r.best_m_global = j.at("best_m_global").is_null() ? 0.0 : j.at("best_m_global").get<double>();
  r.best_batch = j.at("best_batch").get<std::size_t>();
  r.seconds = j.at("seconds").get<double>();
  return r;
}

fs::path default_out(const std::vector<RunConfig>& configs, const fs::path& out_dir) {
  if (configs.empty()) throw ConfigError("at least one config is required");
  return out_dir.empty() ? configs.front().out_dir : out_dir;
}

std::string combined_hash(const std::vector<RunConfig>& configs) {
  if (configs.size() == 1) return config_hash(configs.front());
  std::string joined;
  for (const auto& c : configs) joined += config_hash(c);
  const auto h = fnv1a64(reinterpret_cast<const std::uint8_t*>(joined.data()), joined.size());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json configs_json(const std::vector<RunConfig>& configs) {
  json arr = json::array();
  for (const auto& c : configs) arr.push_back(to_json(c));
  return arr;
}

void require_snapshot(const RunConfig& c, std::size_t label, std::uint64_t seed) {
  if (!fs::exists(c.snapshot_path(label, seed))) {
    throw DataError(DataError::Kind::missing_entry, "no snapshot for label " + std::to_string(label) + " (seed " +
                                                        std::to_string(seed) + "): " +
                                                        c.snapshot_path(label, seed).string());
  }
}

}  // namespace

LoadedData load_data(const DataSection& data) {
  LoadedData out;
  std::tie(out.width, out.height) = image_shape(data.dataset);
  if (data.dataset == DatasetKind::mnist) {
    const auto dir = dir_or_env(data.mnist_dir, "SIB_MNIST_DIR", "mnist");
    out.train = dataio::load_mnist(find_idx(dir, "train-images-idx3-ubyte"), find_idx(dir, "train-labels-idx1-ubyte"));
    out.test = dataio::load_mnist(find_idx(dir, "t10k-images-idx3-ubyte"), find_idx(dir, "t10k-labels-idx1-ubyte"));
  } else {
    const auto dir = dir_or_env(data.orl_dir, "SIB_ORL_DIR", "orl");
    std::tie(out.train, out.test) = dataio::stratified_split(dataio::load_orl(dir), data.test_per_class, data.split_seed);
  }
  out.train = head(out.train, data.train_limit);
  out.test = head(out.test, data.test_limit);
  return out;
}

fs::path RunManifest::path_in(const fs::path& out_dir) const { return out_dir / ("manifest-" + command + ".json"); }

json to_json(const RunManifest& m) {
  return {{"command", m.command},   {"status", m.status},       {"config_hash", m.config_hash},
          {"seed", m.seed},         {"version", m.version},     {"config", m.config},
          {"timings", m.timings},   {"artifacts", m.artifacts}, {"ledger", m.ledger},
          {"details", m.details}};
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.status = j.at("status").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.version = j.at("version").get<std::string>();
    m.config = j.at("config");
    m.timings = j.at("timings");
    m.artifacts = j.at("artifacts").get<std::vector<std::string>>();
    m.ledger = j.at("ledger");
    m.details = j.at("details");
  } catch (const json::exception& e) {
    throw DataError(DataError::Kind::corrupt, std::string("manifest: ") + e.what());
  }
  return m;
}

void write_manifest(const RunManifest& manifest, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  write_file_atomic(manifest.path_in(out_dir), to_json(manifest).dump(2) + "\n");
}

RunManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(DataError::Kind::io, "cannot open manifest " + path.string());
  try {
    return manifest_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw DataError(DataError::Kind::corrupt, "manifest " + path.string() + ": " + e.what());
  }
}

TrainOutcome train_target(const RunConfig& config) {
  RunManifest manifest;
  manifest.command = "train-target";
  manifest.config_hash = config_hash(config);
  manifest.seed = config.seed;
  manifest.config = to_json(config);
  manifest.status = "running";

  auto start = Clock::now();
  const auto data = load_data(config.data);
  manifest.timings["load_data"] = seconds_since(start);
  if (data.train.dim() != config.victim.input_dim || data.train.class_count != config.victim.num_classes) {
    throw ConfigError("dataset has " + std::to_string(data.train.dim()) + " inputs and " +
                      std::to_string(data.train.class_count) + " classes; victim config expects " +
                      std::to_string(config.victim.input_dim) + " and " + std::to_string(config.victim.num_classes));
  }
  spdlog::info("training {} victim on {} ({} train / {} test)", upper_kind(config.victim.kind),
               display_name(config.data.dataset), data.train.size(), data.test.size());

  start = Clock::now();
  auto ckpt = victim::train_victim(config.victim, data.train, data.test, [](const victim::EpochRecord& r) {
    spdlog::info("epoch {} train_loss {:.5f} test_accuracy {:.4f} ({:.1f}s)", r.epoch, r.train_loss,
                 r.test_accuracy, r.seconds);
  });
  manifest.timings["train"] = seconds_since(start);

  // Wall-clock times live in the manifest so that checkpoints are byte-stable.
  json epochs = json::array();
  for (auto& r : ckpt.training.history) {
    epochs.push_back({{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"test_accuracy", r.test_accuracy},
                      {"seconds", r.seconds}});
    r.seconds = 0.0;
  }

  const auto path = config.checkpoint_path();
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  victim::save_checkpoint(ckpt, path);

  TrainOutcome out;
  out.test_accuracy = ckpt.training.final_test_accuracy;
  out.checkpoint = path;
  manifest.artifacts.push_back(path.string());
  manifest.details = {{"dataset", display_name(config.data.dataset)},
                      {"model_type", upper_kind(config.victim.kind)},
                      {"test_accuracy", out.test_accuracy},
                      {"epochs_run", ckpt.training.epochs_run},
                      {"early_stopped", ckpt.training.early_stopped},
                      {"epochs", epochs}};
  manifest.status = "complete";
  write_manifest(manifest, config.out_dir);
  out.manifest = manifest;
  return out;
}

AttackOutcome attack(const RunConfig& config, const AttackOptions& options) {
  const auto total_start = Clock::now();
  auto model = load_victim(config);  // pre-flight before any compute
  const std::string hash = config_hash(config);

  RunManifest manifest;
  manifest.command = "attack";
  manifest.config_hash = hash;
  manifest.seed = config.seed;
  manifest.config = to_json(config);
  manifest.status = "running";

  struct Job {
    std::size_t label;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t label : config.attack.labels)
    for (std::uint64_t seed : config.attack.seeds) jobs.push_back({label, seed});

  std::map<std::pair<std::size_t, std::uint64_t>, AttackJobRecord> done;
  const auto manifest_path = manifest.path_in(config.out_dir);
  if (options.resume && fs::exists(manifest_path)) {
    const auto previous = read_manifest(manifest_path);
    if (previous.config_hash != hash) {
      throw ConfigError("cannot resume: " + manifest_path.string() + " was written for config " +
                        previous.config_hash + ", current config is " + hash);
    }
    for (const auto& j : previous.details.value("jobs", json::array())) {
      auto r = job_from_json(j);
      if (fs::exists(config.snapshot_path(r.label, r.seed)) && fs::exists(config.history_path(r.label, r.seed))) {
        done[{r.label, r.seed}] = r;
      }
    }
    spdlog::info("resuming: {} of {} jobs already complete", done.size(), jobs.size());
  }

  std::mutex mutex;
  oracle::LedgerTotals sum;
  auto add_totals = [&](const oracle::LedgerTotals& t) {
    sum.queries_used += t.queries_used;
    sum.rows_served += t.rows_served;
    sum.batches += t.batches;
    sum.surrogate += t.surrogate;
    sum.generator += t.generator;
    sum.evaluation += t.evaluation;
  };
  auto flush = [&] {
    json list = json::array();
    std::vector<std::string> artifacts;
    for (const auto& j : jobs) {
      auto it = done.find({j.label, j.seed});
      if (it == done.end()) continue;
      list.push_back(job_json(it->second));
      artifacts.push_back(config.snapshot_path(j.label, j.seed).string());
      artifacts.push_back(config.history_path(j.label, j.seed).string());
    }
    std::uint64_t queries = 0;
    for (const auto& [key, r] : done) queries += r.queries_used;
    manifest.details["jobs"] = list;
    manifest.artifacts = artifacts;
    manifest.ledger = {{"queries_used", queries},
                       {"budget_per_job", config.attack.budget},
                       {"jobs", done.size()},
                       {"this_invocation", totals_json(sum)}};
    manifest.timings["total"] = seconds_since(total_start);
    write_manifest(manifest, config.out_dir);
  };

  std::vector<Job> pending;
  for (const auto& j : jobs)
    if (!done.count({j.label, j.seed})) pending.push_back(j);

  run_pool(pending.size(), options.parallel, [&](std::size_t i) {
    const auto [label, seed] = pending[i];
    const auto start = Clock::now();
    oracle::OracleOptions oo;
    oo.budget = config.attack.budget;
    if (config.attack.exempt_surrogate) oo.exempt = {oracle::QueryPhase::surrogate};
    oo.encode_seed = Rng(seed).derive(Purpose::query_encode, label).next_u64();
    oracle::OracleHandle handle(model, oo);

    gamin::AttackConfig ac = config.attack.base;
    ac.target_label = label;
    ac.seed = seed;
    Rng rng = Rng(seed).derive(Purpose::attack, label);
    spdlog::info("attack label {} seed {}: {} batches, budget {}", label, seed, ac.total_batches, oo.budget);
    gamin::AttackResult result;
    try {
      result = gamin::run_attack(ac, handle, rng, [&](const gamin::HistoryRow& row) {
        if ((row.batch + 1) % 1000 == 0) {
          spdlog::info("label {} seed {} batch {} L_S {:.4f} L_G {:.4f} k {:.4f} M_global {:.4f}", label, seed,
                       row.batch + 1, row.loss_s, row.loss_g, row.k, row.m_global);
        }
      });
    } catch (const std::exception& e) {
      spdlog::error("attack label {} seed {} failed: {}", label, seed, e.what());
      throw;
    }
    if (result.budget_exhausted) {
      spdlog::warn("label {} seed {}: budget exhausted after {} batches", label, seed, result.batches_run);
    }
    fs::create_directories(config.snapshot_path(label, seed).parent_path());
    gamin::save_snapshot(result.best, config.snapshot_path(label, seed),
                         {{"config_hash", hash}, {"seed", seed}, {"victim_kind", victim::to_string(config.victim.kind)}});
    gamin::write_history_csv(result.history, config.history_path(label, seed));

    AttackJobRecord rec{label,
                        seed,
                        result.batches_run,
                        result.queries_used,
                        result.budget_exhausted,
                        result.best.best_m_global,
                        result.best.batch,
                        seconds_since(start)};
    spdlog::info("label {} seed {} done: best M_global {:.4f} at batch {}, {} queries, {:.1f}s", label, seed,
                 rec.best_m_global, rec.best_batch, rec.queries_used, rec.seconds);
    std::lock_guard lock(mutex);
    add_totals(handle.ledger().totals());
    done[{label, seed}] = rec;
    flush();
  });

  manifest.status = "complete";
  flush();

  AttackOutcome out;
  for (const auto& j : jobs) out.jobs.push_back(done.at({j.label, j.seed}));
  out.manifest = manifest;
  return out;
}

EvaluateOutcome evaluate(const std::vector<RunConfig>& configs, const fs::path& out_dir_arg, std::size_t parallel) {
  const auto out_dir = default_out(configs, out_dir_arg);
  const auto total_start = Clock::now();
  // Pre-flight: every checkpoint and snapshot must exist before any work.
  for (const auto& c : configs) {
    if (!fs::exists(c.checkpoint_path())) {
      throw DataError(DataError::Kind::io, "checkpoint not found: " + c.checkpoint_path().string());
    }
    for (auto label : c.attack.labels)
      for (auto seed : c.attack.seeds) require_snapshot(c, label, seed);
  }

  EvaluateOutcome out;
  RunManifest manifest;
  manifest.command = "evaluate";
  manifest.config_hash = combined_hash(configs);
  manifest.seed = configs.front().seed;
  manifest.config = configs_json(configs);

  json ledgers = json::array();
  for (const auto& c : configs) {
    const auto start = Clock::now();
    auto model = load_victim(c);
    const auto data = load_data(c.data);
    struct Job {
      std::size_t label;
      std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (auto label : c.attack.labels)
      for (auto seed : c.attack.seeds) jobs.push_back({label, seed});
    std::vector<metrics::LabelMetrics> runs(jobs.size());
    std::vector<oracle::LedgerTotals> totals(jobs.size());

    run_pool(jobs.size(), parallel, [&](std::size_t i) {
      const auto [label, seed] = jobs[i];
      const auto snap = gamin::load_snapshot(c.snapshot_path(label, seed));
      oracle::OracleOptions oo;
      oo.budget = oracle::QueryLedger::kUnlimited;
      oo.encode_seed = Rng(seed).derive(Purpose::evaluation, label).next_u64();
      oracle::OracleHandle eval(model, oo);
      Rng rng = Rng(seed).derive(Purpose::evaluation, label, 1);

      metrics::LabelMetrics m;
      m.label = label;
      m.seed = seed;
      m.m_global = snap.best_m_global;
      m.fidelity = metrics::fidelity(eval, snap.surrogate, c.eval.fidelity_batches, c.eval.fidelity_batch_size, rng);
      m.surrogate_accuracy = metrics::surrogate_test_accuracy(snap.surrogate, data.test);
      m.combined_accuracy = metrics::combined_accuracy(snap.generator, snap.surrogate, label, c.eval.samples, rng);
      const auto recon = gamin::invert(snap, c.eval.samples, rng);
      m.target_accuracy = metrics::target_accuracy_on_inversions(eval, recon, label);
      spdlog::info("{} {} label {} seed {}: M_global {:.4f} F_S {:.4f} A_S {:.2f} A_SG {:.1f} A_T {:.1f}",
                   display_name(c.data.dataset), upper_kind(c.victim.kind), label, seed, m.m_global, m.fidelity,
                   m.surrogate_accuracy, m.combined_accuracy, m.target_accuracy);
      runs[i] = m;
      totals[i] = eval.ledger().totals();
    });

    std::uint64_t eval_rows = 0;
    for (const auto& t : totals) eval_rows += t.evaluation;
    ledgers.push_back({{"config_hash", config_hash(c)}, {"evaluation_queries", eval_rows}, {"attack_queries", 0}});
    out.reports.push_back(metrics::aggregate(display_name(c.data.dataset), upper_kind(c.victim.kind), runs));
    out.runs.insert(out.runs.end(), runs.begin(), runs.end());
    manifest.timings[config_hash(c)] = seconds_since(start);
  }

  out.rendered = metrics::render_report(out.reports);
  fs::create_directories(out_dir);
  const auto report_txt = out_dir / "report.txt", report_csv = out_dir / "report.csv",
             label_csv = out_dir / "label_metrics.csv";
  write_file_atomic(report_txt, out.rendered.text);
  write_file_atomic(report_csv, out.rendered.csv);
  write_file_atomic(label_csv, metrics::label_metrics_csv(out.runs));
  manifest.artifacts = {report_txt.string(), report_csv.string(), label_csv.string()};
  manifest.ledger = {{"per_config", ledgers}};
  manifest.timings["total"] = seconds_since(total_start);
  write_manifest(manifest, out_dir);
  out.manifest = manifest;
  return out;
}

ReconstructOutcome reconstruct(const std::vector<RunConfig>& configs, const fs::path& out_dir_arg) {
  const auto out_dir = default_out(configs, out_dir_arg);
  const auto total_start = Clock::now();
  for (const auto& c : configs)
    for (auto label : c.attack.labels) require_snapshot(c, label, c.attack.seeds.front());

  std::vector<DatasetKind> order;
  for (const auto& c : configs)
    if (std::find(order.begin(), order.end(), c.data.dataset) == order.end()) order.push_back(c.data.dataset);

  ReconstructOutcome out;
  RunManifest manifest;
  manifest.command = "reconstruct";
  manifest.config_hash = combined_hash(configs);
  manifest.seed = configs.front().seed;
  manifest.config = configs_json(configs);
  json layout = json::array();

  for (auto kind : order) {
    std::vector<const RunConfig*> group;
    for (const auto& c : configs)
      if (c.data.dataset == kind) group.push_back(&c);
    const auto& first = *group.front();
    const auto& labels = first.attack.labels;
    const auto [width, height] = image_shape(kind);

    std::vector<Tensor2D> rows;
    json row_names = json::array();
    if (first.eval.originals) {
      const auto data = load_data(first.data);
      Tensor2D row(labels.size(), width * height);
      for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto idx = data.test.indices_of(labels[i]);
        if (idx.empty()) {
          throw DataError(DataError::Kind::missing_entry, "no test image of class " + std::to_string(labels[i]));
        }
        const auto src = data.test.images.row(idx.front());
        std::copy(src.begin(), src.end(), row.row(i).begin());
      }
      rows.push_back(std::move(row));
      row_names.push_back("original");
    }
    for (const auto* c : group) {
      const auto seed = c->attack.seeds.front();
      std::vector<Tensor2D> per_label;
      for (auto label : labels) {
        require_snapshot(*c, label, seed);
        const auto snap = gamin::load_snapshot(c->snapshot_path(label, seed));
        Rng rng = Rng(seed).derive(Purpose::evaluation, label, 2);
        per_label.push_back(gamin::invert(snap, c->eval.grid_samples, rng));
      }
      for (std::size_t s = 0; s < first.eval.grid_samples && s < c->eval.grid_samples; ++s) {
        Tensor2D row(labels.size(), width * height);
        for (std::size_t i = 0; i < labels.size(); ++i) {
          const auto src = per_label[i].row(s);
          std::copy(src.begin(), src.end(), row.row(i).begin());
        }
        rows.push_back(std::move(row));
        row_names.push_back(upper_kind(c->victim.kind) + " seed " + std::to_string(seed));
      }
    }
    Tensor2D grid = rows.front();
    for (std::size_t r = 1; r < rows.size(); ++r) grid = vstack(grid, rows[r]);
    fs::create_directories(out_dir);
    const auto path = out_dir / ("reconstruct-" + to_string(kind) + ".pgm");
    dataio::write_image_grid(grid, width, height, labels.size(), path);
    spdlog::info("wrote {} ({} rows × {} labels)", path.string(), rows.size(), labels.size());
    out.grids.push_back(path);
    manifest.artifacts.push_back(path.string());
    layout.push_back({{"grid", path.string()}, {"labels", labels}, {"rows", row_names}});
  }
  manifest.details = {{"grids", layout}};
  manifest.ledger = {{"queries_used", 0}};
  manifest.timings["total"] = seconds_since(total_start);
  write_manifest(manifest, out_dir);
  out.manifest = manifest;
  return out;
}

}  // namespace sib::cli
