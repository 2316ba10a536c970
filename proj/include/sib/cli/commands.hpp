#pragma once

#include <exception>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sib/cli/config.hpp"
#include "sib/dataio/dataset.hpp"
#include "sib/metrics/metrics.hpp"

namespace sib::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { ok = 0, other = 1, config_error = 2, data_error = 3, budget_error = 4, numeric_error = 5 };

int exit_code_for(const std::exception& e);

struct LoadedData {
  dataio::Dataset train;
  dataio::Dataset test;
  std::size_t width = 0;
  std::size_t height = 0;
};

LoadedData load_data(const DataSection& data);

// Written atomically at the end of every command (and after each finished
// attack job, so an interrupted run can resume).
struct RunManifest {
  std::string command;
  std::string status = "complete";
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json timings = nlohmann::json::object();  // stage → seconds
  std::vector<std::string> artifacts;
  nlohmann::json ledger = nlohmann::json::object();
  nlohmann::json details = nlohmann::json::object();

  std::filesystem::path path_in(const std::filesystem::path& out_dir) const;
};

nlohmann::json to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& j);
void write_manifest(const RunManifest& manifest, const std::filesystem::path& out_dir);
RunManifest read_manifest(const std::filesystem::path& path);

struct TrainOutcome {
  double test_accuracy = 0.0;  // fraction
  std::filesystem::path checkpoint;
  RunManifest manifest;
};

TrainOutcome train_target(const RunConfig& config);

struct AttackOptions {
  std::size_t parallel = 1;
  bool resume = false;
};

struct AttackJobRecord {
  std::size_t label = 0;
  std::uint64_t seed = 0;
  std::size_t batches_run = 0;
  std::uint64_t queries_used = 0;
  bool budget_exhausted = false;
  double best_m_global = 0.0;
  std::size_t best_batch = 0;
  double seconds = 0.0;
};

struct AttackOutcome {
  std::vector<AttackJobRecord> jobs;  // label-major, then seed
  RunManifest manifest;
};

AttackOutcome attack(const RunConfig& config, const AttackOptions& options = {});

struct EvaluateOutcome {
  std::vector<metrics::AttackReport> reports;  // one per config
  std::vector<metrics::LabelMetrics> runs;     // every (config, label, seed)
  metrics::RenderedReport rendered;
  RunManifest manifest;
};

// One report row per config. Outputs go to out_dir (default: the first
// config's out_dir).
EvaluateOutcome evaluate(const std::vector<RunConfig>& configs, const std::filesystem::path& out_dir = {},
                         std::size_t parallel = 1);

struct ReconstructOutcome {
  std::vector<std::filesystem::path> grids;
  RunManifest manifest;
};

// One grid per dataset: an optional row of real test images per label, then
// grid_samples rows of reconstructions for each config.
ReconstructOutcome reconstruct(const std::vector<RunConfig>& configs, const std::filesystem::path& out_dir = {});

// Logger named "sib" on stderr; SIB_LOG picks the level (default info).
void configure_logging();

// Entry point for the sib executable.
int run_main(int argc, char** argv);

}  // namespace sib::cli
