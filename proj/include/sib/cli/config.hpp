#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sib/gamin/gamin.hpp"
#include "sib/victim/victim.hpp"

namespace sib::cli {

enum class DatasetKind { mnist, orl };

std::string to_string(DatasetKind kind);
// Name used in reports: "MNIST" or "AT&T".
std::string display_name(DatasetKind kind);

struct DataSection {
  DatasetKind dataset = DatasetKind::mnist;
  // Empty directories fall back to SIB_MNIST_DIR / SIB_ORL_DIR.
  std::filesystem::path mnist_dir;
  std::filesystem::path orl_dir;
  std::size_t test_per_class = 1;  // ORL only
  std::uint64_t split_seed = 0;    // ORL only
  // Keep only the first N samples; 0 keeps everything.
  std::size_t train_limit = 0;
  std::size_t test_limit = 0;
};

struct AttackSection {
  gamin::AttackConfig base;  // target_label and seed are filled per job
  std::vector<std::size_t> labels;
  std::vector<std::uint64_t> seeds;
  std::uint64_t budget = 1'280'000;
  bool exempt_surrogate = false;
};

struct EvalSection {
  std::size_t fidelity_batches = 100;
  std::size_t fidelity_batch_size = 64;
  std::size_t samples = 100;
  std::size_t grid_samples = 1;
  bool originals = true;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "runs";
  DataSection data;
  victim::VictimConfig victim;
  std::filesystem::path checkpoint;  // defaults to out_dir/victim-<kind>.ckpt
  AttackSection attack;
  EvalSection eval;
  std::filesystem::path source;  // file the config was read from, if any

  std::filesystem::path checkpoint_path() const;
  std::filesystem::path snapshot_path(std::size_t label, std::uint64_t seed) const;
  std::filesystem::path history_path(std::size_t label, std::uint64_t seed) const;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::vector<std::size_t>> labels;
};

// Parses and validates a config document. Every problem found (unknown keys,
// wrong types, invalid values) is collected into a single ConfigError.
RunConfig parse_run_config(const nlohmann::json& doc, const Overrides& overrides = {});
RunConfig load_run_config(const std::filesystem::path& path, const Overrides& overrides = {});

// Fully materialized config, every default included.
nlohmann::json to_json(const RunConfig& config);
// Hex FNV-1a of the materialized config.
std::string config_hash(const RunConfig& config);

// "0-9", "1,3,5", "2,4-6".
std::vector<std::size_t> parse_label_list(const std::string& text);

std::size_t edit_distance(const std::string& a, const std::string& b);
// Closest candidate within a small edit distance, if any.
std::optional<std::string> suggest(const std::string& key, const std::vector<std::string>& candidates);

}  // namespace sib::cli
