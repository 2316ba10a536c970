#include "sib/cli/config.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "sib/error.hpp"
#include "sib/numcore/archive.hpp"

namespace sib::cli {

using nlohmann::json;

std::string to_string(DatasetKind kind) { return kind == DatasetKind::mnist ? "mnist" : "orl"; }

std::string display_name(DatasetKind kind) { return kind == DatasetKind::mnist ? "MNIST" : "AT&T"; }

namespace {

DatasetKind parse_dataset(const std::string& name) {
  if (name == "mnist") return DatasetKind::mnist;
  if (name == "orl" || name == "att") return DatasetKind::orl;
  throw ConfigError("unknown dataset \"" + name + "\" (expected mnist or orl)");
}

std::string seed_dir(std::uint64_t seed) { return "seed" + std::to_string(seed); }

// Keys each section accepts on top of the ones its library type serializes.
const std::vector<std::string> kTopKeys{"seed", "out_dir", "data", "victim", "attack", "eval"};
const std::vector<std::string> kDataKeys{"dataset",   "mnist_dir",   "orl_dir",   "test_per_class",
                                         "split_seed", "train_limit", "test_limit"};
const std::vector<std::string> kVictimExtra{"checkpoint"};
const std::vector<std::string> kAttackExtra{"labels", "seeds", "budget", "exempt_surrogate"};
const std::vector<std::string> kEvalKeys{"fidelity_batches", "fidelity_batch_size", "samples", "grid_samples",
                                         "originals"};

std::vector<std::string> keys_of(const json& j) {
  std::vector<std::string> out;
  for (const auto& [k, _] : j.items()) out.push_back(k);
  return out;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

class Problems {
 public:
  void add(std::string message) { items_.push_back(std::move(message)); }
  bool empty() const { return items_.empty(); }

  void check_keys(const json& section, const std::string& where, const std::vector<std::string>& known) {
    for (const auto& [key, _] : section.items()) {
      if (std::find(known.begin(), known.end(), key) != known.end()) continue;
      std::string msg = "unknown key \"" + where + key + "\"";
      if (auto s = suggest(key, known)) msg += " (did you mean \"" + *s + "\"?)";
      add(msg);
    }
  }

  // Reads `key` into `field` when present, recording a type problem otherwise.
  template <class T>
  void read(const json& section, const std::string& where, const char* key, T& field) {
    if (!section.contains(key)) return;
    try {
      field = section.at(key).get<T>();
    } catch (const json::exception&) {
      add("\"" + where + key + "\" has the wrong type (got " + section.at(key).dump() + ")");
    }
  }

  [[noreturn]] void raise() const {
    std::string msg = "invalid config (" + std::to_string(items_.size()) + " problem" + (items_.size() == 1 ? "" : "s") + "):";
    for (const auto& p : items_) msg += "\n  - " + p;
    throw ConfigError(msg);
  }

 private:
  std::vector<std::string> items_;
};

json section_of(const json& doc, const char* name, Problems& problems) {
  if (!doc.contains(name)) return json::object();
  const auto& s = doc.at(name);
  if (!s.is_object()) {
    problems.add(std::string("section \"") + name + "\" must be an object");
    return json::object();
  }
  return s;
}

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) {
    return !(a.is_number_integer() && b.is_number_float()) && !(a.is_number_unsigned() && b.get<double>() < 0);
  }
  return a.type() == b.type();
}

// Copies the keys `defaults` knows into a new object, dropping (and reporting)
// values whose JSON type differs from the default's.
json typed_subset(const json& section, const json& defaults, const std::string& where, Problems& problems) {
  json out = json::object();
  for (const auto& [k, def] : defaults.items()) {
    if (!section.contains(k)) continue;
    if (!same_kind(def, section.at(k))) {
      problems.add("\"" + where + k + "\" has the wrong type (got " + section.at(k).dump() + ", expected something like " +
                   def.dump() + ")");
      continue;
    }
    out[k] = section.at(k);
  }
  return out;
}

json without(json j, const std::vector<std::string>& keys) {
  for (const auto& k : keys) j.erase(k);
  return j;
}

}  // namespace

std::filesystem::path RunConfig::checkpoint_path() const {
  if (!checkpoint.empty()) return checkpoint;
  return out_dir / ("victim-" + victim::to_string(victim.kind) + ".ckpt");
}

std::filesystem::path RunConfig::snapshot_path(std::size_t label, std::uint64_t s) const {
  return out_dir / "attack" / seed_dir(s) / ("label" + std::to_string(label) + ".snapshot");
}

std::filesystem::path RunConfig::history_path(std::size_t label, std::uint64_t s) const {
  return out_dir / "attack" / seed_dir(s) / ("label" + std::to_string(label) + ".history.csv");
}

RunConfig parse_run_config(const json& doc, const Overrides& overrides) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  Problems problems;
  RunConfig c;
  problems.check_keys(doc, "", kTopKeys);
  problems.read(doc, "", "seed", c.seed);
  std::string out_dir = c.out_dir.string();
  problems.read(doc, "", "out_dir", out_dir);
  c.out_dir = out_dir;

  // data
  const json data = section_of(doc, "data", problems);
  problems.check_keys(data, "data.", kDataKeys);
  std::string dataset = "mnist", mnist_dir, orl_dir;
  problems.read(data, "data.", "dataset", dataset);
  try {
    c.data.dataset = parse_dataset(dataset);
  } catch (const ConfigError& e) {
    problems.add(std::string("data.dataset: ") + e.what());
  }
  problems.read(data, "data.", "mnist_dir", mnist_dir);
  problems.read(data, "data.", "orl_dir", orl_dir);
  c.data.mnist_dir = mnist_dir;
  c.data.orl_dir = orl_dir;
  problems.read(data, "data.", "test_per_class", c.data.test_per_class);
  problems.read(data, "data.", "split_seed", c.data.split_seed);
  problems.read(data, "data.", "train_limit", c.data.train_limit);
  problems.read(data, "data.", "test_limit", c.data.test_limit);
  if (c.data.test_per_class == 0) problems.add("data.test_per_class must be positive");

  // victim: input and class counts follow the dataset unless given
  const json victim_doc = section_of(doc, "victim", problems);
  problems.check_keys(victim_doc, "victim.", concat(keys_of(victim::to_json(victim::VictimConfig{})), kVictimExtra));
  json vj = victim_doc;
  if (!vj.contains("input_dim")) vj["input_dim"] = c.data.dataset == DatasetKind::mnist ? 784 : 92 * 112;
  if (!vj.contains("num_classes")) vj["num_classes"] = c.data.dataset == DatasetKind::mnist ? 10 : 40;
  if (!vj.contains("seed")) vj["seed"] = overrides.seed.value_or(c.seed);
  std::string checkpoint;
  problems.read(victim_doc, "victim.", "checkpoint", checkpoint);
  c.checkpoint = checkpoint;
  try {
    c.victim = victim::victim_config_from_json(typed_subset(vj, victim::to_json(victim::VictimConfig{}), "victim.", problems));
  } catch (const std::exception& e) {
    problems.add(e.what());
  }

  // attack
  const json attack_doc = section_of(doc, "attack", problems);
  auto attack_known = without(gamin::to_json(gamin::AttackConfig{}), {"target_label", "seed"});
  problems.check_keys(attack_doc, "attack.", concat(keys_of(attack_known), kAttackExtra));
  problems.read(attack_doc, "attack.", "labels", c.attack.labels);
  problems.read(attack_doc, "attack.", "seeds", c.attack.seeds);
  problems.read(attack_doc, "attack.", "budget", c.attack.budget);
  problems.read(attack_doc, "attack.", "exempt_surrogate", c.attack.exempt_surrogate);
  try {
    c.attack.base = gamin::attack_config_from_json(typed_subset(attack_doc, attack_known, "attack.", problems));
  } catch (const std::exception& e) {
    problems.add(e.what());
  }

  // eval
  const json eval = section_of(doc, "eval", problems);
  problems.check_keys(eval, "eval.", kEvalKeys);
  problems.read(eval, "eval.", "fidelity_batches", c.eval.fidelity_batches);
  problems.read(eval, "eval.", "fidelity_batch_size", c.eval.fidelity_batch_size);
  problems.read(eval, "eval.", "samples", c.eval.samples);
  problems.read(eval, "eval.", "grid_samples", c.eval.grid_samples);
  problems.read(eval, "eval.", "originals", c.eval.originals);
  if (c.eval.fidelity_batches == 0 || c.eval.fidelity_batch_size == 0 || c.eval.samples == 0) {
    problems.add("eval sample counts must be positive");
  }

  if (overrides.seed) c.seed = *overrides.seed;
  if (overrides.out_dir) c.out_dir = *overrides.out_dir;
  if (overrides.labels) c.attack.labels = *overrides.labels;
  if (c.attack.labels.empty()) {
    for (std::size_t l = 0; l < c.victim.num_classes; ++l) c.attack.labels.push_back(l);
  }
  if (c.attack.seeds.empty()) c.attack.seeds.push_back(c.seed);
  for (std::size_t l : c.attack.labels) {
    if (l >= c.victim.num_classes) {
      problems.add("label " + std::to_string(l) + " is outside [0, " + std::to_string(c.victim.num_classes) + ")");
    }
  }
  if (c.attack.budget == 0) problems.add("attack.budget must be positive");

  if (!problems.empty()) problems.raise();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw DataError(DataError::Kind::io, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  auto c = parse_run_config(doc, overrides);
  c.source = path;
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir.string();
  j["data"] = {{"dataset", to_string(c.data.dataset)},
               {"mnist_dir", c.data.mnist_dir.string()},
               {"orl_dir", c.data.orl_dir.string()},
               {"test_per_class", c.data.test_per_class},
               {"split_seed", c.data.split_seed},
               {"train_limit", c.data.train_limit},
               {"test_limit", c.data.test_limit}};
  j["victim"] = victim::to_json(c.victim);
  j["victim"]["checkpoint"] = c.checkpoint_path().string();
  auto attack = without(gamin::to_json(c.attack.base), {"target_label", "seed"});
  attack["labels"] = c.attack.labels;
  attack["seeds"] = c.attack.seeds;
  attack["budget"] = c.attack.budget;
  attack["exempt_surrogate"] = c.attack.exempt_surrogate;
  j["attack"] = attack;
  j["eval"] = {{"fidelity_batches", c.eval.fidelity_batches},
               {"fidelity_batch_size", c.eval.fidelity_batch_size},
               {"samples", c.eval.samples},
               {"grid_samples", c.eval.grid_samples},
               {"originals", c.eval.originals}};
  return j;
}

std::string config_hash(const RunConfig& config) {
  const std::string text = to_json(config).dump();
  const auto h = fnv1a64(reinterpret_cast<const std::uint8_t*>(text.data()), text.size());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::size_t> parse_label_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string part;
  auto number = [&](const std::string& s) -> std::size_t {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("bad label list \"" + text + "\"");
    }
    return std::stoul(s);
  };
  while (std::getline(ss, part, ',')) {
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      out.push_back(number(part));
      continue;
    }
    const auto lo = number(part.substr(0, dash)), hi = number(part.substr(dash + 1));
    if (hi < lo) throw ConfigError("bad label range \"" + part + "\"");
    for (auto l = lo; l <= hi; ++l) out.push_back(l);
  }
  if (out.empty()) throw ConfigError("empty label list");
  std::set<std::size_t> seen;
  for (auto l : out)
    if (!seen.insert(l).second) throw ConfigError("label " + std::to_string(l) + " listed twice");
  return out;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::optional<std::string> suggest(const std::string& key, const std::vector<std::string>& candidates) {
  std::optional<std::string> best;
  std::size_t best_d = std::max<std::size_t>(2, key.size() / 3) + 1;
  for (const auto& c : candidates) {
    const auto d = edit_distance(key, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace sib::cli
