#include "sib/gamin/gamin.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sib/error.hpp"
#include "sib/numcore/loss.hpp"

namespace sib::gamin {

using nlohmann::json;

std::string to_string(MGlobalMode mode) { return mode == MGlobalMode::began ? "began" : "as-written"; }

MGlobalMode parse_m_global_mode(const std::string& name) {
  if (name == "began") return MGlobalMode::began;
  if (name == "as-written") return MGlobalMode::as_written;
  throw ConfigError("unknown m_global mode '" + name + "' (expected began or as-written)");
}

void AttackConfig::validate() const {
  if (batch_size == 0) throw ConfigError("attack: batch_size must be positive");
  if (noise_dim == 0) throw ConfigError("attack: noise_dim must be positive");
  if (snapshot_every == 0) throw ConfigError("attack: snapshot_every must be positive");
  for (std::size_t w : generator_hidden)
    if (w == 0) throw ConfigError("attack: generator_hidden widths must be positive");
  for (std::size_t w : surrogate_hidden)
    if (w == 0) throw ConfigError("attack: surrogate_hidden widths must be positive");
  if (!(equilibrium.k >= 0.0 && equilibrium.k <= 1.0)) throw ConfigError("attack: k0 must lie in [0, 1]");
  if (!(equilibrium.lambda_k >= 0.0)) throw ConfigError("attack: lambda_k must be non-negative");
  if (!(equilibrium.gamma_k >= 0.0)) throw ConfigError("attack: gamma_k must be non-negative");
  optimizer.validate();
}

std::uint64_t AttackConfig::queries_per_batch(bool exempt_surrogate) const {
  return (exempt_surrogate ? 1u : 2u) * static_cast<std::uint64_t>(batch_size);
}

json to_json(const AttackConfig& c) {
  return {{"target_label", c.target_label},
          {"batch_size", c.batch_size},
          {"total_batches", c.total_batches},
          {"noise_dim", c.noise_dim},
          {"generator_hidden", c.generator_hidden},
          {"surrogate_hidden", c.surrogate_hidden},
          {"learning_rate", c.optimizer.learning_rate},
          {"beta1", c.optimizer.beta1},
          {"beta2", c.optimizer.beta2},
          {"epsilon", c.optimizer.epsilon},
          {"k0", c.equilibrium.k},
          {"lambda_k", c.equilibrium.lambda_k},
          {"gamma_k", c.equilibrium.gamma_k},
          {"m_global_mode", to_string(c.m_global_mode)},
          {"seed", c.seed},
          {"snapshot_every", c.snapshot_every}};
}

AttackConfig attack_config_from_json(const json& j) {
  AttackConfig c;
  try {
    auto read = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    read("target_label", c.target_label);
    read("batch_size", c.batch_size);
    read("total_batches", c.total_batches);
    read("noise_dim", c.noise_dim);
    read("generator_hidden", c.generator_hidden);
    read("surrogate_hidden", c.surrogate_hidden);
    read("learning_rate", c.optimizer.learning_rate);
    read("beta1", c.optimizer.beta1);
    read("beta2", c.optimizer.beta2);
    read("epsilon", c.optimizer.epsilon);
    read("k0", c.equilibrium.k);
    read("lambda_k", c.equilibrium.lambda_k);
    read("gamma_k", c.equilibrium.gamma_k);
    if (j.contains("m_global_mode")) c.m_global_mode = parse_m_global_mode(j.at("m_global_mode").get<std::string>());
    read("seed", c.seed);
    read("snapshot_every", c.snapshot_every);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("attack config: ") + e.what());
  }
  c.validate();
  return c;
}

template <class T>
Mlp<T> make_generator(std::size_t noise_dim, const std::vector<std::size_t>& hidden, std::size_t image_dim, Rng& rng) {
  std::vector<std::size_t> widths{noise_dim};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(image_dim);
  std::vector<Activation> acts(hidden.size(), Activation::relu);
  acts.push_back(Activation::sigmoid);
  return Mlp<T>(widths, acts, rng);
}

template <class T>
Mlp<T> make_surrogate(std::size_t image_dim, const std::vector<std::size_t>& hidden, std::size_t classes, Rng& rng) {
  std::vector<std::size_t> widths{image_dim};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(classes);
  std::vector<Activation> acts(hidden.size(), Activation::relu);
  acts.push_back(Activation::identity);
  return Mlp<T>(widths, acts, rng);
}

template <class T>
SurrogateLosses surrogate_loss(Mlp<T>& surrogate, const Matrix<T>& xs, const Matrix<T>& ys, const Matrix<T>& xg,
                               const Matrix<T>& yg, double k) {
  surrogate.zero_grad();
  const auto logits = surrogate.forward(vstack(xs, xg));
  const auto on_xs = softmax_cross_entropy(logits.slice_rows(0, xs.rows()), ys);
  auto on_xg = softmax_cross_entropy(logits.slice_rows(xs.rows(), xg.rows()), yg);
  for (auto& g : on_xg.grad.values()) g = static_cast<T>(-k * static_cast<double>(g));
  surrogate.backward(vstack(on_xs.grad, on_xg.grad));
  return {on_xs.loss - k * on_xg.loss, on_xs.loss, on_xg.loss};
}

template <class T>
double generator_loss(Mlp<T>& generator, const Mlp<T>& surrogate, const Matrix<T>& z, std::size_t target_label) {
  if (target_label >= surrogate.output_dim()) throw ValidationError("generator_loss: target label out of range");
  generator.zero_grad();
  const auto x = generator.forward(z);
  const auto ce = softmax_cross_entropy(surrogate.infer(x),
                                        one_hot_repeated<T>(target_label, z.rows(), surrogate.output_dim()));
  generator.backward(surrogate.input_gradient(x, ce.grad));
  return ce.loss;
}

SurrogateLosses surrogate_train_step(Mlp<float>& surrogate, Adam<float>& optimizer, oracle::BlackBox& oracle,
                                     const Mlp<float>& generator, const EquilibriumState& eq,
                                     std::size_t batch_size, std::size_t noise_dim, Rng& rng) {
  const auto& ledger = oracle.ledger();
  const std::uint64_t needed = (ledger.is_exempt(oracle::QueryPhase::surrogate) ? 0 : batch_size) +
                               (ledger.is_exempt(oracle::QueryPhase::generator) ? 0 : batch_size);
  if (ledger.remaining() < needed) {
    throw BudgetError("query budget exhausted: " + std::to_string(ledger.remaining()) + " rows left, iteration needs " +
                          std::to_string(needed),
                      ledger.queries_used(), ledger.budget());
  }
  const auto xs = rng_uniform01<float>(rng, batch_size, oracle.input_dim());
  const auto z = rng_standard_normal<float>(rng, batch_size, noise_dim);
  const auto xg = generator.infer(z);
  const auto ys = oracle.query(xs, oracle::QueryPhase::surrogate);
  const auto yg = oracle.query(xg, oracle::QueryPhase::generator);
  const auto losses = surrogate_loss(surrogate, xs, ys, xg, yg, eq.k);
  optimizer.step(surrogate.parameters());
  return losses;
}

EquilibriumState update_k(const EquilibriumState& eq, double loss_xs, double loss_xg) {
  EquilibriumState next = eq;
  next.k = std::clamp(eq.k + eq.lambda_k * (eq.gamma_k * loss_xs - loss_xg), 0.0, 1.0);
  return next;
}

double generator_train_step(Mlp<float>& generator, Adam<float>& optimizer, const Mlp<float>& surrogate,
                            std::size_t target_label, std::size_t batch_size, Rng& rng) {
  const auto z = rng_standard_normal<float>(rng, batch_size, generator.input_dim());
  const double loss = generator_loss(generator, surrogate, z, target_label);
  optimizer.step(generator.parameters());
  return loss;
}

double compute_m_global(double loss_xs, double loss_xg, const EquilibriumState& eq, MGlobalMode mode) {
  const double balance = std::abs(eq.gamma_k * loss_xs - loss_xg);
  return mode == MGlobalMode::began ? loss_xs + balance : loss_xs - balance;
}

AttackResult run_attack(const AttackConfig& config, oracle::BlackBox& oracle, Rng& rng,
                        const ProgressCallback& progress) {
  config.validate();
  if (config.target_label >= oracle.num_classes()) {
    throw ConfigError("attack: target label " + std::to_string(config.target_label) + " but the target has " +
                      std::to_string(oracle.num_classes()) + " classes");
  }
  Rng init = rng.derive(Purpose::init);
  Rng loop = rng.derive(Purpose::attack);
  Mlp<float> generator = make_generator<float>(config.noise_dim, config.generator_hidden, oracle.input_dim(), init);
  Mlp<float> surrogate = make_surrogate<float>(oracle.input_dim(), config.surrogate_hidden, oracle.num_classes(), init);
  Adam<float> opt_g(config.optimizer);
  Adam<float> opt_s(config.optimizer);

  AttackResult result;
  result.best = {generator, surrogate, std::numeric_limits<double>::infinity(), 0, config.target_label};
  const std::uint64_t used_before = oracle.ledger().queries_used();
  EquilibriumState eq = config.equilibrium;
  for (std::size_t b = 0; b < config.total_batches; ++b) {
    SurrogateLosses ls;
    try {
      ls = surrogate_train_step(surrogate, opt_s, oracle, generator, eq, config.batch_size, config.noise_dim, loop);
    } catch (const BudgetError&) {
      result.budget_exhausted = true;
      break;
    }
    eq = update_k(eq, ls.loss_xs, ls.loss_xg);
    const double lg = generator_train_step(generator, opt_g, surrogate, config.target_label, config.batch_size, loop);
    const double m = compute_m_global(ls.loss_xs, ls.loss_xg, eq, config.m_global_mode);
    if (!std::isfinite(ls.loss) || !std::isfinite(lg) || !std::isfinite(m)) {
      throw TrainingError("attack diverged at batch " + std::to_string(b), 0, b);
    }
    const HistoryRow row{b, ls.loss, lg, eq.k, m};
    result.history.push_back(row);
    result.batches_run = b + 1;
    if (b % config.snapshot_every == 0 && m < result.best.best_m_global) {
      result.best.generator = generator;
      result.best.surrogate = surrogate;
      result.best.best_m_global = m;
      result.best.batch = b;
    }
    if (progress) progress(row);
  }
  result.queries_used = oracle.ledger().queries_used() - used_before;
  return result;
}

Tensor2D invert(const AttackSnapshot& snapshot, std::size_t n, Rng& rng) {
  return snapshot.generator.infer(rng_standard_normal<float>(rng, n, snapshot.generator.input_dim()));
}

namespace {

constexpr const char* kSnapshotKind = "attack_snapshot";

json describe(const Mlp<float>& net) {
  json acts = json::array();
  for (auto a : net.activations()) acts.push_back(to_string(a));
  return {{"widths", net.widths()}, {"activations", acts}};
}

void add_layers(ModelArchive& a, const std::string& prefix, const Mlp<float>& net) {
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    a.add(prefix + std::to_string(i) + ".weight", net.layers()[i].weights());
    a.add(prefix + std::to_string(i) + ".bias", net.layers()[i].bias());
  }
}

Mlp<float> read_layers(const ModelArchive& a, const std::string& prefix, const json& description) {
  std::vector<Activation> acts;
  for (const auto& name : description.at("activations")) acts.push_back(parse_activation(name.get<std::string>()));
  std::vector<DenseLayer<float>> layers;
  for (std::size_t i = 0; i < acts.size(); ++i) {
    layers.emplace_back(a.tensor(prefix + std::to_string(i) + ".weight"), a.tensor(prefix + std::to_string(i) + ".bias"));
  }
  Mlp<float> net(std::move(layers), std::move(acts));
  if (net.widths() != description.at("widths").get<std::vector<std::size_t>>()) {
    throw DataError(DataError::Kind::corrupt, "snapshot: stored widths disagree with tensors");
  }
  return net;
}

}  // namespace

ModelArchive snapshot_to_archive(const AttackSnapshot& s, const json& extra) {
  ModelArchive a;
  a.kind = kSnapshotKind;
  a.metadata = {{"best_m_global", std::isfinite(s.best_m_global) ? json(s.best_m_global) : json(nullptr)},
                {"batch", s.batch},
                {"target_label", s.target_label},
                {"generator", describe(s.generator)},
                {"surrogate", describe(s.surrogate)},
                {"extra", extra}};
  add_layers(a, "generator.", s.generator);
  add_layers(a, "surrogate.", s.surrogate);
  return a;
}

AttackSnapshot snapshot_from_archive(const ModelArchive& a) {
  if (a.kind != kSnapshotKind) {
    throw DataError(DataError::Kind::corrupt, "snapshot: archive kind '" + a.kind + "' is not an attack snapshot");
  }
  try {
    AttackSnapshot s;
    const auto& m = a.metadata;
    s.best_m_global = m.at("best_m_global").is_null() ? std::numeric_limits<double>::infinity()
                                                      : m.at("best_m_global").get<double>();
    s.batch = m.at("batch").get<std::size_t>();
    s.target_label = m.at("target_label").get<std::size_t>();
    s.generator = read_layers(a, "generator.", m.at("generator"));
    s.surrogate = read_layers(a, "surrogate.", m.at("surrogate"));
    return s;
  } catch (const json::exception& e) {
    throw DataError(DataError::Kind::corrupt, std::string("snapshot: bad metadata: ") + e.what());
  } catch (const DimensionError& e) {
    throw DataError(DataError::Kind::corrupt, std::string("snapshot: tensor shapes disagree: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(DataError::Kind::corrupt, std::string("snapshot: ") + e.what());
  }
}

void save_snapshot(const AttackSnapshot& snapshot, const std::filesystem::path& path, const json& extra) {
  save_archive(snapshot_to_archive(snapshot, extra), path);
}

AttackSnapshot load_snapshot(const std::filesystem::path& path) { return snapshot_from_archive(load_archive(path)); }

std::string history_csv(const std::vector<HistoryRow>& history) {
  std::string out = "batch,L_S,L_G,k_t,M_global\n";
  char line[160];
  for (const auto& r : history) {
    std::snprintf(line, sizeof line, "%zu,%.9g,%.9g,%.9g,%.9g\n", r.batch, r.loss_s, r.loss_g, r.k, r.m_global);
    out += line;
  }
  return out;
}

void write_history_csv(const std::vector<HistoryRow>& history, const std::filesystem::path& path) {
  write_file_atomic(path, history_csv(history));
}

#define SIB_INSTANTIATE(T)                                                                                    \
  template Mlp<T> make_generator(std::size_t, const std::vector<std::size_t>&, std::size_t, Rng&);            \
  template Mlp<T> make_surrogate(std::size_t, const std::vector<std::size_t>&, std::size_t, Rng&);            \
  template SurrogateLosses surrogate_loss(Mlp<T>&, const Matrix<T>&, const Matrix<T>&, const Matrix<T>&,     \
                                          const Matrix<T>&, double);                                          \
  template double generator_loss(Mlp<T>&, const Mlp<T>&, const Matrix<T>&, std::size_t);

SIB_INSTANTIATE(float)
SIB_INSTANTIATE(double)
#undef SIB_INSTANTIATE

}  // namespace sib::gamin
