#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <vector>

#include "sib/numcore/adam.hpp"
#include "sib/numcore/archive.hpp"
#include "sib/numcore/mlp.hpp"
#include "sib/oracle/black_box.hpp"

namespace sib::gamin {

enum class MGlobalMode { began, as_written };

std::string to_string(MGlobalMode mode);
MGlobalMode parse_m_global_mode(const std::string& name);

struct EquilibriumState {
  double k = 0.0;
  double lambda_k = 0.001;
  double gamma_k = 0.5;
};

struct AttackConfig {
  std::size_t target_label = 0;
  std::size_t batch_size = 64;
  std::size_t total_batches = 10'000;
  std::size_t noise_dim = 100;
  std::vector<std::size_t> generator_hidden{512, 1024};
  std::vector<std::size_t> surrogate_hidden{512, 256};
  AdamConfig optimizer{.learning_rate = 5e-4, .beta1 = 0.5};
  EquilibriumState equilibrium;
  MGlobalMode m_global_mode = MGlobalMode::began;
  std::uint64_t seed = 0;
  // M_global is checked every `snapshot_every` batches.
  std::size_t snapshot_every = 1;

  void validate() const;
  // Oracle rows one iteration charges when `exempt_surrogate` says whether
  // X_S batches are free.
  std::uint64_t queries_per_batch(bool exempt_surrogate = false) const;
};

nlohmann::json to_json(const AttackConfig& config);
AttackConfig attack_config_from_json(const nlohmann::json& j);

// noise → hidden (ReLU) → d (sigmoid): outputs lie in [0, 1] by construction.
template <class T>
Mlp<T> make_generator(std::size_t noise_dim, const std::vector<std::size_t>& hidden, std::size_t image_dim, Rng& rng);

// d → hidden (ReLU) → k logits; softmax is applied by the losses.
template <class T>
Mlp<T> make_surrogate(std::size_t image_dim, const std::vector<std::size_t>& hidden, std::size_t classes, Rng& rng);

struct SurrogateLosses {
  double loss = 0.0;     // L_S = L_H(X_S, Y_S) − k·L_H(X_G, Y_G)
  double loss_xs = 0.0;  // L_H(X_S, Y_S)
  double loss_xg = 0.0;  // L_H(X_G, Y_G)
};

// L_S for fixed batches; accumulates dL_S/dθ into the surrogate's gradients
// (zeroed first). L_H is batch-mean softmax cross-entropy against soft targets.
template <class T>
SurrogateLosses surrogate_loss(Mlp<T>& surrogate, const Matrix<T>& xs, const Matrix<T>& ys, const Matrix<T>& xg,
                               const Matrix<T>& yg, double k);

// L_G = L_H(S(G(z)), y_t); accumulates dL_G/dθ_G into the generator's
// gradients (zeroed first). The surrogate is only read.
template <class T>
double generator_loss(Mlp<T>& generator, const Mlp<T>& surrogate, const Matrix<T>& z, std::size_t target_label);

// Draws X_S ~ U[0,1]^d and X_G = G(Z), queries both, then one optimizer step
// on S. Budget errors propagate before any parameter changes.
SurrogateLosses surrogate_train_step(Mlp<float>& surrogate, Adam<float>& optimizer, oracle::BlackBox& oracle,
                                     const Mlp<float>& generator, const EquilibriumState& eq,
                                     std::size_t batch_size, std::size_t noise_dim, Rng& rng);

// k ← clamp(k + λ_k·(γ_k·L_H(X_S) − L_H(X_G)), 0, 1)
EquilibriumState update_k(const EquilibriumState& eq, double loss_xs, double loss_xg);

// One optimizer step on G; no oracle queries.
double generator_train_step(Mlp<float>& generator, Adam<float>& optimizer, const Mlp<float>& surrogate,
                            std::size_t target_label, std::size_t batch_size, Rng& rng);

// began:      L_H(X_S) + |γ_k·L_H(X_S) − L_H(X_G)|
// as_written: L_H(X_S) − |γ_k·L_H(X_S) − L_H(X_G)|
double compute_m_global(double loss_xs, double loss_xg, const EquilibriumState& eq, MGlobalMode mode);

struct HistoryRow {
  std::size_t batch = 0;
  double loss_s = 0.0;
  double loss_g = 0.0;
  double k = 0.0;
  double m_global = 0.0;
};

struct AttackSnapshot {
  Mlp<float> generator;
  Mlp<float> surrogate;
  double best_m_global = std::numeric_limits<double>::infinity();
  std::size_t batch = 0;
  std::size_t target_label = 0;
};

struct AttackResult {
  AttackSnapshot best;
  std::vector<HistoryRow> history;
  std::size_t batches_run = 0;
  bool budget_exhausted = false;
  std::uint64_t queries_used = 0;
};

using ProgressCallback = std::function<void(const HistoryRow&)>;

// The full loop: surrogate step → update_k → generator step → M_global →
// snapshot on a new minimum. Stops early, keeping the best snapshot, if the
// oracle runs out of budget.
AttackResult run_attack(const AttackConfig& config, oracle::BlackBox& oracle, Rng& rng,
                        const ProgressCallback& progress = {});

// n generator samples from N(0, 1) noise.
Tensor2D invert(const AttackSnapshot& snapshot, std::size_t n, Rng& rng);

ModelArchive snapshot_to_archive(const AttackSnapshot& snapshot, const nlohmann::json& extra = nlohmann::json::object());
AttackSnapshot snapshot_from_archive(const ModelArchive& archive);
void save_snapshot(const AttackSnapshot& snapshot, const std::filesystem::path& path,
                   const nlohmann::json& extra = nlohmann::json::object());
AttackSnapshot load_snapshot(const std::filesystem::path& path);

// Columns: batch,L_S,L_G,k_t,M_global
std::string history_csv(const std::vector<HistoryRow>& history);
void write_history_csv(const std::vector<HistoryRow>& history, const std::filesystem::path& path);

}  // namespace sib::gamin
