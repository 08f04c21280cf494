#ifndef TINYMADRL_AGENTS_HPP_
#define TINYMADRL_AGENTS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tinymadrl/env.hpp"
#include "tinymadrl/nn.hpp"
#include "tinymadrl/rng.hpp"

namespace tinymadrl::agents {

struct PriceBox {
  double low = 0.0;   // bandwidth cost
  double high = 1.0;  // price cap
  double width() const { return high - low; }
};

// One RSU's price box repeated for each of its num_uavs customers.
std::vector<PriceBox> BoxesForRsu(const game::GameInstance& instance, std::size_t rsu);

// ---- optimizer -------------------------------------------------------------

enum class OptimizerKind { kSgd, kAdam };
std::string ToString(OptimizerKind k);
OptimizerKind OptimizerFromString(const std::string& name);

// Gradient descent on a PrunableMlp: plain SGD or Adam.
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerKind kind, double learning_rate, const nn::PrunableMlp& net);

  // net -= learning_rate * direction(grads)
  void Step(nn::PrunableMlp& net, const nn::Gradients& grads);
  // Drop moment entries of removed neurons after compaction.
  void Reset(const nn::PrunableMlp& net);

  OptimizerKind kind() const { return kind_; }
  double learning_rate() const { return learning_rate_; }

  nlohmann::json ToJson() const;
  static Optimizer FromJson(const nlohmann::json& j);

  bool operator==(const Optimizer&) const = default;

 private:
  OptimizerKind kind_ = OptimizerKind::kAdam;
  double learning_rate_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double epsilon_ = 1e-8;
  long steps_ = 0;
  nn::Gradients first_;
  nn::Gradients second_;
};

// ---- PPO -------------------------------------------------------------------

struct PpoConfig {
  double discount = 0.5;
  double clip = 0.2;
  double actor_lr = 3e-3;
  double critic_lr = 3e-3;
  int rollout_size = 50;  // D: records collected before each update
  int update_epochs = 8;
  int minibatch_size = 25;
  // Exploration std as a fraction of the price box, annealed linearly.
  double policy_std_start = 0.3;
  double policy_std_end = 0.05;
  std::vector<std::size_t> hidden_sizes{64, 64};
  bool use_bias = true;
  bool normalize_advantages = true;
  double max_grad_norm = 0.5;  // <= 0 disables clipping
  OptimizerKind optimizer = OptimizerKind::kAdam;

  void Validate() const;
};

struct RolloutRecord {
  env::Observation observation;
  std::vector<double> action;  // unclamped sample in normalized units
  double log_prob = 0.0;
  double policy_std = 0.0;  // exploration std at collection time
  double reward = 0.0;      // raw RSU utility
  double value = 0.0;       // critic estimate at collection time
  bool episode_end = false;
};

// On-policy buffer, emptied by every update.
class RolloutBuffer {
 public:
  explicit RolloutBuffer(std::size_t capacity = 0) : capacity_(capacity) {}
  void Push(RolloutRecord record) { records_.push_back(std::move(record)); }
  bool full() const { return records_.size() >= capacity_; }
  std::size_t size() const { return records_.size(); }
  std::size_t capacity() const { return capacity_; }
  void Clear() { records_.clear(); }
  const std::vector<RolloutRecord>& records() const { return records_; }

 private:
  std::size_t capacity_;
  std::vector<RolloutRecord> records_;
};

struct Advantages {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Monte-Carlo returns, cut at episode ends (and at the end of the buffer),
// advantage = return - value estimate. reward_scale divides every reward.
Advantages ComputeAdvantages(std::span<const RolloutRecord> records,
                             double discount, bool normalize,
                             double reward_scale = 1.0);

// Clipped importance ratio: 1 + clip above, 1 - clip below, f in between.
double ClipRatio(double ratio, double clip);
// min(f A, ClipRatio(f) A)
double ClippedSurrogate(double ratio, double advantage, double clip);

struct ActResult {
  std::vector<double> prices;  // inside the boxes
  std::vector<double> action;  // raw normalized sample
  double log_prob = 0.0;
  double value = 0.0;
  double policy_std = 0.0;
};

struct UpdateDiagnostics {
  double actor_objective = 0.0;
  double critic_loss = 0.0;
  double first_epoch_max_ratio_error = 0.0;  // max |f - 1| on the first pass
  double clip_fraction = 0.0;
  bool aborted = false;
  std::string message;
};

class PpoAgent {
 public:
  PpoAgent(std::size_t observation_size, std::vector<PriceBox> boxes,
           PpoConfig config, std::uint64_t seed);

  // Samples a price row. Uses only `rng` for randomness.
  ActResult Act(const env::Observation& observation, Rng& rng) const;
  // Squashed mean of the policy mapped into the boxes.
  std::vector<double> MeanPrices(const env::Observation& observation) const;

  void Record(const env::Observation& observation, const ActResult& act,
              double reward, bool episode_end);
  bool ReadyToUpdate() const { return buffer_.full(); }
  UpdateDiagnostics Update();

  // Training progress in [0, 1]; drives the exploration std schedule.
  void SetProgress(double fraction);
  double policy_std() const { return policy_std_; }

  const nn::PrunableMlp& actor() const { return actor_; }
  nn::PrunableMlp& mutable_actor() { return actor_; }
  const nn::PrunableMlp& critic() const { return critic_; }
  nn::PrunableMlp& mutable_critic() { return critic_; }
  const PpoConfig& config() const { return config_; }
  const std::vector<PriceBox>& boxes() const { return boxes_; }
  const RolloutBuffer& buffer() const { return buffer_; }
  double reward_scale() const { return reward_scale_; }

  // Replaces the actor by its compacted form and resets its optimizer.
  void CompactActor();

  nlohmann::json Checkpoint() const;
  void Restore(const nlohmann::json& j);

 private:
  std::vector<double> Squash(std::span<const double> logits) const;
  std::vector<double> ToPrices(std::span<const double> action) const;

  PpoConfig config_;
  std::vector<PriceBox> boxes_;
  nn::PrunableMlp actor_;
  nn::PrunableMlp critic_;
  Optimizer actor_opt_;
  Optimizer critic_opt_;
  RolloutBuffer buffer_;
  Rng shuffle_rng_;
  double policy_std_;
  double reward_scale_ = 0.0;  // running max |reward|
};

// ---- Tiny MADRL ------------------------------------------------------------

struct SparsityReport {
  int epoch = 0;
  bool updated = false;         // PPO update ran
  bool masks_updated = false;
  bool compacted = false;
  double scheduled_sparsity = 0.0;
  double achieved_sparsity = 0.0;
  double threshold = 0.0;
  std::size_t active_hidden_neurons = 0;
  std::size_t actor_parameters = 0;  // reachable through active neurons
  UpdateDiagnostics diagnostics;
};

// PPO whose actor is gradually pruned with a cubic schedule and compacted
// once the final epoch is reached. The critic is never pruned.
class TinyMadrlAgent {
 public:
  TinyMadrlAgent(std::size_t observation_size, std::vector<PriceBox> boxes,
                 PpoConfig config, nn::PruneSchedule schedule,
                 std::size_t floor_neurons, int final_epoch, std::uint64_t seed);

  ActResult Act(const env::Observation& observation, Rng& rng) const {
    return ppo_.Act(observation, rng);
  }
  void Record(const env::Observation& observation, const ActResult& act,
              double reward, bool episode_end) {
    ppo_.Record(observation, act, reward, episode_end);
  }
  void SetProgress(double fraction) { ppo_.SetProgress(fraction); }

  // One pass of the pruning loop: update if the buffer is full, then (on
  // schedule) recompute importance and masks; compact at final_epoch.
  SparsityReport Step(int epoch);

  const PpoAgent& ppo() const { return ppo_; }
  PpoAgent& mutable_ppo() { return ppo_; }
  const nn::PruneSchedule& schedule() const { return schedule_; }
  bool compacted() const { return compacted_; }

 private:
  PpoAgent ppo_;
  nn::PruneSchedule schedule_;
  std::size_t floor_neurons_;
  int final_epoch_;
  std::size_t original_hidden_ = 0;
  bool compacted_ = false;
};

// ---- baselines -------------------------------------------------------------

struct GreedyConfig {
  int levels = 16;
  double epsilon = 0.1;
};

// Epsilon-greedy bandit per UAV over a fixed price ladder. Learns only from
// the RSU's own revenue per customer.
class GreedyAgent {
 public:
  GreedyAgent(std::vector<PriceBox> boxes, GreedyConfig config);

  std::vector<double> Act(Rng& rng);
  // Per-UAV revenue (p_i - c) b_i earned by the last Act.
  void Observe(std::span<const double> contributions);

  double LevelPrice(std::size_t uav, int level) const;
  double RunningMean(std::size_t uav, int level) const;
  int Pulls(std::size_t uav, int level) const;
  const std::vector<int>& last_levels() const { return last_levels_; }

 private:
  std::vector<PriceBox> boxes_;
  GreedyConfig config_;
  std::vector<std::vector<double>> means_;
  std::vector<std::vector<int>> pulls_;
  std::vector<int> last_levels_;
};

std::vector<double> RandomAct(Rng& rng, std::span<const PriceBox> boxes);

}  // namespace tinymadrl::agents

#endif  // TINYMADRL_AGENTS_HPP_
