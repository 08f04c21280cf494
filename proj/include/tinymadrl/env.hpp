#ifndef TINYMADRL_ENV_HPP_
#define TINYMADRL_ENV_HPP_

#include <cstdint>
#include <deque>
#include <vector>

#include "tinymadrl/game.hpp"

namespace tinymadrl::env {

enum class WarmupPolicy { kZeros, kUniformRandom };

struct EnvConfig {
  int history_length = 4;  // L
  int episode_length = 25;
  // Per-RSU price normalizer; empty means each RSU's price cap.
  std::vector<double> price_scale;
  // Demand normalizer; <= 0 means DefaultDemandScale(instance).
  double demand_scale = 0.0;
  WarmupPolicy warmup = WarmupPolicy::kUniformRandom;

  void Validate() const;
};

// delta_max * ln(1 / min SSIM threshold) / c_min, an upper bound on any
// slack-budget demand.
double DefaultDemandScale(const game::GameInstance& instance);

// 2 * I * L values in [0, 1]: the L latest (price row, demand column) pairs
// of one RSU, oldest first, zero-padded at the front.
using Observation = std::vector<double>;

struct StepOutcome {
  std::vector<Observation> next_observations;
  std::vector<double> rewards;  // V_j for the submitted prices
  game::PriceMatrix prices;     // after clamping into the boxes
  game::DemandMatrix demands;
  bool done = false;
};

// Each RSU is an agent whose action is its price row (one price per UAV).
// Followers answer with exact best responses; the reward is the RSU utility.
// Deterministic given (instance, config, seed, actions).
class MarketEnv {
 public:
  MarketEnv(game::GameInstance instance, EnvConfig config);

  std::vector<Observation> Reset(std::uint64_t seed);
  // joint_prices[j] is RSU j's length-I price row. Out-of-box prices are
  // clamped. Throws std::logic_error after the episode is done.
  StepOutcome Step(const std::vector<std::vector<double>>& joint_prices);

  std::vector<Observation> Observations() const;

  std::size_t num_agents() const { return instance_.num_rsus(); }
  std::size_t action_size() const { return instance_.num_uavs(); }
  std::size_t observation_size() const {
    return 2 * instance_.num_uavs() * static_cast<std::size_t>(config_.history_length);
  }
  std::size_t history_records() const { return history_.size(); }
  int steps_taken() const { return steps_; }
  bool demand_clipped() const { return demand_clipped_; }
  double demand_scale() const { return demand_scale_; }
  const game::GameInstance& instance() const { return instance_; }
  const EnvConfig& config() const { return config_; }

 private:
  struct Record {
    game::Matrix prices;   // J x I
    game::Matrix demands;  // I x J
  };

  void Push(Record record);

  game::GameInstance instance_;
  EnvConfig config_;
  std::vector<double> price_scale_;
  double demand_scale_ = 1.0;
  std::deque<Record> history_;
  int steps_ = 0;
  bool demand_clipped_ = false;
};

struct Baseline {
  double value = 0.0;
  bool consistent = true;  // false: the equilibrium was flagged by the solver
};

// Mean RSU utility at the analytic equilibrium.
Baseline TheoreticalBaseline(const game::GameInstance& instance);

}  // namespace tinymadrl::env

#endif  // TINYMADRL_ENV_HPP_
