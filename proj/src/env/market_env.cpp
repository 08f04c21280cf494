#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tinymadrl/env.hpp"
#include "tinymadrl/rng.hpp"

namespace tinymadrl::env {

void EnvConfig::Validate() const {
  if (history_length < 1) throw std::invalid_argument("EnvConfig: history_length must be >= 1");
  if (episode_length < history_length) {
    throw std::invalid_argument("EnvConfig: episode_length must be >= history_length");
  }
  for (double s : price_scale) {
    if (!(s > 0.0)) throw std::invalid_argument("EnvConfig: price_scale entries must be > 0");
  }
}

double DefaultDemandScale(const game::GameInstance& instance) {
  double delta_max = 0.0;
  double threshold_min = 1.0;
  double cost_min = instance.cost(0);
  for (const auto& u : instance.uavs()) {
    delta_max = std::max(delta_max, u.delta);
    threshold_min = std::min(threshold_min, u.ssim_threshold);
  }
  for (std::size_t j = 0; j < instance.num_rsus(); ++j) {
    cost_min = std::min(cost_min, instance.cost(j));
  }
  return delta_max * std::log(1.0 / threshold_min) / cost_min;
}

MarketEnv::MarketEnv(game::GameInstance instance, EnvConfig config)
    : instance_(std::move(instance)), config_(std::move(config)) {
  config_.Validate();
  const std::size_t J = instance_.num_rsus();
  if (config_.price_scale.empty()) {
    price_scale_.resize(J);
    for (std::size_t j = 0; j < J; ++j) price_scale_[j] = instance_.cap(j);
  } else if (config_.price_scale.size() == J) {
    price_scale_ = config_.price_scale;
  } else {
    throw std::invalid_argument("EnvConfig: price_scale needs one entry per RSU");
  }
  demand_scale_ = config_.demand_scale > 0.0 ? config_.demand_scale
                                             : DefaultDemandScale(instance_);
}

void MarketEnv::Push(Record record) {
  history_.push_back(std::move(record));
  while (history_.size() > static_cast<std::size_t>(config_.history_length)) {
    history_.pop_front();
  }
}

std::vector<Observation> MarketEnv::Reset(std::uint64_t seed) {
  history_.clear();
  steps_ = 0;
  demand_clipped_ = false;
  if (config_.warmup == WarmupPolicy::kUniformRandom) {
    Rng rng = MakeRng(seed, "env-warmup");
    for (int k = 0; k < config_.history_length; ++k) {
      game::Matrix prices(instance_.num_rsus(), instance_.num_uavs());
      for (std::size_t j = 0; j < prices.rows(); ++j) {
        for (auto& p : prices.row(j)) p = Uniform(rng, instance_.cost(j), instance_.cap(j));
      }
      game::PriceMatrix pm(instance_, prices);
      auto demands = game::AllFollowersRespond(instance_, pm, Execution::kSerial);
      Push({std::move(prices), demands.matrix()});
    }
  }
  return Observations();
}

std::vector<Observation> MarketEnv::Observations() const {
  const std::size_t I = instance_.num_uavs();
  const std::size_t L = static_cast<std::size_t>(config_.history_length);
  std::vector<Observation> obs(num_agents(), Observation(observation_size(), 0.0));
  const std::size_t pad = L - history_.size();
  for (std::size_t j = 0; j < num_agents(); ++j) {
    for (std::size_t k = 0; k < history_.size(); ++k) {
      const Record& r = history_[k];
      double* slot = obs[j].data() + (pad + k) * 2 * I;
      for (std::size_t i = 0; i < I; ++i) {
        slot[i] = r.prices(j, i) / price_scale_[j];
        slot[I + i] = std::min(1.0, r.demands(i, j) / demand_scale_);
      }
    }
  }
  return obs;
}

StepOutcome MarketEnv::Step(const std::vector<std::vector<double>>& joint_prices) {
  if (steps_ >= config_.episode_length) {
    throw std::logic_error("MarketEnv::Step called after the episode ended");
  }
  const std::size_t J = instance_.num_rsus();
  const std::size_t I = instance_.num_uavs();
  if (joint_prices.size() != J) {
    throw std::invalid_argument("MarketEnv::Step: expected one price row per RSU");
  }
  game::Matrix raw(J, I);
  for (std::size_t j = 0; j < J; ++j) {
    if (joint_prices[j].size() != I) {
      throw std::invalid_argument("MarketEnv::Step: price row length must equal I");
    }
    std::copy(joint_prices[j].begin(), joint_prices[j].end(), raw.row(j).begin());
  }
  auto prices = game::PriceMatrix::Clamped(instance_, std::move(raw));
  auto demands = game::AllFollowersRespond(instance_, prices, Execution::kSerial);

  std::vector<double> rewards(J);
  for (std::size_t j = 0; j < J; ++j) {
    rewards[j] = game::RsuUtility(instance_, j, prices.rsu_row(j), demands.rsu_column(j));
  }
  for (double b : demands.matrix().data()) {
    if (b > demand_scale_) demand_clipped_ = true;
  }
  Push({prices.matrix(), demands.matrix()});
  ++steps_;
  return StepOutcome{Observations(), std::move(rewards), std::move(prices),
                     std::move(demands), steps_ >= config_.episode_length};
}

Baseline TheoreticalBaseline(const game::GameInstance& instance) {
  const auto sol = game::SolveEquilibrium(instance, {}, Execution::kSerial);
  return Baseline{sol.AverageRsuUtility(), sol.consistent};
}

}  // namespace tinymadrl::env
