#include <limits>
#include <stdexcept>

#include "tinymadrl/agents.hpp"

namespace tinymadrl::agents {

GreedyAgent::GreedyAgent(std::vector<PriceBox> boxes, GreedyConfig config)
    : boxes_(std::move(boxes)), config_(config) {
  if (config_.levels < 1) throw std::invalid_argument("GreedyConfig: levels must be >= 1");
  if (!(config_.epsilon >= 0.0 && config_.epsilon <= 1.0)) {
    throw std::invalid_argument("GreedyConfig: epsilon must lie in [0, 1]");
  }
  means_.assign(boxes_.size(), std::vector<double>(config_.levels, 0.0));
  pulls_.assign(boxes_.size(), std::vector<int>(config_.levels, 0));
  last_levels_.assign(boxes_.size(), 0);
}

double GreedyAgent::LevelPrice(std::size_t uav, int level) const {
  const PriceBox& box = boxes_.at(uav);
  return box.low + (level + 0.5) * box.width() / config_.levels;
}

double GreedyAgent::RunningMean(std::size_t uav, int level) const {
  return means_.at(uav).at(level);
}

int GreedyAgent::Pulls(std::size_t uav, int level) const { return pulls_.at(uav).at(level); }

std::vector<double> GreedyAgent::Act(Rng& rng) {
  std::uniform_int_distribution<int> pick(0, config_.levels - 1);
  std::vector<double> prices(boxes_.size());
  for (std::size_t i = 0; i < boxes_.size(); ++i) {
    // Draw the explore coin first so the stream does not depend on history.
    const double coin = Uniform(rng, 0.0, 1.0);
    const int random_level = pick(rng);
    int best = -1;
    double best_mean = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < config_.levels; ++k) {
      if (pulls_[i][k] > 0 && means_[i][k] > best_mean) {
        best_mean = means_[i][k];
        best = k;
      }
    }
    const int level = (best < 0 || coin < config_.epsilon) ? random_level : best;
    last_levels_[i] = level;
    prices[i] = LevelPrice(i, level);
  }
  return prices;
}

void GreedyAgent::Observe(std::span<const double> contributions) {
  if (contributions.size() != boxes_.size()) {
    throw std::invalid_argument("GreedyAgent::Observe: one contribution per UAV expected");
  }
  for (std::size_t i = 0; i < boxes_.size(); ++i) {
    const int k = last_levels_[i];
    const int n = ++pulls_[i][k];
    means_[i][k] += (contributions[i] - means_[i][k]) / n;
  }
}

std::vector<double> RandomAct(Rng& rng, std::span<const PriceBox> boxes) {
  std::vector<double> prices(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    prices[i] = Uniform(rng, boxes[i].low, boxes[i].high);
  }
  return prices;
}

}  // namespace tinymadrl::agents
