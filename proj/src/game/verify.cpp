#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "tinymadrl/game.hpp"
#include "tinymadrl/rng.hpp"

namespace tinymadrl::game {
namespace {

constexpr double kScaleFloor = 1e-9;

double RelativeGain(double baseline, double probe) {
  return (probe - baseline) / std::max(std::abs(baseline), kScaleFloor);
}

// Seller j's utility when only its own price row changes.
double RsuUtilityAfterDeviation(const GameInstance& instance, std::size_t j,
                                const PriceMatrix& prices,
                                std::span<const double> new_row) {
  double total = 0.0;
  for (std::size_t i = 0; i < instance.num_uavs(); ++i) {
    auto row = prices.uav_row(i);
    row[j] = new_row[i];
    const auto response = FollowerBestResponse(instance, i, row);
    total += (new_row[i] - instance.cost(j)) * response.demands[j];
  }
  return total;
}

}  // namespace

VerificationReport VerifyEquilibrium(const GameInstance& instance,
                                     const EquilibriumSolution& solution,
                                     std::size_t num_probes, std::uint64_t seed,
                                     double tolerance, Execution exec) {
  const std::size_t I = instance.num_uavs();
  const std::size_t J = instance.num_rsus();
  VerificationReport report;
  report.probes_per_player = num_probes;
  report.tolerance = tolerance;

  std::vector<std::optional<Violation>> rsu_worst(J);
  std::vector<double> rsu_gain(J, 0.0);
  ParallelFor(J, exec, [&](std::size_t j) {
    Rng rng = MakeRng(seed, "verify-rsu", j);
    const auto base_row = solution.prices.rsu_row(j);
    const double baseline = solution.rsu_utilities[j];
    double best = -std::numeric_limits<double>::infinity();
    double best_value = baseline;
    std::vector<double> row(base_row.begin(), base_row.end());
    for (std::size_t k = 0; k < num_probes; ++k) {
      std::copy(base_row.begin(), base_row.end(), row.begin());
      if (k % 2 == 0) {
        const std::size_t i = std::uniform_int_distribution<std::size_t>(0, I - 1)(rng);
        row[i] = Uniform(rng, instance.cost(j), instance.cap(j));
      } else {
        for (auto& p : row) p = Uniform(rng, instance.cost(j), instance.cap(j));
      }
      const double value = RsuUtilityAfterDeviation(instance, j, solution.prices, row);
      const double gain = RelativeGain(baseline, value);
      if (gain > best) {
        best = gain;
        best_value = value;
      }
    }
    rsu_gain[j] = std::max(0.0, best);
    if (best > tolerance) {
      rsu_worst[j] = Violation{Violation::Player::kRsu, j, baseline, best_value, best};
    }
  });

  std::vector<std::optional<Violation>> uav_worst(I);
  std::vector<double> uav_gain(I, 0.0);
  ParallelFor(I, exec, [&](std::size_t i) {
    Rng rng = MakeRng(seed, "verify-uav", i);
    const auto prices = solution.prices.uav_row(i);
    const double budget = instance.uav(i).budget;
    const double baseline = solution.uav_utilities[i];
    double best = -std::numeric_limits<double>::infinity();
    double best_value = baseline;
    std::vector<double> demand(J), weight(J);
    for (std::size_t k = 0; k < num_probes; ++k) {
      double weight_sum = 0.0;
      for (auto& w : weight) {
        w = Uniform(rng, 0.0, 1.0);
        weight_sum += w;
      }
      if (k % 2 == 1) {
        // concentrate on one seller
        const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, J - 1)(rng);
        std::fill(weight.begin(), weight.end(), 0.0);
        weight[pick] = weight_sum = 1.0;
      }
      const double spend = Uniform(rng, 0.0, budget);
      for (std::size_t j = 0; j < J; ++j) {
        demand[j] = spend * weight[j] / (weight_sum * prices[j]);
      }
      const double value = UavUtility(instance, i, demand, prices);
      const double gain = RelativeGain(baseline, value);
      if (gain > best) {
        best = gain;
        best_value = value;
      }
    }
    uav_gain[i] = std::max(0.0, best);
    if (best > tolerance) {
      uav_worst[i] = Violation{Violation::Player::kUav, i, baseline, best_value, best};
    }
  });

  for (const auto& v : rsu_worst) {
    if (v) report.violations.push_back(*v);
  }
  for (const auto& v : uav_worst) {
    if (v) report.violations.push_back(*v);
  }
  if (J > 0) report.max_rsu_gain = *std::max_element(rsu_gain.begin(), rsu_gain.end());
  if (I > 0) report.max_uav_gain = *std::max_element(uav_gain.begin(), uav_gain.end());
  return report;
}

}  // namespace tinymadrl::game
