#include <stdexcept>
#include <vector>

#include "tinymadrl/game.hpp"

namespace tinymadrl::game {

// Water-filling over the KKT system. Slack budget: each RSU is bought
// independently at delta S / p - 1/q. Binding budget: a common multiplier
// lambda scales every marginal price; coordinates whose demand would be
// non-positive leave the support and lambda is recomputed. Removal only
// ever raises lambda, so dropping all non-positive coordinates at once is
// exact.
FollowerSolution FollowerBestResponse(const GameInstance& instance,
                                      std::size_t uav,
                                      std::span<const double> price_row) {
  const std::size_t J = instance.num_rsus();
  if (price_row.size() != J) {
    throw std::invalid_argument("FollowerBestResponse: price row length != J");
  }
  const UavProfile& u = instance.uav(uav);

  FollowerSolution sol;
  sol.demands.assign(J, 0.0);

  double spend = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    const double s = instance.s(uav, j);
    const double q = instance.q(j);
    const double p = price_row[j];
    if (s > 0.0 && p < u.delta * q * s) {
      sol.demands[j] = u.delta * s / p - 1.0 / q;
      spend += p * sol.demands[j];
    }
  }
  if (spend <= u.budget) {
    for (std::size_t j = 0; j < J; ++j) {
      if (sol.demands[j] > 0.0) sol.support.push_back(j);
    }
    return sol;
  }

  sol.case_label = BudgetCase::kActive;
  std::vector<std::size_t> support;
  for (std::size_t j = 0; j < J; ++j) {
    if (instance.s(uav, j) > 0.0) support.push_back(j);
  }
  std::vector<double> b(J, 0.0);
  double lambda = 0.0;
  while (!support.empty()) {
    double sum_s = 0.0;
    double sum_pq = 0.0;
    for (std::size_t j : support) {
      sum_s += instance.s(uav, j);
      sum_pq += price_row[j] / instance.q(j);
    }
    lambda = u.delta * sum_s / (u.budget + sum_pq) - 1.0;
    std::vector<std::size_t> kept;
    for (std::size_t j : support) {
      b[j] = u.delta * instance.s(uav, j) / (price_row[j] * (1.0 + lambda)) -
             1.0 / instance.q(j);
      if (b[j] > 0.0) kept.push_back(j);
    }
    if (kept.size() == support.size()) break;
    support = std::move(kept);
  }

  sol.demands.assign(J, 0.0);
  if (support.empty()) {
    sol.case_label = BudgetCase::kInactive;
    sol.degenerate = true;
    return sol;
  }
  for (std::size_t j : support) sol.demands[j] = b[j];
  sol.lambda = lambda;
  sol.support = std::move(support);
  return sol;
}

DemandMatrix AllFollowersRespond(const GameInstance& instance,
                                 const PriceMatrix& prices, Execution exec) {
  const std::size_t I = instance.num_uavs();
  Matrix demands(I, instance.num_rsus());
  ParallelFor(I, exec, [&](std::size_t i) {
    const auto row = prices.uav_row(i);
    const auto sol = FollowerBestResponse(instance, i, row);
    auto out = demands.row(i);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = sol.demands[j];
  });
  return DemandMatrix(std::move(demands));
}

}  // namespace tinymadrl::game
