#include <algorithm>
#include <cmath>
#include <numeric>

#include "tinymadrl/game.hpp"

namespace tinymadrl::game {
namespace {

double SellerRevenue(const GameInstance& instance,
                     std::span<const double> prices,
                     std::span<const double> demands) {
  double total = 0.0;
  for (std::size_t j = 0; j < prices.size(); ++j) {
    total += (prices[j] - instance.cost(j)) * demands[j];
  }
  return total;
}

double Spend(std::span<const double> prices, std::span<const double> demands) {
  double total = 0.0;
  for (std::size_t j = 0; j < prices.size(); ++j) total += prices[j] * demands[j];
  return total;
}

}  // namespace

double EquilibriumSolution::AverageRsuUtility() const {
  if (rsu_utilities.empty()) return 0.0;
  return std::accumulate(rsu_utilities.begin(), rsu_utilities.end(), 0.0) /
         static_cast<double>(rsu_utilities.size());
}

// Each RSU's utility is a sum of per-UAV terms and UAV i's demand depends
// only on the prices posted to UAV i, so the leader subgame splits into one
// J-player pricing game per UAV.
UavEquilibrium SolveUavSubgame(const GameInstance& instance, std::size_t uav,
                               const SolverOptions& options) {
  const std::size_t J = instance.num_rsus();
  const double budget = instance.uav(uav).budget;

  UavEquilibrium out;
  std::vector<double> slack(J);
  bool any_surplus = false;
  for (std::size_t j = 0; j < J; ++j) {
    const auto p = LeaderUnconstrainedPrice(instance, j, uav);
    slack[j] = p ? std::clamp(*p, instance.cost(j), instance.cap(j))
                 : instance.cost(j);
    any_surplus = any_surplus || p.has_value();
  }
  const FollowerSolution at_slack = FollowerBestResponse(instance, uav, slack);
  if (!any_surplus) {
    out.prices = std::move(slack);
    out.diagnostic = "no RSU offers positive log-quality";
    return out;
  }
  if (at_slack.case_label == BudgetCase::kInactive && !at_slack.degenerate) {
    out.prices = std::move(slack);
    return out;
  }

  std::vector<double> p = slack;
  double residual = 0.0;
  int it = 0;
  while (it < options.max_iterations) {
    ++it;
    auto next = LeaderBestResponseMap(instance, uav, p);
    residual = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      residual = std::max(residual, std::abs(next[j] - p[j]));
    }
    p = std::move(next);
    if (residual < options.tolerance) break;
  }
  out.iterations = it;
  out.residual = residual;

  // The active-branch fixed point is valid only if the buyer's budget binds
  // there. A lone seller may sit exactly on the kink, where lambda = 0 and
  // the budget binds at once.
  const FollowerSolution at_fixed = FollowerBestResponse(instance, uav, p);
  const bool converged = residual < options.tolerance;
  const bool binds =
      std::abs(Spend(p, at_fixed.demands) - budget) <= 1e-8 * std::max(1.0, budget);
  if (converged && binds) {
    out.prices = std::move(p);
    out.case_label = BudgetCase::kActive;
    return out;
  }

  // Neither regime is self-consistent: keep the candidate with the larger
  // total seller revenue and flag it.
  const double rev_slack = SellerRevenue(instance, slack, at_slack.demands);
  const double rev_fixed = SellerRevenue(instance, p, at_fixed.demands);
  out.consistent = false;
  if (!converged) {
    out.diagnostic = "fixed-point iteration hit max_iterations (residual " +
                     std::to_string(residual) + ")";
  } else {
    out.diagnostic =
        "mixed regime: slack-budget prices make the budget bind, fixed-point "
        "prices leave it slack";
  }
  if (rev_fixed >= rev_slack) {
    out.prices = std::move(p);
    out.case_label = at_fixed.case_label;
  } else {
    out.prices = std::move(slack);
    out.case_label = at_slack.case_label;
  }
  return out;
}

EquilibriumSolution EvaluatePrices(const GameInstance& instance,
                                   const PriceMatrix& prices, Execution exec) {
  const std::size_t I = instance.num_uavs();
  const std::size_t J = instance.num_rsus();
  EquilibriumSolution sol{prices, AllFollowersRespond(instance, prices, exec)};
  sol.per_uav_case.resize(I);
  sol.uav_utilities.resize(I);
  ParallelFor(I, exec, [&](std::size_t i) {
    const auto row = prices.uav_row(i);
    sol.per_uav_case[i] = FollowerBestResponse(instance, i, row).case_label;
    sol.uav_utilities[i] = UavUtility(instance, i, sol.demands.uav_row(i), row);
  });
  sol.rsu_utilities.resize(J);
  for (std::size_t j = 0; j < J; ++j) {
    sol.rsu_utilities[j] = RsuUtility(instance, j, prices.rsu_row(j),
                                      sol.demands.rsu_column(j));
  }
  return sol;
}

EquilibriumSolution SolveEquilibrium(const GameInstance& instance,
                                     const SolverOptions& options,
                                     Execution exec) {
  const std::size_t I = instance.num_uavs();
  std::vector<UavEquilibrium> parts(I);
  ParallelFor(I, exec, [&](std::size_t i) {
    parts[i] = SolveUavSubgame(instance, i, options);
  });

  Matrix prices(instance.num_rsus(), I);
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < instance.num_rsus(); ++j) {
      prices(j, i) = parts[i].prices[j];
    }
  }
  EquilibriumSolution sol =
      EvaluatePrices(instance, PriceMatrix(instance, std::move(prices)), exec);
  for (std::size_t i = 0; i < I; ++i) {
    sol.iterations = std::max(sol.iterations, parts[i].iterations);
    sol.residual = std::max(sol.residual, parts[i].residual);
    sol.consistent = sol.consistent && parts[i].consistent;
    if (!parts[i].diagnostic.empty()) {
      sol.diagnostics.push_back("UAV " + std::to_string(i) + ": " +
                                parts[i].diagnostic);
    }
  }
  return sol;
}

}  // namespace tinymadrl::game
