#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tinymadrl/game.hpp"

namespace tinymadrl::game {

std::optional<double> LeaderUnconstrainedPrice(const GameInstance& instance,
                                               std::size_t rsu,
                                               std::size_t uav) {
  const double s = instance.s(uav, rsu);
  if (!(s > 0.0)) return std::nullopt;
  return std::sqrt(instance.uav(uav).delta * s * instance.q(rsu) *
                   instance.cost(rsu));
}

LeaderResponse LeaderResponseUnclamped(const GameInstance& instance,
                                       std::size_t uav,
                                       std::span<const double> price_row) {
  const std::size_t J = instance.num_rsus();
  if (price_row.size() != J) {
    throw std::invalid_argument("LeaderResponse: price row length != J");
  }
  const UavProfile& u = instance.uav(uav);

  // Sellers with S <= 0 never sell to this UAV and drop out of the sums.
  std::size_t effective = 0;
  for (std::size_t k = 0; k < J; ++k) {
    if (instance.s(uav, k) > 0.0) ++effective;
  }

  LeaderResponse out;
  out.prices.resize(J);
  out.kinds.resize(J);
  for (std::size_t j = 0; j < J; ++j) {
    const double s = instance.s(uav, j);
    const double q = instance.q(j);
    const double c = instance.cost(j);
    if (!(s > 0.0)) {
      out.prices[j] = c;
      out.kinds[j] = LeaderResponseKind::kNoSurplus;
    } else if (effective == 1) {
      // Lone seller facing b(p) = min(delta S / p - 1/q, R / p): revenue
      // rises with p while the budget binds, so the optimum is the larger of
      // the slack-budget optimum and the price where the budget stops binding.
      const double slack_optimum = std::sqrt(u.delta * s * q * c);
      const double kink = q * (u.delta * s - u.budget);
      out.prices[j] = std::max(slack_optimum, kink);
      out.kinds[j] = LeaderResponseKind::kLoneSeller;
    } else {
      double others_s = 0.0;
      double others_pq = 0.0;
      for (std::size_t k = 0; k < J; ++k) {
        if (k == j || !(instance.s(uav, k) > 0.0)) continue;
        others_s += instance.s(uav, k);
        others_pq += price_row[k] / instance.q(k);
      }
      out.prices[j] = std::sqrt(q * c * s * (u.budget + others_pq) / others_s);
      out.kinds[j] = LeaderResponseKind::kCompetitive;
    }
  }
  return out;
}

std::vector<double> LeaderBestResponseMap(const GameInstance& instance,
                                          std::size_t uav,
                                          std::span<const double> price_row) {
  auto response = LeaderResponseUnclamped(instance, uav, price_row);
  for (std::size_t j = 0; j < response.prices.size(); ++j) {
    response.prices[j] =
        std::clamp(response.prices[j], instance.cost(j), instance.cap(j));
  }
  return std::move(response.prices);
}

}  // namespace tinymadrl::game
