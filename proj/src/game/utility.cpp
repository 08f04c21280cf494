#include <cmath>
#include <stdexcept>

#include "tinymadrl/game.hpp"

namespace tinymadrl::game {

double SpectrumEfficiency(const ChannelLink& link) {
  return link.spectrum_efficiency();
}

double Ssim(const SsimTriple& t) {
  return std::pow(t.luminance, t.weights.alpha) *
         std::pow(t.contrast, t.weights.beta) *
         std::pow(t.structure, t.weights.nu);
}

double LogQuality(const UavProfile& uav, std::size_t rsu_index) {
  const double ssim = Ssim(uav.per_rsu_ssim.at(rsu_index));
  if (!(ssim > 0.0)) {
    throw std::domain_error("LogQuality: zero SSIM on link to RSU " +
                            std::to_string(rsu_index) + " is unusable");
  }
  return std::log(ssim / uav.ssim_threshold);
}

double ImmersionMetric(const GameInstance& instance, std::size_t uav,
                       std::size_t rsu, double demand) {
  if (demand == 0.0) return 0.0;
  return instance.uav(uav).delta * std::log1p(demand * instance.q(rsu)) *
         instance.s(uav, rsu);
}

double UavUtility(const GameInstance& instance, std::size_t uav,
                  std::span<const double> demand_row,
                  std::span<const double> price_row) {
  double total = 0.0;
  for (std::size_t j = 0; j < instance.num_rsus(); ++j) {
    const double b = demand_row[j];
    if (b == 0.0) continue;
    total += ImmersionMetric(instance, uav, j, b) - price_row[j] * b;
  }
  return total;
}

double RsuUtility(const GameInstance& instance, std::size_t rsu,
                  std::span<const double> price_row,
                  std::span<const double> demand_column) {
  const double c = instance.cost(rsu);
  double total = 0.0;
  for (std::size_t i = 0; i < price_row.size(); ++i) {
    total += (price_row[i] - c) * demand_column[i];
  }
  return total;
}

}  // namespace tinymadrl::game
