#ifndef TINYMADRL_TESTS_SUPPORT_HPP_
#define TINYMADRL_TESTS_SUPPORT_HPP_

#include <cmath>
#include <vector>

#include "tinymadrl/game.hpp"
#include "tinymadrl/harness.hpp"

namespace testing {

namespace game = tinymadrl::game;

// Link whose spectrum efficiency is q (zero gain, zero noise floor).
inline game::ChannelLink LinkWithQ(double q) {
  return game::ChannelLink(10.0 * std::log10(std::exp2(q) - 1.0), 0.0, 0.0);
}

// Similarity triple giving ln(SSIM / threshold) = s.
inline game::SsimTriple TripleForS(double s, double threshold) {
  game::SsimTriple t;
  t.luminance = threshold * std::exp(s);
  return t;
}

// I UAVs and J RSUs that all look alike.
inline game::GameInstance Symmetric(std::size_t uavs, std::size_t rsus, double delta,
                                    double s, double q, double cost, double cap,
                                    double budget, double threshold = 0.5) {
  std::vector<game::UavProfile> u(uavs);
  for (auto& p : u) {
    p.delta = delta;
    p.budget = budget;
    p.ssim_threshold = threshold;
    p.per_rsu_ssim.assign(rsus, TripleForS(s, threshold));
  }
  std::vector<game::RsuProfile> r(rsus);
  for (auto& p : r) {
    p.bandwidth_cost = cost;
    p.price_cap = cap;
    p.link = LinkWithQ(q);
  }
  return game::GameInstance(std::move(u), std::move(r));
}

// The 2-RSU, 1-UAV market with delta=10, S=ln2, q=10, c=1, cap 35, R=2.
inline game::GameInstance SymmetricAnchor() {
  return Symmetric(1, 2, 10.0, std::log(2.0), 10.0, 1.0, 35.0, 2.0);
}

// Random market; wide similarity range so some links carry no surplus.
inline game::GameInstance RandomInstance(std::uint64_t seed, int uavs, int rsus,
                                         double sim_low = 0.3) {
  tinymadrl::harness::SamplingRanges r;
  r.similarity = {sim_low, 1.0};
  return tinymadrl::harness::SampleInstance(r, uavs, rsus, seed);
}

// U_i straight from the formula, independent of the library.
inline double UavUtilityOracle(const game::GameInstance& inst, std::size_t i,
                               const std::vector<double>& b,
                               const std::vector<double>& p) {
  double u = 0.0;
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (b[j] <= 0.0) continue;
    u += inst.uav(i).delta * std::log(1.0 + inst.q(j) * b[j]) * inst.s(i, j) - p[j] * b[j];
  }
  return u;
}

}  // namespace testing

#endif  // TINYMADRL_TESTS_SUPPORT_HPP_
