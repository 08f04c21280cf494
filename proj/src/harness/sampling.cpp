#include "tinymadrl/harness.hpp"
#include "tinymadrl/rng.hpp"

namespace tinymadrl::harness {

using nlohmann::json;

game::GameInstance SampleInstance(const SamplingRanges& ranges, int num_uavs,
                                  int num_rsus, std::uint64_t seed) {
  std::vector<std::string> errors;
  ValidateRanges(ranges, errors);
  if (num_uavs < 1 || num_rsus < 1) errors.push_back("counts: I and J must be >= 1");
  if (!errors.empty()) throw ConfigError(std::move(errors));

  const std::uint64_t base = DeriveSeed(seed, "instance");
  std::vector<game::UavProfile> uavs(num_uavs);
  for (int i = 0; i < num_uavs; ++i) {
    Rng rng = MakeRng(base, "uav", i);
    auto& u = uavs[i];
    u.delta = Uniform(rng, ranges.delta.low, ranges.delta.high);
    u.budget = Uniform(rng, ranges.budget.low, ranges.budget.high);
    u.ssim_threshold = Uniform(rng, ranges.ssim_threshold.low, ranges.ssim_threshold.high);
    // Link draws come last so adding RSUs only appends to this stream.
    for (int j = 0; j < num_rsus; ++j) {
      game::SsimTriple t;
      t.luminance = Uniform(rng, ranges.similarity.low, ranges.similarity.high);
      t.contrast = Uniform(rng, ranges.similarity.low, ranges.similarity.high);
      t.structure = Uniform(rng, ranges.similarity.low, ranges.similarity.high);
      u.per_rsu_ssim.push_back(t);
    }
  }
  std::vector<game::RsuProfile> rsus(num_rsus);
  for (int j = 0; j < num_rsus; ++j) {
    Rng rng = MakeRng(base, "rsu", j);
    auto& r = rsus[j];
    r.bandwidth_cost = Uniform(rng, ranges.bandwidth_cost.low, ranges.bandwidth_cost.high);
    r.price_cap = Uniform(rng, ranges.price_cap.low, ranges.price_cap.high);
    const double power = Uniform(rng, ranges.transmit_power_dbm.low, ranges.transmit_power_dbm.high);
    const double gain = Uniform(rng, ranges.channel_gain_db.low, ranges.channel_gain_db.high);
    const double noise = Uniform(rng, ranges.noise_dbm.low, ranges.noise_dbm.high);
    r.link = game::ChannelLink(power, gain, noise);
  }
  return game::GameInstance(std::move(uavs), std::move(rsus));
}

game::GameInstance BuildInstance(const InstanceSpec& spec, std::uint64_t seed) {
  if (spec.fixed && !spec.bandwidth_cost && !spec.price_cap) return *spec.fixed;
  game::GameInstance base =
      spec.fixed ? *spec.fixed
                 : SampleInstance(spec.ranges, spec.num_uavs, spec.num_rsus, seed);
  if (!spec.bandwidth_cost && !spec.price_cap) return base;
  std::vector<game::RsuProfile> rsus = base.rsus();
  for (auto& r : rsus) {
    if (spec.bandwidth_cost) r.bandwidth_cost = *spec.bandwidth_cost;
    if (spec.price_cap) r.price_cap = *spec.price_cap;
  }
  return game::GameInstance(base.uavs(), std::move(rsus));
}

json InstanceToJson(const game::GameInstance& instance) {
  json uavs = json::array();
  for (const auto& u : instance.uavs()) {
    json ssim = json::array();
    for (const auto& t : u.per_rsu_ssim) {
      ssim.push_back({{"luminance", t.luminance},
                      {"contrast", t.contrast},
                      {"structure", t.structure},
                      {"weights", {t.weights.alpha, t.weights.beta, t.weights.nu}}});
    }
    uavs.push_back({{"delta", u.delta},
                    {"budget", u.budget},
                    {"ssim_threshold", u.ssim_threshold},
                    {"ssim", ssim}});
  }
  json rsus = json::array();
  for (const auto& r : instance.rsus()) {
    rsus.push_back({{"bandwidth_cost", r.bandwidth_cost},
                    {"price_cap", r.price_cap},
                    {"transmit_power_dbm", r.link.transmit_power_dbm()},
                    {"channel_gain_db", r.link.channel_gain_db()},
                    {"noise_dbm", r.link.noise_dbm()}});
  }
  return {{"uavs", uavs}, {"rsus", rsus}};
}

game::GameInstance InstanceFromJson(const json& j) {
  std::vector<game::UavProfile> uavs;
  for (const auto& u : j.at("uavs")) {
    game::UavProfile p;
    p.delta = u.at("delta").get<double>();
    p.budget = u.at("budget").get<double>();
    p.ssim_threshold = u.at("ssim_threshold").get<double>();
    for (const auto& t : u.at("ssim")) {
      game::SsimTriple s;
      s.luminance = t.at("luminance").get<double>();
      s.contrast = t.at("contrast").get<double>();
      s.structure = t.at("structure").get<double>();
      if (t.contains("weights")) {
        const auto& w = t.at("weights");
        s.weights = {w.at(0).get<double>(), w.at(1).get<double>(), w.at(2).get<double>()};
      }
      p.per_rsu_ssim.push_back(s);
    }
    uavs.push_back(std::move(p));
  }
  std::vector<game::RsuProfile> rsus;
  for (const auto& r : j.at("rsus")) {
    game::RsuProfile p;
    p.bandwidth_cost = r.at("bandwidth_cost").get<double>();
    p.price_cap = r.at("price_cap").get<double>();
    p.link = game::ChannelLink(r.at("transmit_power_dbm").get<double>(),
                               r.at("channel_gain_db").get<double>(),
                               r.at("noise_dbm").get<double>());
    rsus.push_back(p);
  }
  return game::GameInstance(std::move(uavs), std::move(rsus));
}

}  // namespace tinymadrl::harness
