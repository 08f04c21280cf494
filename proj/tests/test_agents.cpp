#include <cmath>
#include <map>

#include "doctest.h"
#include "support.hpp"
#include "tinymadrl/agents.hpp"

using namespace tinymadrl;
using namespace tinymadrl::agents;

namespace {

std::vector<PriceBox> Boxes(std::size_t n, double low = 1.0, double high = 5.0) {
  return std::vector<PriceBox>(n, PriceBox{low, high});
}

RolloutRecord Rec(double reward, double value, bool end) {
  RolloutRecord r;
  r.reward = reward;
  r.value = value;
  r.episode_end = end;
  return r;
}

PpoConfig SmallConfig() {
  PpoConfig c;
  c.hidden_sizes = {16, 16};
  c.rollout_size = 20;
  c.minibatch_size = 10;
  c.update_epochs = 3;
  return c;
}

// Feeds the agent a bandit whose reward peaks at the box midpoint.
template <typename Agent>
void Fill(Agent& agent, std::size_t obs_size, Rng& rng, int n) {
  const env::Observation obs(obs_size, 0.5);
  for (int k = 0; k < n; ++k) {
    const auto act = agent.Act(obs, rng);
    double r = 0.0;
    for (double p : act.prices) r -= (p - 3.0) * (p - 3.0);
    agent.Record(obs, act, r, k % 5 == 4);
  }
}

}  // namespace

TEST_CASE("returns and advantages") {
  std::vector<RolloutRecord> one{Rec(1.0, 0.0, true)};
  auto a = ComputeAdvantages(one, 0.9, false);
  CHECK(a.returns[0] == 1.0);
  CHECK(a.advantages[0] == 1.0);

  std::vector<RolloutRecord> two{Rec(1.0, 0.0, false), Rec(1.0, 0.0, true)};
  a = ComputeAdvantages(two, 0.5, false);
  CHECK(a.returns == std::vector<double>{1.5, 1.0});

  // Episode boundaries cut the discounted sum.
  std::vector<RolloutRecord> cut{Rec(2.0, 0.0, true), Rec(4.0, 0.0, false), Rec(8.0, 0.0, true)};
  a = ComputeAdvantages(cut, 0.5, false);
  CHECK(a.returns == std::vector<double>{2.0, 8.0, 8.0});
  a = ComputeAdvantages(cut, 0.5, false, 2.0);
  CHECK(a.returns == std::vector<double>{1.0, 4.0, 4.0});

  std::vector<RolloutRecord> exact{Rec(1.0, 1.5, false), Rec(1.0, 1.0, true)};
  a = ComputeAdvantages(exact, 0.5, true);
  CHECK(a.advantages == std::vector<double>{0.0, 0.0});

  std::vector<RolloutRecord> spread{Rec(1.0, 0.0, true), Rec(3.0, 0.0, true), Rec(5.0, 0.0, true)};
  a = ComputeAdvantages(spread, 0.5, true);
  double mean = 0.0;
  double var = 0.0;
  for (double x : a.advantages) mean += x / 3;
  for (double x : a.advantages) var += (x - mean) * (x - mean) / 3;
  CHECK(std::abs(mean) < 1e-12);
  CHECK(var == doctest::Approx(1.0));
}

TEST_CASE("clipped surrogate") {
  CHECK(ClipRatio(1.5, 0.2) == 1.2);
  CHECK(ClipRatio(0.5, 0.2) == 0.8);
  CHECK(ClipRatio(1.1, 0.2) == 1.1);
  CHECK(ClippedSurrogate(1.0, 0.7, 0.2) == 0.7);
  CHECK(ClippedSurrogate(1.5, 2.0, 0.2) == doctest::Approx(2.4));
  CHECK(ClippedSurrogate(1.5, -2.0, 0.2) == doctest::Approx(-3.0));
  CHECK(ClippedSurrogate(0.5, -2.0, 0.2) == doctest::Approx(-1.6));
}

TEST_CASE("policy: midpoint, zero noise and reproducibility") {
  PpoConfig cfg = SmallConfig();
  PpoAgent agent(8, Boxes(3, 1.0, 35.0), cfg, 7);
  auto& actor = agent.mutable_actor();
  for (std::size_t h = 0; h < actor.num_layers(); ++h) {
    for (auto& w : actor.mutable_layer(h).weights) w = 0.0;
  }
  const env::Observation obs(8, 0.3);
  for (double p : agent.MeanPrices(obs)) CHECK(p == 18.0);

  cfg.policy_std_start = cfg.policy_std_end = 1e-300;
  PpoAgent still(8, Boxes(3), cfg, 7);
  Rng rng(1);
  const auto act = still.Act(obs, rng);
  CHECK(act.prices == still.MeanPrices(obs));

  PpoAgent a(8, Boxes(3), SmallConfig(), 3);
  PpoAgent b(8, Boxes(3), SmallConfig(), 3);
  Rng ra(9);
  Rng rb(9);
  for (int k = 0; k < 5; ++k) {
    const auto x = a.Act(obs, ra);
    const auto y = b.Act(obs, rb);
    CHECK(x.prices == y.prices);
    CHECK(x.log_prob == y.log_prob);
    for (double p : x.prices) {
      CHECK(p >= 1.0);
      CHECK(p <= 5.0);
    }
  }

  PpoAgent annealed(8, Boxes(3), SmallConfig(), 3);
  annealed.SetProgress(0.0);
  CHECK(annealed.policy_std() == 0.3);
  annealed.SetProgress(1.0);
  CHECK(annealed.policy_std() == doctest::Approx(0.05));
}

TEST_CASE("update: first-pass ratio is one and the bandit improves") {
  PpoConfig cfg = SmallConfig();
  cfg.update_epochs = 8;
  PpoAgent agent(4, Boxes(2, 1.0, 5.0), cfg, 11);
  agent.mutable_actor().mutable_layer(2).bias = {2.0, 2.0};  // start near the top of the box
  Rng rng(2);
  const env::Observation obs(4, 0.5);
  const double start = std::abs(agent.MeanPrices(obs)[0] - 3.0);
  for (int round = 0; round < 40; ++round) {
    Fill(agent, 4, rng, cfg.rollout_size);
    REQUIRE(agent.ReadyToUpdate());
    const auto diag = agent.Update();
    CHECK(diag.first_epoch_max_ratio_error <= 1e-10);
    CHECK_FALSE(diag.aborted);
    CHECK(agent.buffer().size() == 0);
  }
  CHECK(std::abs(agent.MeanPrices(obs)[0] - 3.0) < 0.5 * start);
}

TEST_CASE("update: zero advantages leave the actor unchanged") {
  PpoConfig cfg = SmallConfig();
  cfg.normalize_advantages = false;
  cfg.discount = 0.0;
  PpoAgent agent(4, Boxes(2), cfg, 5);
  const env::Observation obs(4, 0.2);
  Rng rng(4);
  for (int k = 0; k < cfg.rollout_size; ++k) {
    auto act = agent.Act(obs, rng);
    act.value = 0.0;
    agent.Record(obs, act, 0.0, true);
  }
  const auto before = agent.actor();
  agent.Update();
  CHECK(agent.actor() == before);
}

TEST_CASE("update: a non-finite reward rolls the networks back") {
  PpoAgent agent(4, Boxes(2), SmallConfig(), 5);
  const env::Observation obs(4, 0.2);
  Rng rng(4);
  for (int k = 0; k < 20; ++k) {
    agent.Record(obs, agent.Act(obs, rng), k == 3 ? std::nan("") : 1.0, false);
  }
  const auto actor = agent.actor();
  const auto critic = agent.critic();
  const auto diag = agent.Update();
  CHECK(diag.aborted);
  CHECK(agent.actor() == actor);
  CHECK(agent.critic() == critic);
}

TEST_CASE("agent checkpoint restores an identical learner") {
  PpoAgent a(6, Boxes(3), SmallConfig(), 21);
  Rng rng(3);
  Fill(a, 6, rng, 20);
  a.Update();
  const auto ckpt = a.Checkpoint();
  PpoAgent b(6, Boxes(3), SmallConfig(), 99);
  b.Restore(nlohmann::json::parse(ckpt.dump()));
  CHECK(b.actor() == a.actor());
  CHECK(b.critic() == a.critic());
  Rng r1(8);
  Rng r2(8);
  Fill(a, 6, r1, 20);
  Fill(b, 6, r2, 20);
  a.Update();
  b.Update();
  CHECK(b.actor() == a.actor());
  CHECK_THROWS(b.Restore(nlohmann::json{{"format", "other"}}));
}

TEST_CASE("optimizers") {
  Rng rng(1);
  auto net = nn::PrunableMlp::Create({2, 3, 1}, nn::Activation::kTanh,
                                     nn::Activation::kIdentity, true, rng);
  const auto g = net.Backward(net.Forward(std::vector<double>{1.0, 2.0}, false),
                              std::vector<double>{1.0});
  auto sgd_net = net;
  Optimizer sgd(OptimizerKind::kSgd, 0.1, sgd_net);
  sgd.Step(sgd_net, g);
  for (std::size_t h = 0; h < net.num_layers(); ++h) {
    for (std::size_t k = 0; k < net.layer(h).weights.size(); ++k) {
      CHECK(sgd_net.layer(h).weights[k] ==
            doctest::Approx(net.layer(h).weights[k] - 0.1 * g.weights[h][k]));
    }
  }
  // First Adam step moves every parameter with a nonzero gradient by ~lr.
  auto adam_net = net;
  Optimizer adam(OptimizerKind::kAdam, 0.01, adam_net);
  adam.Step(adam_net, g);
  for (std::size_t k = 0; k < net.layer(0).weights.size(); ++k) {
    if (g.weights[0][k] == 0.0) continue;
    CHECK(std::abs(adam_net.layer(0).weights[k] - net.layer(0).weights[k]) ==
          doctest::Approx(0.01).epsilon(1e-4));
  }
  CHECK(Optimizer::FromJson(adam.ToJson()) == adam);
  CHECK(OptimizerFromString(ToString(OptimizerKind::kSgd)) == OptimizerKind::kSgd);
}

TEST_CASE("tiny madrl: schedule-driven masking and final compaction") {
  PpoConfig cfg = SmallConfig();
  cfg.hidden_sizes = {32, 32};
  nn::PruneSchedule schedule{0.0, 0.5, 2, 4, 1};
  TinyMadrlAgent agent(4, Boxes(2), cfg, schedule, 4, 8, 13);
  Rng rng(6);
  for (int epoch = 0; epoch <= 8; ++epoch) {
    Fill(agent, 4, rng, cfg.rollout_size);
    const auto report = agent.Step(epoch);
    CHECK(report.updated);
    if (epoch < 2) {
      CHECK_FALSE(report.masks_updated);
      CHECK(report.achieved_sparsity == 0.0);
    }
    if (epoch == schedule.end_epoch()) {
      CHECK(std::abs(report.achieved_sparsity - 0.5) <= 1.0 / 64 + 1e-12);
    }
    if (epoch == 8) {
      CHECK(report.compacted);
      CHECK(agent.compacted());
      const auto hidden = agent.ppo().actor().HiddenNeuronCount();
      CHECK(hidden >= 32);
      CHECK(hidden <= 36);
      CHECK(report.active_hidden_neurons == hidden);
    }
  }
}

TEST_CASE("tiny madrl with pruning off follows plain PPO exactly") {
  PpoConfig cfg = SmallConfig();
  TinyMadrlAgent tiny(4, Boxes(2), cfg, nn::PruneSchedule{0.0, 0.0, 0, 5, 1}, 4, 100, 31);
  PpoAgent ppo(4, Boxes(2), cfg, 31);
  Rng r1(2);
  Rng r2(2);
  for (int epoch = 0; epoch < 6; ++epoch) {
    Fill(tiny, 4, r1, cfg.rollout_size);
    Fill(ppo, 4, r2, cfg.rollout_size);
    tiny.Step(epoch);
    ppo.Update();
    CHECK(tiny.ppo().actor().layers() == ppo.actor().layers());
    CHECK(tiny.ppo().critic() == ppo.critic());
  }
}

TEST_CASE("greedy bandit") {
  GreedyAgent g(Boxes(1, 1.0, 17.0), GreedyConfig{16, 0.0});
  CHECK(g.LevelPrice(0, 0) == 1.5);
  CHECK(g.LevelPrice(0, 15) == 16.5);
  Rng rng(1);
  const auto first = g.Act(rng);
  const int chosen = g.last_levels()[0];
  CHECK(first[0] == g.LevelPrice(0, chosen));
  g.Observe(std::vector<double>{5.0});
  for (int k = 0; k < 20; ++k) {
    g.Act(rng);
    CHECK(g.last_levels()[0] == chosen);
    g.Observe(std::vector<double>{5.0});
  }
  CHECK(g.RunningMean(0, chosen) == 5.0);
  CHECK(g.Pulls(0, chosen) == 21);

  GreedyAgent explorer(Boxes(1), GreedyConfig{4, 1.0});
  std::map<int, int> counts;
  for (int k = 0; k < 4000; ++k) {
    explorer.Act(rng);
    ++counts[explorer.last_levels()[0]];
    explorer.Observe(std::vector<double>{explorer.last_levels()[0] == 2 ? 10.0 : 0.0});
  }
  for (int level = 0; level < 4; ++level) CHECK(std::abs(counts[level] - 1000) < 150);
}

TEST_CASE("random pricing") {
  Rng rng(5);
  const std::vector<PriceBox> flat{{3.0, 3.0}};
  CHECK(RandomAct(rng, flat)[0] == 3.0);
  const std::vector<PriceBox> box{{1.0, 35.0}};
  const int n = 100000;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double p = RandomAct(rng, box)[0];
    CHECK(p >= 1.0);
    CHECK(p <= 35.0);
    sum += p;
  }
  const double sigma = 34.0 / std::sqrt(12.0) / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(sum / n - 18.0) < 3.0 * sigma);
  Rng a(4);
  Rng b(4);
  CHECK(RandomAct(a, box) == RandomAct(b, box));
}
