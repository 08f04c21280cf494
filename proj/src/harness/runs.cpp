#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <variant>

#include "tinymadrl/harness.hpp"
#include "tinymadrl/rng.hpp"

namespace tinymadrl::harness {
namespace {

double MillisSince(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string FormatValue(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// Market-average reward per episode, in episode order.
std::vector<double> EpisodeCurve(const RunRecord& record) {
  std::map<int, double> by_episode;
  for (const auto& row : record.rows) by_episode.emplace(row.episode, row.avg_reward);
  std::vector<double> curve;
  curve.reserve(by_episode.size());
  for (const auto& [_, v] : by_episode) curve.push_back(v);
  return curve;
}

SweepPoint Aggregate(double value, const std::vector<double>& xs) {
  SweepPoint p;
  p.value = value;
  p.count = xs.size();
  if (xs.empty()) return p;
  p.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - p.mean) * (x - p.mean);
  p.sd = xs.size() > 1 ? std::sqrt(var / (xs.size() - 1)) : 0.0;
  return p;
}

using LearningAgent = std::variant<agents::TinyMadrlAgent, agents::PpoAgent>;

}  // namespace

double RunRecord::FinalAverage(double fraction) const {
  const auto curve = EpisodeCurve(*this);
  if (curve.empty()) return 0.0;
  const std::size_t n = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(curve.size()))));
  const std::size_t from = curve.size() - std::min(n, curve.size());
  return std::accumulate(curve.begin() + from, curve.end(), 0.0) / (curve.size() - from);
}

std::optional<int> RunRecord::EpisodesToReach(double target, int window) const {
  const auto curve = EpisodeCurve(*this);
  const std::size_t w = static_cast<std::size_t>(std::max(window, 1));
  double sum = 0.0;
  for (std::size_t k = 0; k < curve.size(); ++k) {
    sum += curve[k];
    if (k >= w) sum -= curve[k - w];
    if (k + 1 >= w && sum / w >= target) return static_cast<int>(k + 1);
  }
  return std::nullopt;
}

void SortRecords(std::vector<RunRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::tie(a.run_id, a.seed) < std::tie(b.run_id, b.seed);
  });
}

RunRecord RunSolve(const ExperimentConfig& config, std::uint64_t seed, Execution exec) {
  const auto start = std::chrono::steady_clock::now();
  const game::GameInstance instance = BuildInstance(config.instance, seed);
  const auto solution = game::SolveEquilibrium(instance, config.solver, exec);
  const auto report =
      game::VerifyEquilibrium(instance, solution, config.verify_probes,
                              DeriveSeed(seed, "verify"), config.verify_tolerance, exec);
  RunRecord record;
  record.run_id = "solve-s" + std::to_string(seed);
  record.kind = "solve";
  record.config_hash = ConfigHash(config);
  record.seed = seed;
  record.theoretical = solution.AverageRsuUtility();
  record.rows.push_back(EpisodeRow{0, std::nullopt, record.theoretical, record.theoretical,
                                   std::nullopt});
  record.consistent = solution.consistent && report.ok();
  record.diagnostics = solution.diagnostics;
  if (!report.ok()) {
    record.diagnostics.push_back(
        "verification found " + std::to_string(report.violations.size()) +
        " profitable deviations (max RSU gain " + FormatValue(report.max_rsu_gain) +
        ", max UAV gain " + FormatValue(report.max_uav_gain) + ")");
  }
  record.wall_ms = MillisSince(start);
  return record;
}

RunRecord RunTraining(const ExperimentConfig& config, const std::string& algorithm,
                      std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const game::GameInstance instance = BuildInstance(config.instance, seed);
  const env::Baseline baseline = env::TheoreticalBaseline(instance);
  env::MarketEnv market(instance, config.training.env);
  const auto& training = config.training;
  const std::size_t J = market.num_agents();
  const std::size_t I = market.action_size();
  const int T = training.episodes;
  const int steps = training.env.episode_length;
  const int total_updates = T * steps / training.ppo.rollout_size;

  std::vector<Rng> policy_rngs;
  std::vector<LearningAgent> learners;
  std::vector<agents::GreedyAgent> greedy;
  std::vector<std::vector<agents::PriceBox>> boxes;
  for (std::size_t j = 0; j < J; ++j) {
    boxes.push_back(agents::BoxesForRsu(instance, j));
    policy_rngs.push_back(MakeRng(seed, "policy", j));
    // Same per-agent seed for every learner so PPO and Tiny MADRL start
    // from identical weights.
    const std::uint64_t agent_seed = DeriveSeed(seed, "agent", j);
    if (algorithm == "tiny_madrl") {
      learners.emplace_back(std::in_place_type<agents::TinyMadrlAgent>,
                            market.observation_size(), boxes[j], training.ppo,
                            training.schedule, training.floor_neurons,
                            std::max(total_updates - 1, 0), agent_seed);
    } else if (algorithm == "ppo") {
      learners.emplace_back(std::in_place_type<agents::PpoAgent>, market.observation_size(),
                            boxes[j], training.ppo, agent_seed);
    } else if (algorithm == "greedy") {
      greedy.emplace_back(boxes[j], training.greedy);
    } else if (algorithm != "random") {
      throw std::invalid_argument("unknown algorithm '" + algorithm + "'");
    }
  }

  RunRecord record;
  record.run_id = "train-" + algorithm + "-s" + std::to_string(seed);
  record.kind = algorithm;
  record.config_hash = ConfigHash(config);
  record.seed = seed;
  record.theoretical = baseline.value;
  record.consistent = baseline.consistent;
  if (!baseline.consistent) {
    record.diagnostics.push_back("theoretical baseline comes from a flagged equilibrium");
  }

  std::vector<int> epochs(J, 0);
  std::vector<double> sparsity(J, 0.0);
  std::vector<std::vector<double>> prices(J);
  std::vector<agents::ActResult> acts(J);
  for (int episode = 0; episode < T; ++episode) {
    auto observations = market.Reset(DeriveSeed(seed, "episode", episode));
    const double progress = T > 1 ? static_cast<double>(episode) / (T - 1) : 1.0;
    for (auto& learner : learners) {
      std::visit([&](auto& a) { a.SetProgress(progress); }, learner);
    }
    std::vector<double> totals(J, 0.0);
    for (int t = 0; t < steps; ++t) {
      for (std::size_t j = 0; j < J; ++j) {
        if (!learners.empty()) {
          acts[j] = std::visit([&](auto& a) { return a.Act(observations[j], policy_rngs[j]); },
                               learners[j]);
          prices[j] = acts[j].prices;
        } else if (!greedy.empty()) {
          prices[j] = greedy[j].Act(policy_rngs[j]);
        } else {
          prices[j] = agents::RandomAct(policy_rngs[j], boxes[j]);
        }
      }
      auto outcome = market.Step(prices);
      for (std::size_t j = 0; j < J; ++j) {
        const double r = outcome.rewards[j];
        if (!std::isfinite(r)) {
          throw std::runtime_error("non-finite reward for agent " + std::to_string(j) +
                                   " at episode " + std::to_string(episode) + ", step " +
                                   std::to_string(t));
        }
        totals[j] += r;
        if (!learners.empty()) {
          std::visit([&](auto& a) { a.Record(observations[j], acts[j], r, outcome.done); },
                     learners[j]);
        } else if (!greedy.empty()) {
          std::vector<double> contributions(I);
          const auto row = outcome.prices.rsu_row(j);
          const auto demand = outcome.demands.rsu_column(j);
          for (std::size_t i = 0; i < I; ++i) {
            contributions[i] = (row[i] - instance.cost(j)) * demand[i];
          }
          greedy[j].Observe(contributions);
        }
      }
      for (std::size_t j = 0; j < learners.size(); ++j) {
        if (auto* tiny = std::get_if<agents::TinyMadrlAgent>(&learners[j])) {
          if (tiny->ppo().ReadyToUpdate()) {
            const auto report = tiny->Step(epochs[j]++);
            sparsity[j] = report.achieved_sparsity;
            if (report.diagnostics.aborted) {
              record.diagnostics.push_back("agent " + std::to_string(j) + " epoch " +
                                           std::to_string(report.epoch) + ": " +
                                           report.diagnostics.message);
            }
          }
        } else {
          auto& ppo = std::get<agents::PpoAgent>(learners[j]);
          if (ppo.ReadyToUpdate()) {
            const auto diag = ppo.Update();
            if (diag.aborted) {
              record.diagnostics.push_back("agent " + std::to_string(j) + " epoch " +
                                           std::to_string(epochs[j]) + ": " + diag.message);
            }
            ++epochs[j];
          }
        }
      }
      observations = std::move(outcome.next_observations);
    }
    double avg = 0.0;
    for (std::size_t j = 0; j < J; ++j) avg += totals[j] / steps;
    avg /= static_cast<double>(J);
    for (std::size_t j = 0; j < J; ++j) {
      EpisodeRow row{episode, static_cast<int>(j), totals[j] / steps, avg, std::nullopt};
      if (algorithm == "tiny_madrl") row.sparsity = sparsity[j];
      record.rows.push_back(row);
    }
  }
  record.wall_ms = MillisSince(start);
  return record;
}

std::vector<RunRecord> RunCompare(const ExperimentConfig& config, Execution exec) {
  struct Cell {
    std::string algorithm;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& a : config.algorithms) {
    for (auto s : config.seeds) cells.push_back({a, s});
  }
  std::vector<RunRecord> records(cells.size());
  ParallelFor(cells.size(), exec, [&](std::size_t k) {
    records[k] = RunTraining(config, cells[k].algorithm, cells[k].seed);
  });
  SortRecords(records);
  return records;
}

ExperimentConfig ApplySweepValue(const ExperimentConfig& config, SweepParameter p,
                                 double value) {
  ExperimentConfig out = config;
  auto& inst = out.instance;
  const bool counts = p == SweepParameter::kNumUavs || p == SweepParameter::kNumRsus;
  if (counts && inst.fixed) {
    throw std::invalid_argument("I/J sweeps need a sampled instance, not a fixed one");
  }
  switch (p) {
    case SweepParameter::kCost: inst.bandwidth_cost = value; break;
    case SweepParameter::kPriceCap: inst.price_cap = value; break;
    case SweepParameter::kNumUavs: inst.num_uavs = static_cast<int>(value); break;
    case SweepParameter::kNumRsus: inst.num_rsus = static_cast<int>(value); break;
  }
  return out;
}

SweepResult RunSweep(const ExperimentConfig& config, const SweepSpec& spec, Execution exec) {
  struct Cell {
    std::size_t point;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (std::size_t k = 0; k < spec.grid.size(); ++k) {
    for (auto s : config.seeds) cells.push_back({k, s});
  }
  const std::size_t per_cell = spec.train ? 2 : 1;
  std::vector<RunRecord> records(cells.size() * per_cell);
  ParallelFor(cells.size(), exec, [&](std::size_t c) {
    const double value = spec.grid[cells[c].point];
    const ExperimentConfig cfg = ApplySweepValue(config, spec.parameter, value);
    const std::string prefix = "sweep-" + ToString(spec.parameter) + "=" + FormatValue(value) + "-";
    // Cells are already spread over threads; keep each one sequential.
    RunRecord solve = RunSolve(cfg, cells[c].seed, Execution::kSerial);
    solve.run_id = prefix + solve.run_id;
    solve.sweep_parameter = ToString(spec.parameter);
    solve.sweep_value = value;
    records[c * per_cell] = std::move(solve);
    if (spec.train) {
      RunRecord train = RunTraining(cfg, spec.algorithm, cells[c].seed);
      train.run_id = prefix + train.run_id;
      train.sweep_parameter = ToString(spec.parameter);
      train.sweep_value = value;
      records[c * per_cell + 1] = std::move(train);
    }
  });

  SweepResult result;
  for (std::size_t k = 0; k < spec.grid.size(); ++k) {
    std::vector<double> solved;
    std::vector<double> trained;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c].point != k) continue;
      solved.push_back(records[c * per_cell].theoretical);
      if (spec.train) trained.push_back(records[c * per_cell + 1].FinalAverage());
    }
    result.solve_curve.push_back(Aggregate(spec.grid[k], solved));
    if (spec.train) result.train_curve.push_back(Aggregate(spec.grid[k], trained));
  }
  SortRecords(records);
  result.records = std::move(records);
  return result;
}

}  // namespace tinymadrl::harness
