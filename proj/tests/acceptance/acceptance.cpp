// End-to-end acceptance checks. One PASS/FAIL line per criterion.
// usage: acceptance <tinymadrl-cli> <configs-dir> <scratch-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "../support.hpp"
#include "tinymadrl/harness.hpp"
#include "tinymadrl/nn.hpp"

namespace fs = std::filesystem;
using namespace tinymadrl;
using namespace tinymadrl::game;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Paths {
  fs::path cli;
  fs::path configs;
  fs::path scratch;
};

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string Fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> RandomRow(const GameInstance& inst, Rng& rng) {
  std::vector<double> p(inst.num_rsus());
  for (std::size_t j = 0; j < p.size(); ++j) p[j] = Uniform(rng, inst.cost(j), inst.cap(j));
  return p;
}

// Best U_i over a grid on the budget box; axis j spans [0, R / p_j].
double GridOptimum(const GameInstance& inst, std::size_t i, const std::vector<double>& p,
                   int points) {
  const std::size_t J = p.size();
  const double R = inst.uav(i).budget;
  std::vector<double> step(J);
  for (std::size_t j = 0; j < J; ++j) step[j] = (R / p[j]) / (points - 1);
  std::vector<int> idx(J, 0);
  std::vector<double> b(J, 0.0);
  double best = 0.0;
  for (;;) {
    double spend = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      b[j] = step[j] * idx[j];
      spend += p[j] * b[j];
    }
    if (spend <= R * (1.0 + 1e-12)) {
      best = std::max(best, testing::UavUtilityOracle(inst, i, b, p));
    }
    std::size_t k = 0;
    while (k < J && ++idx[k] == points) idx[k++] = 0;
    if (k == J) break;
  }
  return best;
}

Outcome FollowerOracle() {
  const auto start = Clock::now();
  Rng rng(2024);
  int failures = 0;
  double worst_gap = -std::numeric_limits<double>::infinity();
  double worst_overspend = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const int J = 1 + static_cast<int>(seed % 3);
    const auto inst = testing::RandomInstance(9000 + seed, 1, J, 0.2 * (seed % 5));
    const auto p = RandomRow(inst, rng);
    const auto sol = FollowerBestResponse(inst, 0, p);
    double spend = 0.0;
    bool nonnegative = true;
    for (std::size_t j = 0; j < p.size(); ++j) {
      nonnegative &= sol.demands[j] >= 0.0;
      spend += p[j] * sol.demands[j];
    }
    const double R = inst.uav(0).budget;
    worst_overspend = std::max(worst_overspend, (spend - R) / R);
    const double grid = GridOptimum(inst, 0, p, 200);
    const double mine = testing::UavUtilityOracle(inst, 0, sol.demands, p);
    worst_gap = std::max(worst_gap, grid - mine);
    if (!nonnegative || spend > R * (1.0 + 1e-12) || mine < grid - 1e-2) ++failures;
  }
  const double secs = SecondsSince(start);
  return {failures == 0 && secs < 60.0,
          Fmt("100 instances, worst grid gap %.3g, worst relative overspend %.3g, %.1f s",
              worst_gap, worst_overspend, secs)};
}

Outcome KktAnchor() {
  const auto inst = testing::Symmetric(1, 2, 10.0, std::log(2.0), 10.0, 1.0, 35.0, 2.0);
  const auto sol = FollowerBestResponse(inst, 0, std::vector<double>{2.0, 2.0});
  const double spend = 2.0 * sol.demands[0] + 2.0 * sol.demands[1];
  const double err = std::max(std::abs(sol.demands[0] - 0.5), std::abs(sol.demands[1] - 0.5));
  const bool pass = err <= 1e-10 && std::abs(spend - 2.0) <= 1e-10 &&
                    sol.case_label == BudgetCase::kActive;
  return {pass, Fmt("demand error %.3g, budget residual %.3g", err, std::abs(spend - 2.0))};
}

Outcome EquilibriumAnchor() {
  const auto start = Clock::now();
  const auto inst = testing::SymmetricAnchor();
  const auto sol = SolveEquilibrium(inst);
  double err = 0.0;
  for (std::size_t j = 0; j < 2; ++j) {
    err = std::max(err, std::abs(sol.prices(j, 0) - 5.0) / 5.0);
    err = std::max(err, std::abs(sol.demands(0, j) - 0.2) / 0.2);
    err = std::max(err, std::abs(sol.rsu_utilities[j] - 0.8) / 0.8);
  }
  const auto report = VerifyEquilibrium(inst, sol, 1000, 7, 1e-6);
  const double secs = SecondsSince(start);
  return {err <= 1e-9 && report.ok() && secs < 5.0,
          Fmt("relative error %.3g, violations %.0f, max RSU gain %.3g", err,
              static_cast<double>(report.violations.size()), report.max_rsu_gain) +
              Fmt(", %.2f s", secs)};
}

Outcome StandardFunction() {
  Rng rng(31);
  int positivity = 0, monotonicity = 0, scalability = 0, points = 0;
  for (std::uint64_t seed = 0; points < 1000; ++seed) {
    const auto inst = testing::RandomInstance(20000 + seed, 1, 2 + seed % 4, 0.6);
    bool surplus = true;
    for (std::size_t j = 0; j < inst.num_rsus(); ++j) surplus &= inst.s(0, j) > 0.0;
    if (!surplus) continue;
    ++points;
    const auto p = RandomRow(inst, rng);
    const auto f = LeaderResponseUnclamped(inst, 0, p).prices;

    auto up = p;
    bool strict = false;
    for (auto& x : up) {
      if (Uniform(rng, 0.0, 1.0) < 0.5) {
        x *= Uniform(rng, 1.01, 2.0);
        strict = true;
      }
    }
    if (!strict) up[0] *= 1.5;
    const auto fu = LeaderResponseUnclamped(inst, 0, up).prices;

    const double chi = Uniform(rng, 1.01, 3.0);
    auto scaled = p;
    for (auto& x : scaled) x *= chi;
    const auto fs = LeaderResponseUnclamped(inst, 0, scaled).prices;

    for (std::size_t j = 0; j < p.size(); ++j) {
      if (!(f[j] > 0.0)) ++positivity;
      if (!(fu[j] >= f[j])) ++monotonicity;
      if (!(chi * f[j] > fs[j])) ++scalability;
    }
  }
  const int failures = positivity + monotonicity + scalability;
  return {failures == 0, Fmt("1000 points, failures: positivity %.0f, monotonicity %.0f, "
                             "scalability %.0f",
                             positivity, monotonicity, scalability)};
}

std::vector<double> RandomVector(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = Uniform(rng, -scale, scale);
  return v;
}

Outcome GradientCheck() {
  const auto start = Clock::now();
  Rng rng(77);
  const double h = 1e-5;
  std::size_t checked = 0, failures = 0;
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const bool masked = k >= 5;
    auto net = nn::PrunableMlp::Create({6, 10, 8, 3}, nn::Activation::kTanh,
                                       nn::Activation::kIdentity, true, rng);
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      for (auto& b : net.mutable_layer(l).bias) b = Uniform(rng, -0.5, 0.5);
    }
    if (masked) {
      nn::NeuronMask m;
      for (std::size_t l = 0; l < net.num_hidden_layers(); ++l) {
        m.layers.emplace_back(net.layer(l).out);
        for (auto& bit : m.layers.back()) bit = Uniform(rng, 0.0, 1.0) < 0.6 ? 1 : 0;
      }
      net.set_mask(m);
    }
    const auto x = RandomVector(rng, 6);
    const auto w = RandomVector(rng, 3);
    const auto g = net.Backward(net.Forward(x, masked), w);
    auto loss = [&](const nn::PrunableMlp& n) {
      const auto y = masked ? n.MaskedPredict(x) : n.Predict(x);
      return std::inner_product(y.begin(), y.end(), w.begin(), 0.0);
    };
    auto probe = [&](double analytic, const std::function<double&(nn::PrunableMlp&)>& at) {
      auto plus = net;
      auto minus = net;
      at(plus) += h;
      at(minus) -= h;
      const double numeric = (loss(plus) - loss(minus)) / (2 * h);
      const double scale = std::max(std::abs(analytic), std::abs(numeric));
      const double err = std::abs(analytic - numeric);
      if (scale > 1e-9) worst = std::max(worst, err / scale);
      ++checked;
      if (err > 1e-4 * scale + 1e-9) ++failures;
    };
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      for (std::size_t p = 0; p < net.layer(l).weights.size(); ++p) {
        probe(g.weights[l][p], [&](nn::PrunableMlp& n) -> double& {
          return n.mutable_layer(l).weights[p];
        });
      }
      for (std::size_t r = 0; r < net.layer(l).out; ++r) {
        probe(g.bias[l][r],
              [&](nn::PrunableMlp& n) -> double& { return n.mutable_layer(l).bias[r]; });
      }
    }
  }
  const double secs = SecondsSince(start);
  return {failures == 0 && secs < 10.0,
          Fmt("%.0f parameters over 5 masked and 5 unmasked nets, worst relative error %.3g, "
              "%.2f s",
              static_cast<double>(checked), worst, secs)};
}

Outcome PruningSchedule() {
  const nn::PruneSchedule s{0.0, 0.5, 3, 10, 2};
  const bool endpoints = nn::SparsityAt(s, s.start_epoch) == 0.0 &&
                         nn::SparsityAt(s, s.end_epoch()) == 0.5;
  Rng rng(64);
  auto net = nn::PrunableMlp::Create({24, 64, 64, 3}, nn::Activation::kRelu,
                                     nn::Activation::kIdentity, true, rng);
  for (int epoch = 0; epoch <= s.end_epoch(); ++epoch) {
    if (s.IsUpdateEpoch(epoch)) nn::UpdateMasks(net, s, epoch, 4);
  }
  const auto compact = nn::Compact(net);
  const std::size_t hidden = compact.layer(0).out + compact.layer(1).out;
  double diff = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto x = RandomVector(rng, 24, 2.0);
    const auto a = compact.Predict(x);
    const auto b = net.MaskedPredict(x);
    for (std::size_t r = 0; r < a.size(); ++r) diff = std::max(diff, std::abs(a[r] - b[r]));
  }
  return {endpoints && hidden >= 60 && hidden <= 68 && diff <= 1e-12,
          Fmt("endpoints exact: %.0f, compact hidden %.0f of 128, max output diff %.3g",
              endpoints ? 1.0 : 0.0, static_cast<double>(hidden), diff)};
}

Outcome Convergence(const Paths& paths) {
  const auto start = Clock::now();
  const auto cfg = harness::LoadConfig(paths.configs / "convergence.json");
  const auto records = harness::RunCompare(cfg);
  const double secs = SecondsSince(start);

  auto finals = [&](const std::string& kind) {
    std::vector<double> v;
    for (const auto& r : records) {
      if (r.kind == kind) v.push_back(r.FinalAverage(0.1));
    }
    return v;
  };
  auto reach = [&](const std::string& kind) {
    std::vector<double> v;
    for (const auto& r : records) {
      if (r.kind != kind) continue;
      const auto e = r.EpisodesToReach(0.8 * r.theoretical);
      v.push_back(e ? *e : std::numeric_limits<double>::infinity());
    }
    return v;
  };
  std::vector<double> ratios, theory;
  for (const auto& r : records) {
    if (r.kind != "tiny_madrl") continue;
    ratios.push_back(r.FinalAverage(0.1) / r.theoretical);
    theory.push_back(r.theoretical);
  }
  const double tiny = Median(finals("tiny_madrl"));
  const double greedy = Median(finals("greedy"));
  const double random = Median(finals("random"));
  const double ratio = Median(ratios);
  const double tiny_reach = Median(reach("tiny_madrl"));
  const double ppo_reach = Median(reach("ppo"));
  const bool pass = cfg.seeds.size() == 5 && cfg.training.episodes <= 300 && ratio >= 0.85 &&
                    tiny >= 0.85 * Median(theory) && tiny >= random && tiny >= greedy &&
                    tiny_reach <= ppo_reach && secs < 600.0;
  return {pass, Fmt("tiny %.1f%% of theoretical, tiny %.4g vs greedy %.4g", 100.0 * ratio, tiny,
                    greedy) +
                    Fmt(" vs random %.4g, episodes to 80%%: tiny %.0f vs ppo %.0f", random,
                        tiny_reach, ppo_reach) +
                    Fmt(", %.1f s", secs)};
}

double Spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t k = 0; k < order.size();) {
      std::size_t end = k;
      while (end + 1 < order.size() && v[order[end + 1]] == v[order[k]]) ++end;
      for (std::size_t m = k; m <= end; ++m) r[order[m]] = 0.5 * (k + end);
      k = end + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / rx.size();
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / ry.size();
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < rx.size(); ++k) {
    sxy += (rx[k] - mx) * (ry[k] - my);
    sxx += (rx[k] - mx) * (rx[k] - mx);
    syy += (ry[k] - my) * (ry[k] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

struct Trend {
  bool monotone = true;
  double rho = 0.0;
  std::size_t seeds = 0;
  std::string curve;
};

// sign = -1 asks for non-increasing, +1 for non-decreasing.
Trend SweepTrend(const fs::path& config, int sign) {
  const auto cfg = harness::LoadConfig(config);
  const auto result = harness::RunSweep(cfg, *cfg.sweep);
  Trend t;
  t.seeds = cfg.seeds.size();
  std::vector<double> xs, ys;
  for (const auto& p : result.solve_curve) {
    if (!ys.empty() && sign * (p.mean - ys.back()) < 0.0) t.monotone = false;
    t.seeds = std::min(t.seeds, p.count);
    xs.push_back(p.value);
    ys.push_back(p.mean);
    t.curve += (t.curve.empty() ? "" : " ") + Fmt("%.3g", p.mean);
  }
  t.rho = Spearman(xs, ys);
  t.monotone = t.monotone && sign * t.rho > 0.0;
  return t;
}

Outcome CostTrend(const Paths& paths) {
  const auto cfg = harness::LoadConfig(paths.configs / "sweep-cost.json");
  const std::vector<double> grid{1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  const bool setup = cfg.sweep && cfg.sweep->parameter == harness::SweepParameter::kCost &&
                     cfg.sweep->grid == grid;
  const auto t = SweepTrend(paths.configs / "sweep-cost.json", -1);
  return {setup && t.monotone && t.seeds >= 20,
          Fmt("%.0f seeds, spearman %.3f, curve ", static_cast<double>(t.seeds), t.rho) +
              t.curve};
}

Outcome CountTrends(const Paths& paths) {
  const auto start = Clock::now();
  const auto rsus = harness::LoadConfig(paths.configs / "sweep-rsus.json");
  const auto uavs = harness::LoadConfig(paths.configs / "sweep-uavs.json");
  const bool setup = rsus.instance.num_uavs == 15 && uavs.instance.num_rsus == 3 &&
                     rsus.sweep && rsus.sweep->parameter == harness::SweepParameter::kNumRsus &&
                     uavs.sweep && uavs.sweep->parameter == harness::SweepParameter::kNumUavs;
  const auto j = SweepTrend(paths.configs / "sweep-rsus.json", -1);
  const auto i = SweepTrend(paths.configs / "sweep-uavs.json", +1);
  const double secs = SecondsSince(start);
  return {setup && j.monotone && i.monotone && j.seeds >= 20 && i.seeds >= 20 && secs < 120.0,
          "J at I=15: " + j.curve + "; I at J=3: " + i.curve +
              Fmt("; %.0f seeds, %.1f s", static_cast<double>(std::min(i.seeds, j.seeds)), secs)};
}

Outcome DemandOpposition() {
  Rng rng(4);
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto inst = testing::RandomInstance(40000 + seed, 1, 1 + seed % 4, 0.2 * (seed % 5));
    auto p = RandomRow(inst, rng);
    const std::size_t j = seed % inst.num_rsus();
    const double from = p[j];
    double last = FollowerBestResponse(inst, 0, p).demands[j];
    for (int step = 1; step <= 25; ++step) {
      p[j] = from + (inst.cap(j) - from) * step / 25.0;
      const double now = FollowerBestResponse(inst, 0, p).demands[j];
      if (now > last) ++failures;
      last = now;
    }
  }
  return {failures == 0, Fmt("1000 instances x 25 price steps, %.0f increases", failures)};
}

std::string CsvWithoutWallMs(const fs::path& file) {
  std::ifstream in(file);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) out << line.substr(0, line.rfind(',')) << "\n";
  return out.str();
}

Outcome Reproducibility(const Paths& paths) {
  const fs::path config = paths.configs / "convergence.json";
  std::vector<std::string> csvs;
  for (const char* run : {"repro_a", "repro_b"}) {
    const fs::path out = paths.scratch / run;
    fs::remove_all(out);
    const std::string cmd = "\"" + paths.cli.string() + "\" train --config \"" +
                            config.string() + "\" --seed 3 --algo tiny_madrl --out \"" +
                            out.string() + "\" > \"" + (paths.scratch / run).string() +
                            ".log\" 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, std::string("train failed: ") + run};
    csvs.push_back(CsvWithoutWallMs(out / "results.csv"));
  }
  const bool pass = !csvs[0].empty() && csvs[0] == csvs[1];
  return {pass, Fmt("%.0f bytes compared", static_cast<double>(csvs[0].size()))};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 4) {
    std::fprintf(stderr, "usage: %s <tinymadrl-cli> <configs-dir> <scratch-dir>\n", argv[0]);
    return 2;
  }
  const Paths paths{argv[1], argv[2], argv[3]};
  fs::create_directories(paths.scratch);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"follower oracle equivalence", FollowerOracle},
      {"KKT anchor", KktAnchor},
      {"equilibrium anchor", EquilibriumAnchor},
      {"standard-function suite", StandardFunction},
      {"gradient check", GradientCheck},
      {"pruning schedule and compaction", PruningSchedule},
      {"convergence against baselines (2 RSUs x 3 UAVs)", [&] { return Convergence(paths); }},
      {"reward declines with bandwidth cost", [&] { return CostTrend(paths); }},
      {"reward trends in RSU and UAV counts", [&] { return CountTrends(paths); }},
      {"demand opposes price", DemandOpposition},
      {"reproducible train CSV", [&] { return Reproducibility(paths); }},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
