#include <cstdio>
#include <fstream>
#include <iostream>

#include "tinymadrl/harness.hpp"

namespace tinymadrl::harness {
namespace {

constexpr int kExitUsage = 2;
constexpr int kExitStrict = 3;

nlohmann::json CurveToJson(const std::vector<SweepPoint>& curve) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : curve) {
    out.push_back({{"value", p.value}, {"mean", p.mean}, {"sd", p.sd}, {"count", p.count}});
  }
  return out;
}

// Returns the number of flagged records, printing their diagnostics.
int ReportFlagged(const std::vector<RunRecord>& records) {
  int flagged = 0;
  for (const auto& r : records) {
    if (r.consistent) continue;
    ++flagged;
    std::cerr << "flagged " << r.run_id << "\n";
    for (const auto& d : r.diagnostics) std::cerr << "  " << d << "\n";
  }
  return flagged;
}

void PrintSummary(const nlohmann::json& summary) {
  for (const auto& [kind, entry] : summary.at("algorithms").items()) {
    std::printf("%-11s runs=%zu final=%.6g theoretical=%.6g (%.1f%%)\n", kind.c_str(),
                entry.at("runs").get<std::size_t>(),
                entry.at("final_avg_reward_median").get<double>(),
                entry.at("theoretical_median").get<double>(),
                entry.at("percent_of_theoretical_median").get<double>());
  }
}

}  // namespace

int RunCommand(const std::string& command, const CommandOptions& options) {
  ExperimentConfig config;
  try {
    if (!options.config_path.empty()) config = LoadConfig(options.config_path);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }
  if (options.seed) config.seeds = {*options.seed};
  if (options.out) config.output_dir = options.out->string();
  const std::filesystem::path out = config.output_dir;

  std::vector<RunRecord> records;
  nlohmann::json extra;
  if (command == "solve") {
    records.resize(config.seeds.size());
    ParallelFor(config.seeds.size(), Execution::kParallel, [&](std::size_t k) {
      records[k] = RunSolve(config, config.seeds[k], Execution::kSerial);
    });
    SortRecords(records);
  } else if (command == "train" || command == "compare") {
    if (command == "train") config.algorithms = {options.algorithm.value_or("tiny_madrl")};
    records = RunCompare(config);
    if (command == "compare") {
      for (auto seed : config.seeds) records.push_back(RunSolve(config, seed));
      SortRecords(records);
    }
  } else if (command == "sweep") {
    if (!config.sweep) {
      std::cerr << "sweep: the config has no \"sweep\" section\n";
      return kExitUsage;
    }
    SweepSpec spec = *config.sweep;
    if (options.algorithm) spec.algorithm = *options.algorithm;
    auto result = RunSweep(config, spec);
    records = std::move(result.records);
    extra = {{"parameter", ToString(spec.parameter)},
             {"solve_curve", CurveToJson(result.solve_curve)},
             {"train_curve", CurveToJson(result.train_curve)}};
  } else {
    std::cerr << "unknown command '" << command << "'\n";
    return kExitUsage;
  }

  EmitResults(out, config, records);
  if (!extra.is_null()) {
    std::ofstream(out / "sweep.json") << extra.dump(2) << "\n";
    for (const auto& p : extra.at("solve_curve")) {
      std::printf("%s=%-8g theoretical mean=%.6g sd=%.3g\n",
                  extra.at("parameter").get<std::string>().c_str(), p.at("value").get<double>(),
                  p.at("mean").get<double>(), p.at("sd").get<double>());
    }
  } else {
    PrintSummary(Summary(config, records));
  }
  std::printf("wrote %s\n", out.string().c_str());

  const int flagged = ReportFlagged(records);
  if (flagged > 0 && options.strict) {
    std::cerr << flagged << " run(s) flagged; failing because of --strict\n";
    return kExitStrict;
  }
  return 0;
}

}  // namespace tinymadrl::harness
