#ifndef TINYMADRL_HARNESS_HPP_
#define TINYMADRL_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tinymadrl/agents.hpp"
#include "tinymadrl/env.hpp"
#include "tinymadrl/game.hpp"
#include "tinymadrl/nn.hpp"
#include "tinymadrl/parallel.hpp"

namespace tinymadrl::harness {

inline constexpr int kSchemaVersion = 1;

// Thrown with every problem found, one per line.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct Range {
  double low = 0.0;
  double high = 0.0;
  bool operator==(const Range&) const = default;
};

// Uniform sampling ranges. Defaults follow the simulation table, except the
// budget, which the table does not list.
struct SamplingRanges {
  Range noise_dbm{-116.0, -112.0};
  Range channel_gain_db{-25.0, -22.0};
  Range transmit_power_dbm{20.0, 25.0};
  Range similarity{0.0, 1.0};  // each of luminance, contrast, structure
  Range ssim_threshold{0.5, 0.55};
  Range delta{10.0, 20.0};
  Range bandwidth_cost{1.0, 4.0};
  Range price_cap{5.0, 35.0};
  Range budget{1.0, 5.0};

  bool operator==(const SamplingRanges&) const = default;
};

struct InstanceSpec {
  int num_uavs = 3;
  int num_rsus = 2;
  SamplingRanges ranges;
  // Uniform overrides applied to every RSU after sampling.
  std::optional<double> bandwidth_cost;
  std::optional<double> price_cap;
  // When set, sampling is skipped entirely.
  std::optional<game::GameInstance> fixed;
};

struct TrainingSpec {
  int episodes = 300;
  env::EnvConfig env;
  agents::PpoConfig ppo;
  nn::PruneSchedule schedule{0.0, 0.5, 20, 10, 4};
  std::size_t floor_neurons = 4;
  agents::GreedyConfig greedy;
};

enum class SweepParameter { kCost, kPriceCap, kNumUavs, kNumRsus };
std::string ToString(SweepParameter p);
SweepParameter SweepParameterFromString(const std::string& name);

struct SweepSpec {
  SweepParameter parameter = SweepParameter::kCost;
  std::vector<double> grid{1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  bool train = false;               // also run training per cell
  std::string algorithm = "tiny_madrl";
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string name = "experiment";
  InstanceSpec instance;
  TrainingSpec training;
  std::optional<SweepSpec> sweep;
  std::vector<std::uint64_t> seeds{1};
  std::vector<std::string> algorithms{"tiny_madrl", "ppo", "greedy", "random"};
  std::string output_dir = "results";
  game::SolverOptions solver;
  std::size_t verify_probes = 1000;
  double verify_tolerance = 1e-6;
};

// Parses and validates; throws ConfigError listing every problem.
ExperimentConfig ConfigFromJson(const nlohmann::json& j);
ExperimentConfig LoadConfig(const std::filesystem::path& path);
nlohmann::json ToJson(const ExperimentConfig& config);
// Hex FNV-1a of the canonical JSON dump.
std::string ConfigHash(const ExperimentConfig& config);

// Validates ranges (non-empty, cost below the cap range, threshold < 1).
void ValidateRanges(const SamplingRanges& ranges, std::vector<std::string>& errors,
                    const std::string& where = "ranges");

// Each UAV and RSU draws from its own stream, so growing I or J keeps the
// existing entities unchanged.
game::GameInstance SampleInstance(const SamplingRanges& ranges, int num_uavs,
                                  int num_rsus, std::uint64_t seed);
game::GameInstance BuildInstance(const InstanceSpec& spec, std::uint64_t seed);

nlohmann::json InstanceToJson(const game::GameInstance& instance);
game::GameInstance InstanceFromJson(const nlohmann::json& j);

// ---- records ---------------------------------------------------------------

struct EpisodeRow {
  int episode = 0;
  std::optional<int> agent_id;  // empty for whole-market rows
  double reward = 0.0;
  double avg_reward = 0.0;
  std::optional<double> sparsity;
  bool operator==(const EpisodeRow&) const = default;
};

struct RunRecord {
  std::string run_id;
  std::string kind;  // "solve" or an algorithm name
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<EpisodeRow> rows;
  double theoretical = 0.0;
  bool consistent = true;
  std::vector<std::string> diagnostics;
  double wall_ms = 0.0;
  std::optional<std::string> sweep_parameter;
  std::optional<double> sweep_value;

  // Mean whole-market reward over the last `fraction` of episodes.
  double FinalAverage(double fraction = 0.1) const;
  // First episode whose trailing-window mean reaches target, or nullopt.
  std::optional<int> EpisodesToReach(double target, int window = 10) const;

  bool operator==(const RunRecord&) const = default;
};

// Records sorted by run_id then seed; order-independent aggregation.
void SortRecords(std::vector<RunRecord>& records);

// ---- runs ------------------------------------------------------------------

RunRecord RunSolve(const ExperimentConfig& config, std::uint64_t seed,
                   Execution exec = Execution::kParallel);
RunRecord RunTraining(const ExperimentConfig& config, const std::string& algorithm,
                      std::uint64_t seed);
// Every (algorithm, seed) cell, cells in parallel.
std::vector<RunRecord> RunCompare(const ExperimentConfig& config,
                                  Execution exec = Execution::kParallel);

struct SweepPoint {
  double value = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  std::size_t count = 0;
};

struct SweepResult {
  std::vector<RunRecord> records;
  std::vector<SweepPoint> solve_curve;
  std::vector<SweepPoint> train_curve;  // empty unless spec.train
};

ExperimentConfig ApplySweepValue(const ExperimentConfig& config, SweepParameter p,
                                 double value);
SweepResult RunSweep(const ExperimentConfig& config, const SweepSpec& spec,
                     Execution exec = Execution::kParallel);

// ---- persistence -----------------------------------------------------------

inline constexpr const char* kCsvHeader =
    "run_id,seed,episode,agent_id,reward,avg_reward,sparsity,theoretical,wall_ms";

std::string ToCsv(const std::vector<RunRecord>& records);
std::string ToJsonl(const std::vector<RunRecord>& records);
nlohmann::json RecordToJson(const RunRecord& record);
RunRecord RecordFromJson(const nlohmann::json& j);
std::vector<RunRecord> ParseJsonl(const std::string& text);

struct CsvRow {
  std::string run_id;
  std::uint64_t seed = 0;
  EpisodeRow row;
  double theoretical = 0.0;
  double wall_ms = 0.0;
  bool operator==(const CsvRow&) const = default;
};
std::vector<CsvRow> ParseCsv(const std::string& text);

nlohmann::json Summary(const ExperimentConfig& config,
                       const std::vector<RunRecord>& records);

// Writes results.csv, results.jsonl and summary.json under dir.
void EmitResults(const std::filesystem::path& dir, const ExperimentConfig& config,
                 const std::vector<RunRecord>& records);

// ---- commands --------------------------------------------------------------

struct CommandOptions {
  std::filesystem::path config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::string> algorithm;
  bool strict = false;
};

// Returns the process exit code.
int RunCommand(const std::string& command, const CommandOptions& options);

}  // namespace tinymadrl::harness

#endif  // TINYMADRL_HARNESS_HPP_
