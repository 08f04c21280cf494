#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "tinymadrl/harness.hpp"

namespace tinymadrl::harness {

using nlohmann::json;

namespace {

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double ParseDouble(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("CSV: bad " + what + " '" + s + "'");
  }
}

template <typename Int>
Int ParseInt(const std::string& s, const std::string& what) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("CSV: bad " + what + " '" + s + "'");
  }
  return v;
}

double Median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

std::string ToCsv(const std::vector<RunRecord>& records) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : records) {
    for (const auto& row : r.rows) {
      out += r.run_id + "," + std::to_string(r.seed) + "," + std::to_string(row.episode) + ",";
      out += row.agent_id ? std::to_string(*row.agent_id) : "";
      out += "," + Num(row.reward) + "," + Num(row.avg_reward) + ",";
      out += row.sparsity ? Num(*row.sparsity) : "";
      out += "," + Num(r.theoretical) + "," + Num(r.wall_ms) + "\n";
    }
  }
  return out;
}

std::vector<CsvRow> ParseCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::runtime_error("CSV: missing or unexpected header");
  }
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      f.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 9) throw std::runtime_error("CSV: expected 9 fields in '" + line + "'");
    CsvRow r;
    r.run_id = f[0];
    r.seed = ParseInt<std::uint64_t>(f[1], "seed");
    r.row.episode = ParseInt<int>(f[2], "episode");
    if (!f[3].empty()) r.row.agent_id = ParseInt<int>(f[3], "agent_id");
    r.row.reward = ParseDouble(f[4], "reward");
    r.row.avg_reward = ParseDouble(f[5], "avg_reward");
    if (!f[6].empty()) r.row.sparsity = ParseDouble(f[6], "sparsity");
    r.theoretical = ParseDouble(f[7], "theoretical");
    r.wall_ms = ParseDouble(f[8], "wall_ms");
    rows.push_back(std::move(r));
  }
  return rows;
}

json RecordToJson(const RunRecord& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"episode", row.episode},
                    {"agent_id", row.agent_id ? json(*row.agent_id) : json(nullptr)},
                    {"reward", row.reward},
                    {"avg_reward", row.avg_reward},
                    {"sparsity", row.sparsity ? json(*row.sparsity) : json(nullptr)}});
  }
  json j = {{"run_id", r.run_id},
            {"kind", r.kind},
            {"config_hash", r.config_hash},
            {"seed", r.seed},
            {"theoretical", r.theoretical},
            {"consistent", r.consistent},
            {"diagnostics", r.diagnostics},
            {"wall_ms", r.wall_ms},
            {"rows", rows}};
  if (r.sweep_parameter) j["sweep_parameter"] = *r.sweep_parameter;
  if (r.sweep_value) j["sweep_value"] = *r.sweep_value;
  return j;
}

RunRecord RecordFromJson(const json& j) {
  RunRecord r;
  r.run_id = j.at("run_id").get<std::string>();
  r.kind = j.at("kind").get<std::string>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.theoretical = j.at("theoretical").get<double>();
  r.consistent = j.at("consistent").get<bool>();
  r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
  r.wall_ms = j.at("wall_ms").get<double>();
  if (j.contains("sweep_parameter")) r.sweep_parameter = j.at("sweep_parameter").get<std::string>();
  if (j.contains("sweep_value")) r.sweep_value = j.at("sweep_value").get<double>();
  for (const auto& row : j.at("rows")) {
    EpisodeRow e;
    e.episode = row.at("episode").get<int>();
    if (!row.at("agent_id").is_null()) e.agent_id = row.at("agent_id").get<int>();
    e.reward = row.at("reward").get<double>();
    e.avg_reward = row.at("avg_reward").get<double>();
    if (!row.at("sparsity").is_null()) e.sparsity = row.at("sparsity").get<double>();
    r.rows.push_back(e);
  }
  return r;
}

std::string ToJsonl(const std::vector<RunRecord>& records) {
  std::string out;
  for (const auto& r : records) out += RecordToJson(r).dump() + "\n";
  return out;
}

std::vector<RunRecord> ParseJsonl(const std::string& text) {
  std::vector<RunRecord> records;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) records.push_back(RecordFromJson(json::parse(line)));
  }
  return records;
}

json Summary(const ExperimentConfig& config, const std::vector<RunRecord>& records) {
  std::map<std::string, std::vector<const RunRecord*>> by_kind;
  for (const auto& r : records) by_kind[r.kind].push_back(&r);

  json algos = json::object();
  for (const auto& [kind, runs] : by_kind) {
    std::vector<double> finals;
    std::vector<double> theory;
    std::vector<double> percent;
    std::vector<double> reach;
    bool consistent = true;
    json per_seed = json::array();
    for (const RunRecord* r : runs) {
      const double f = r->FinalAverage();
      finals.push_back(f);
      theory.push_back(r->theoretical);
      if (r->theoretical > 0.0) percent.push_back(100.0 * f / r->theoretical);
      consistent = consistent && r->consistent;
      json s = {{"seed", r->seed}, {"final_avg_reward", f}, {"theoretical", r->theoretical}};
      if (r->sweep_value) s["sweep_value"] = *r->sweep_value;
      if (kind != "solve") {
        const auto e = r->EpisodesToReach(0.8 * r->theoretical);
        s["episodes_to_80pct"] = e ? json(*e) : json(nullptr);
        if (e) reach.push_back(*e);
      }
      per_seed.push_back(s);
    }
    json entry = {{"runs", runs.size()},
                  {"final_avg_reward_median", Median(finals)},
                  {"theoretical_median", Median(theory)},
                  {"percent_of_theoretical_median", Median(percent)},
                  {"all_consistent", consistent},
                  {"per_seed", per_seed}};
    if (kind != "solve") {
      entry["episodes_to_80pct_median"] =
          reach.size() == runs.size() ? json(Median(reach)) : json(nullptr);
    }
    algos[kind] = entry;
  }
  return {{"name", config.name},
          {"config_hash", ConfigHash(config)},
          {"seeds", config.seeds},
          {"algorithms", algos}};
}

void EmitResults(const std::filesystem::path& dir, const ExperimentConfig& config,
                 const std::vector<RunRecord>& records) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  WriteFile(dir / "results.csv", ToCsv(records));
  WriteFile(dir / "results.jsonl", ToJsonl(records));
  WriteFile(dir / "summary.json", Summary(config, records).dump(2) + "\n");
}

}  // namespace tinymadrl::harness
