#include <fstream>
#include <set>
#include <sstream>

#include "tinymadrl/harness.hpp"

namespace tinymadrl::harness {

using nlohmann::json;

namespace {

std::string JoinLines(const std::vector<std::string>& lines) {
  std::string out = "invalid config:";
  for (const auto& l : lines) out += "\n  " + l;
  return out;
}

// Walks one JSON object, collecting type/range errors instead of throwing on
// the first one, and reports keys nobody asked for.
class Reader {
 public:
  Reader(const json& j, std::string path, std::vector<std::string>& errors)
      : j_(j), path_(std::move(path)), errors_(errors) {
    if (!j_.is_object()) Error("", "expected an object");
  }

  ~Reader() {
    if (!j_.is_object()) return;
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) Error(key, "unknown key");
    }
  }

  bool Has(const std::string& key) {
    seen_.insert(key);
    return j_.is_object() && j_.contains(key);
  }

  void Number(const std::string& key, double& out, std::optional<double> min = {},
              std::optional<double> max = {}) {
    if (!Has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) return Error(key, "expected a number");
    const double x = v.get<double>();
    if (min && x < *min) return Error(key, Fmt("must be >= ", *min));
    if (max && x > *max) return Error(key, Fmt("must be <= ", *max));
    out = x;
  }

  template <typename Int>
  void Integer(const std::string& key, Int& out, long long min) {
    if (!Has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) return Error(key, "expected an integer");
    const long long x = v.get<long long>();
    if (x < min) return Error(key, Fmt("must be >= ", static_cast<double>(min)));
    out = static_cast<Int>(x);
  }

  void Bool(const std::string& key, bool& out) {
    if (!Has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) return Error(key, "expected true or false");
    out = v.get<bool>();
  }

  void String(const std::string& key, std::string& out) {
    if (!Has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) return Error(key, "expected a string");
    out = v.get<std::string>();
  }

  void RangeField(const std::string& key, Range& out) {
    if (!Has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      return Error(key, "expected [low, high]");
    }
    out = Range{v[0].get<double>(), v[1].get<double>()};
  }

  template <typename Fn>
  void Object(const std::string& key, Fn&& fn) {
    if (!Has(key)) return;
    Reader child(j_.at(key), Path(key), errors_);
    if (j_.at(key).is_object()) fn(child);
  }

  const json& raw(const std::string& key) { return j_.at(key); }
  std::string Path(const std::string& key) const {
    return path_.empty() ? key : key.empty() ? path_ : path_ + "." + key;
  }
  void Error(const std::string& key, const std::string& msg) {
    errors_.push_back(Path(key) + ": " + msg);
  }

 private:
  static std::string Fmt(const char* prefix, double v) {
    std::ostringstream s;
    s << prefix << v;
    return s.str();
  }

  const json& j_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

// Runs a Validate() that throws invalid_argument and records its message.
template <typename T>
void Capture(const T& value, const std::string& where, std::vector<std::string>& errors) {
  try {
    value.Validate();
  } catch (const std::invalid_argument& e) {
    errors.push_back(where + ": " + e.what());
  }
}

const char* kRangeKeys[] = {"noise_dbm", "channel_gain_db", "transmit_power_dbm",
                            "similarity", "ssim_threshold", "delta",
                            "bandwidth_cost", "price_cap", "budget"};

std::vector<Range*> RangeSlots(SamplingRanges& r) {
  return {&r.noise_dbm, &r.channel_gain_db, &r.transmit_power_dbm,
          &r.similarity, &r.ssim_threshold, &r.delta,
          &r.bandwidth_cost, &r.price_cap, &r.budget};
}

std::string WarmupName(env::WarmupPolicy w) {
  return w == env::WarmupPolicy::kZeros ? "zeros" : "uniform_random";
}

const std::set<std::string> kAlgorithms{"tiny_madrl", "ppo", "greedy", "random"};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(JoinLines(errors)), errors_(std::move(errors)) {}

std::string ToString(SweepParameter p) {
  switch (p) {
    case SweepParameter::kCost: return "c";
    case SweepParameter::kPriceCap: return "p_max";
    case SweepParameter::kNumUavs: return "I";
    case SweepParameter::kNumRsus: return "J";
  }
  return "?";
}

SweepParameter SweepParameterFromString(const std::string& name) {
  if (name == "c") return SweepParameter::kCost;
  if (name == "p_max") return SweepParameter::kPriceCap;
  if (name == "I") return SweepParameter::kNumUavs;
  if (name == "J") return SweepParameter::kNumRsus;
  throw std::invalid_argument("unknown sweep parameter '" + name + "' (expected c, p_max, I or J)");
}

void ValidateRanges(const SamplingRanges& ranges, std::vector<std::string>& errors,
                    const std::string& where) {
  SamplingRanges copy = ranges;
  const auto slots = RangeSlots(copy);
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const Range& r = *slots[k];
    if (!(r.low <= r.high)) {
      errors.push_back(where + "." + kRangeKeys[k] + ": low must not exceed high");
    }
  }
  auto positive = [&](const Range& r, const char* key) {
    if (!(r.low > 0.0)) errors.push_back(where + "." + key + ": values must be > 0");
  };
  positive(ranges.delta, "delta");
  positive(ranges.bandwidth_cost, "bandwidth_cost");
  positive(ranges.budget, "budget");
  positive(ranges.ssim_threshold, "ssim_threshold");
  if (!(ranges.ssim_threshold.high < 1.0)) {
    errors.push_back(where + ".ssim_threshold: must stay below 1");
  }
  if (ranges.similarity.low < 0.0 || ranges.similarity.high > 1.0) {
    errors.push_back(where + ".similarity: must lie within [0, 1]");
  }
  if (ranges.bandwidth_cost.high >= ranges.price_cap.low) {
    errors.push_back(where + ": bandwidth_cost range must lie below the price_cap range");
  }
}

ExperimentConfig ConfigFromJson(const json& j) {
  ExperimentConfig cfg;
  std::vector<std::string> errors;
  {
    Reader root(j, "", errors);
    if (!root.Has("schema_version")) {
      root.Error("schema_version", "required");
    } else {
      root.Integer("schema_version", cfg.schema_version, 0);
      if (cfg.schema_version != kSchemaVersion) {
        root.Error("schema_version", "unsupported version " +
                                         std::to_string(cfg.schema_version) +
                                         " (expected " + std::to_string(kSchemaVersion) + ")");
      }
    }
    root.String("name", cfg.name);
    root.String("output_dir", cfg.output_dir);
    if (root.Has("seeds")) {
      const json& s = root.raw("seeds");
      cfg.seeds.clear();
      if (!s.is_array() || s.empty()) {
        root.Error("seeds", "expected a non-empty array of non-negative integers");
      } else {
        for (const auto& v : s) {
          if (!v.is_number_unsigned()) {
            root.Error("seeds", "expected a non-empty array of non-negative integers");
            break;
          }
          cfg.seeds.push_back(v.get<std::uint64_t>());
        }
      }
    }
    if (root.Has("algorithms")) {
      const json& a = root.raw("algorithms");
      cfg.algorithms.clear();
      if (!a.is_array() || a.empty()) {
        root.Error("algorithms", "expected a non-empty array");
      } else {
        for (const auto& v : a) {
          if (!v.is_string() || !kAlgorithms.count(v.get<std::string>())) {
            root.Error("algorithms", "entries must be tiny_madrl, ppo, greedy or random");
            break;
          }
          cfg.algorithms.push_back(v.get<std::string>());
        }
      }
    }
    root.Object("solver", [&](Reader& r) {
      r.Number("tolerance", cfg.solver.tolerance, 0.0);
      r.Integer("max_iterations", cfg.solver.max_iterations, 1);
    });
    root.Object("verify", [&](Reader& r) {
      r.Integer("probes", cfg.verify_probes, 0);
      r.Number("tolerance", cfg.verify_tolerance, 0.0);
    });

    root.Object("instance", [&](Reader& r) {
      auto& inst = cfg.instance;
      r.Integer("num_uavs", inst.num_uavs, 1);
      r.Integer("num_rsus", inst.num_rsus, 1);
      r.Object("ranges", [&](Reader& rr) {
        const auto slots = RangeSlots(inst.ranges);
        for (std::size_t k = 0; k < slots.size(); ++k) rr.RangeField(kRangeKeys[k], *slots[k]);
      });
      if (r.Has("bandwidth_cost")) {
        double v = 0.0;
        r.Number("bandwidth_cost", v);
        if (!(v > 0.0)) r.Error("bandwidth_cost", "must be > 0");
        inst.bandwidth_cost = v;
      }
      if (r.Has("price_cap")) {
        double v = 0.0;
        r.Number("price_cap", v);
        inst.price_cap = v;
      }
      if (r.Has("fixed")) {
        try {
          inst.fixed = InstanceFromJson(r.raw("fixed"));
          inst.num_uavs = static_cast<int>(inst.fixed->num_uavs());
          inst.num_rsus = static_cast<int>(inst.fixed->num_rsus());
        } catch (const std::exception& e) {
          r.Error("fixed", e.what());
        }
      }
    });

    root.Object("training", [&](Reader& r) {
      auto& t = cfg.training;
      r.Integer("episodes", t.episodes, 1);
      r.Object("env", [&](Reader& e) {
        e.Integer("history_length", t.env.history_length, 1);
        e.Integer("episode_length", t.env.episode_length, 1);
        e.Number("demand_scale", t.env.demand_scale);
        std::string warmup = WarmupName(t.env.warmup);
        e.String("warmup", warmup);
        if (warmup == "zeros") {
          t.env.warmup = env::WarmupPolicy::kZeros;
        } else if (warmup == "uniform_random") {
          t.env.warmup = env::WarmupPolicy::kUniformRandom;
        } else {
          e.Error("warmup", "expected zeros or uniform_random");
        }
      });
      r.Object("ppo", [&](Reader& p) {
        auto& c = t.ppo;
        p.Number("discount", c.discount);
        p.Number("clip", c.clip);
        p.Number("actor_lr", c.actor_lr);
        p.Number("critic_lr", c.critic_lr);
        p.Integer("rollout_size", c.rollout_size, 1);
        p.Integer("update_epochs", c.update_epochs, 1);
        p.Integer("minibatch_size", c.minibatch_size, 1);
        p.Number("policy_std_start", c.policy_std_start);
        p.Number("policy_std_end", c.policy_std_end);
        p.Bool("use_bias", c.use_bias);
        p.Bool("normalize_advantages", c.normalize_advantages);
        p.Number("max_grad_norm", c.max_grad_norm);
        if (p.Has("hidden_sizes")) {
          const json& h = p.raw("hidden_sizes");
          if (!h.is_array() || h.empty()) {
            p.Error("hidden_sizes", "expected a non-empty array of positive integers");
          } else {
            c.hidden_sizes.clear();
            for (const auto& v : h) {
              if (!v.is_number_unsigned() || v.get<std::size_t>() == 0) {
                p.Error("hidden_sizes", "expected a non-empty array of positive integers");
                break;
              }
              c.hidden_sizes.push_back(v.get<std::size_t>());
            }
          }
        }
        if (p.Has("optimizer")) {
          std::string name;
          p.String("optimizer", name);
          try {
            c.optimizer = agents::OptimizerFromString(name);
          } catch (const std::invalid_argument& e) {
            p.Error("optimizer", e.what());
          }
        }
      });
      r.Object("pruning", [&](Reader& p) {
        p.Number("initial_sparsity", t.schedule.initial_sparsity);
        p.Number("target_sparsity", t.schedule.target_sparsity);
        p.Integer("start_epoch", t.schedule.start_epoch, 0);
        p.Integer("total_steps", t.schedule.total_steps, 1);
        p.Integer("frequency", t.schedule.frequency, 1);
        p.Integer("floor_neurons", t.floor_neurons, 1);
      });
      r.Object("greedy", [&](Reader& g) {
        g.Integer("levels", t.greedy.levels, 1);
        g.Number("epsilon", t.greedy.epsilon, 0.0, 1.0);
      });
    });

    root.Object("sweep", [&](Reader& r) {
      SweepSpec spec;
      std::string parameter = ToString(spec.parameter);
      r.String("parameter", parameter);
      try {
        spec.parameter = SweepParameterFromString(parameter);
      } catch (const std::invalid_argument& e) {
        r.Error("parameter", e.what());
      }
      if (r.Has("grid")) {
        const json& g = r.raw("grid");
        spec.grid.clear();
        if (!g.is_array() || g.empty()) {
          r.Error("grid", "expected a non-empty array of numbers");
        } else {
          for (const auto& v : g) {
            if (!v.is_number()) {
              r.Error("grid", "expected a non-empty array of numbers");
              break;
            }
            spec.grid.push_back(v.get<double>());
          }
        }
      }
      for (std::size_t k = 1; k < spec.grid.size(); ++k) {
        if (!(spec.grid[k] > spec.grid[k - 1])) {
          r.Error("grid", "values must be strictly increasing");
          break;
        }
      }
      const bool counts = spec.parameter == SweepParameter::kNumUavs ||
                          spec.parameter == SweepParameter::kNumRsus;
      for (double v : spec.grid) {
        if (counts && (v < 1.0 || v != static_cast<double>(static_cast<long long>(v)))) {
          r.Error("grid", "I and J grids need positive integers");
          break;
        }
        if (!counts && !(v > 0.0)) {
          r.Error("grid", "values must be > 0");
          break;
        }
      }
      r.Bool("train", spec.train);
      r.String("algorithm", spec.algorithm);
      if (!kAlgorithms.count(spec.algorithm)) {
        r.Error("algorithm", "expected tiny_madrl, ppo, greedy or random");
      }
      cfg.sweep = spec;
    });
  }

  if (!cfg.instance.fixed) ValidateRanges(cfg.instance.ranges, errors, "instance.ranges");
  const auto& ranges = cfg.instance.ranges;
  if (cfg.instance.bandwidth_cost && cfg.instance.price_cap &&
      *cfg.instance.bandwidth_cost >= *cfg.instance.price_cap) {
    errors.push_back("instance: bandwidth_cost must be below price_cap");
  } else if (cfg.instance.bandwidth_cost && !cfg.instance.price_cap &&
             *cfg.instance.bandwidth_cost >= ranges.price_cap.low) {
    errors.push_back("instance.bandwidth_cost: must be below the price_cap range");
  } else if (cfg.instance.price_cap && !cfg.instance.bandwidth_cost &&
             *cfg.instance.price_cap <= ranges.bandwidth_cost.high) {
    errors.push_back("instance.price_cap: must exceed the bandwidth_cost range");
  }
  Capture(cfg.training.env, "training.env", errors);
  Capture(cfg.training.ppo, "training.ppo", errors);
  Capture(cfg.training.schedule, "training.pruning", errors);
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError({path.string() + ": " + e.what()});
  }
  return ConfigFromJson(j);
}

json ToJson(const ExperimentConfig& cfg) {
  json ranges = json::object();
  SamplingRanges r = cfg.instance.ranges;
  const auto slots = RangeSlots(r);
  for (std::size_t k = 0; k < slots.size(); ++k) {
    ranges[kRangeKeys[k]] = {slots[k]->low, slots[k]->high};
  }
  json instance = {{"num_uavs", cfg.instance.num_uavs},
                   {"num_rsus", cfg.instance.num_rsus},
                   {"ranges", ranges}};
  if (cfg.instance.bandwidth_cost) instance["bandwidth_cost"] = *cfg.instance.bandwidth_cost;
  if (cfg.instance.price_cap) instance["price_cap"] = *cfg.instance.price_cap;
  if (cfg.instance.fixed) instance["fixed"] = InstanceToJson(*cfg.instance.fixed);

  const auto& t = cfg.training;
  const auto& p = t.ppo;
  json training = {
      {"episodes", t.episodes},
      {"env",
       {{"history_length", t.env.history_length},
        {"episode_length", t.env.episode_length},
        {"demand_scale", t.env.demand_scale},
        {"warmup", WarmupName(t.env.warmup)}}},
      {"ppo",
       {{"discount", p.discount},
        {"clip", p.clip},
        {"actor_lr", p.actor_lr},
        {"critic_lr", p.critic_lr},
        {"rollout_size", p.rollout_size},
        {"update_epochs", p.update_epochs},
        {"minibatch_size", p.minibatch_size},
        {"policy_std_start", p.policy_std_start},
        {"policy_std_end", p.policy_std_end},
        {"hidden_sizes", p.hidden_sizes},
        {"use_bias", p.use_bias},
        {"normalize_advantages", p.normalize_advantages},
        {"max_grad_norm", p.max_grad_norm},
        {"optimizer", agents::ToString(p.optimizer)}}},
      {"pruning",
       {{"initial_sparsity", t.schedule.initial_sparsity},
        {"target_sparsity", t.schedule.target_sparsity},
        {"start_epoch", t.schedule.start_epoch},
        {"total_steps", t.schedule.total_steps},
        {"frequency", t.schedule.frequency},
        {"floor_neurons", t.floor_neurons}}},
      {"greedy", {{"levels", t.greedy.levels}, {"epsilon", t.greedy.epsilon}}}};

  json out = {{"schema_version", cfg.schema_version},
              {"name", cfg.name},
              {"seeds", cfg.seeds},
              {"algorithms", cfg.algorithms},
              {"output_dir", cfg.output_dir},
              {"solver",
               {{"tolerance", cfg.solver.tolerance},
                {"max_iterations", cfg.solver.max_iterations}}},
              {"verify",
               {{"probes", cfg.verify_probes}, {"tolerance", cfg.verify_tolerance}}},
              {"instance", instance},
              {"training", training}};
  if (cfg.sweep) {
    out["sweep"] = {{"parameter", ToString(cfg.sweep->parameter)},
                    {"grid", cfg.sweep->grid},
                    {"train", cfg.sweep->train},
                    {"algorithm", cfg.sweep->algorithm}};
  }
  return out;
}

std::string ConfigHash(const ExperimentConfig& config) {
  // Seeds and the output location do not change what a run computes.
  json j = ToJson(config);
  j.erase("seeds");
  j.erase("output_dir");
  const std::string text = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << h;
  return s.str();
}

}  // namespace tinymadrl::harness
