#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "tinymadrl/agents.hpp"

namespace tinymadrl::agents {
namespace {

constexpr double kHalfLogTwoPi = 0.91893853320467274178;

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double GaussianLogProb(std::span<const double> action, std::span<const double> mean,
                       double std_dev) {
  double total = 0.0;
  for (std::size_t k = 0; k < action.size(); ++k) {
    const double z = (action[k] - mean[k]) / std_dev;
    total += -0.5 * z * z - std::log(std_dev) - kHalfLogTwoPi;
  }
  return total;
}

// Rescales grads so their global L2 norm is at most max_norm.
void ClipNorm(nn::Gradients& grads, double max_norm) {
  if (max_norm <= 0.0) return;
  const double norm = std::sqrt(grads.SquaredNorm());
  if (norm > max_norm) grads.Scale(max_norm / norm);
}

bool AllFinite(const nn::Gradients& g) { return std::isfinite(g.SquaredNorm()); }

std::string SaveRng(const Rng& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

Rng LoadRng(const std::string& state) {
  Rng rng;
  std::istringstream in(state);
  in >> rng;
  return rng;
}

}  // namespace

std::vector<PriceBox> BoxesForRsu(const game::GameInstance& instance, std::size_t rsu) {
  return std::vector<PriceBox>(instance.num_uavs(),
                               PriceBox{instance.cost(rsu), instance.cap(rsu)});
}

void PpoConfig::Validate() const {
  if (!(discount >= 0.0 && discount < 1.0)) {
    throw std::invalid_argument("PpoConfig: discount must lie in [0, 1)");
  }
  if (!(clip > 0.0 && clip < 1.0)) throw std::invalid_argument("PpoConfig: clip must lie in (0, 1)");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) {
    throw std::invalid_argument("PpoConfig: learning rates must be > 0");
  }
  if (rollout_size < 1 || update_epochs < 1 || minibatch_size < 1) {
    throw std::invalid_argument("PpoConfig: rollout_size, update_epochs, minibatch_size must be >= 1");
  }
  if (!(policy_std_start > 0.0) || !(policy_std_end > 0.0)) {
    throw std::invalid_argument("PpoConfig: policy std must be > 0");
  }
  if (hidden_sizes.empty()) throw std::invalid_argument("PpoConfig: need at least one hidden layer");
  for (auto h : hidden_sizes) {
    if (h == 0) throw std::invalid_argument("PpoConfig: hidden sizes must be > 0");
  }
}

double ClipRatio(double ratio, double clip) {
  if (ratio > 1.0 + clip) return 1.0 + clip;
  if (ratio < 1.0 - clip) return 1.0 - clip;
  return ratio;
}

double ClippedSurrogate(double ratio, double advantage, double clip) {
  return std::min(ratio * advantage, ClipRatio(ratio, clip) * advantage);
}

Advantages ComputeAdvantages(std::span<const RolloutRecord> records,
                             double discount, bool normalize, double reward_scale) {
  const std::size_t n = records.size();
  Advantages out;
  out.returns.resize(n);
  out.advantages.resize(n);
  double running = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    if (records[k].episode_end || k + 1 == n) running = 0.0;
    running = records[k].reward / reward_scale + discount * running;
    out.returns[k] = running;
    out.advantages[k] = running - records[k].value;
  }
  if (normalize && n > 1) {
    const double mean =
        std::accumulate(out.advantages.begin(), out.advantages.end(), 0.0) / n;
    double var = 0.0;
    for (double a : out.advantages) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / n);
    for (double& a : out.advantages) a = sd > 1e-12 ? (a - mean) / sd : a - mean;
  }
  return out;
}

PpoAgent::PpoAgent(std::size_t observation_size, std::vector<PriceBox> boxes,
                   PpoConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      boxes_(std::move(boxes)),
      buffer_(static_cast<std::size_t>(std::max(config_.rollout_size, 1))),
      shuffle_rng_(MakeRng(seed, "agent-shuffle")),
      policy_std_(config_.policy_std_start) {
  config_.Validate();
  if (boxes_.empty()) throw std::invalid_argument("PpoAgent: empty action space");
  Rng init = MakeRng(seed, "agent-init");
  std::vector<std::size_t> actor_sizes{observation_size};
  actor_sizes.insert(actor_sizes.end(), config_.hidden_sizes.begin(),
                     config_.hidden_sizes.end());
  std::vector<std::size_t> critic_sizes = actor_sizes;
  actor_sizes.push_back(boxes_.size());
  critic_sizes.push_back(1);
  actor_ = nn::PrunableMlp::Create(actor_sizes, nn::Activation::kRelu,
                                   nn::Activation::kIdentity, config_.use_bias, init, 0.01);
  critic_ = nn::PrunableMlp::Create(critic_sizes, nn::Activation::kRelu,
                                    nn::Activation::kIdentity, config_.use_bias, init, 1.0);
  actor_opt_ = Optimizer(config_.optimizer, config_.actor_lr, actor_);
  critic_opt_ = Optimizer(config_.optimizer, config_.critic_lr, critic_);
}

std::vector<double> PpoAgent::Squash(std::span<const double> logits) const {
  std::vector<double> mean(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) mean[k] = Sigmoid(logits[k]);
  return mean;
}

std::vector<double> PpoAgent::ToPrices(std::span<const double> action) const {
  std::vector<double> prices(action.size());
  for (std::size_t k = 0; k < action.size(); ++k) {
    const double a = std::clamp(action[k], 0.0, 1.0);
    prices[k] = std::clamp(boxes_[k].low + a * boxes_[k].width(), boxes_[k].low,
                           boxes_[k].high);
  }
  return prices;
}

ActResult PpoAgent::Act(const env::Observation& observation, Rng& rng) const {
  ActResult out;
  const auto mean = Squash(actor_.MaskedPredict(observation));
  out.policy_std = policy_std_;
  out.action = mean;
  if (policy_std_ > 0.0) {
    std::normal_distribution<double> noise(0.0, 1.0);
    for (auto& a : out.action) a += policy_std_ * noise(rng);
    out.log_prob = GaussianLogProb(out.action, mean, policy_std_);
  }
  out.prices = ToPrices(out.action);
  out.value = critic_.MaskedPredict(observation)[0];
  return out;
}

std::vector<double> PpoAgent::MeanPrices(const env::Observation& observation) const {
  return ToPrices(Squash(actor_.MaskedPredict(observation)));
}

void PpoAgent::Record(const env::Observation& observation, const ActResult& act,
                      double reward, bool episode_end) {
  reward_scale_ = std::max(reward_scale_, std::abs(reward));
  buffer_.Push(RolloutRecord{observation, act.action, act.log_prob, act.policy_std,
                             reward, act.value, episode_end});
}

void PpoAgent::SetProgress(double fraction) {
  const double f = std::clamp(fraction, 0.0, 1.0);
  policy_std_ = config_.policy_std_start + f * (config_.policy_std_end - config_.policy_std_start);
}

UpdateDiagnostics PpoAgent::Update() {
  UpdateDiagnostics diag;
  const auto& records = buffer_.records();
  const std::size_t n = records.size();
  if (n == 0) return diag;

  const nn::PrunableMlp actor_backup = actor_;
  const nn::PrunableMlp critic_backup = critic_;
  const Optimizer actor_opt_backup = actor_opt_;
  const Optimizer critic_opt_backup = critic_opt_;

  // The critic learns normalized returns and the recorded value estimates
  // are in those units too.
  const double scale = reward_scale_ > 1e-12 ? reward_scale_ : 1.0;
  const Advantages adv =
      ComputeAdvantages(records, config_.discount, config_.normalize_advantages, scale);

  auto ratio_of = [&](std::size_t k, const nn::ForwardCache& cache,
                      std::vector<double>& mean) {
    mean = Squash(cache.output());
    const double log_prob = GaussianLogProb(records[k].action, mean, records[k].policy_std);
    return std::exp(log_prob - records[k].log_prob);
  };

  std::vector<double> mean;
  for (std::size_t k = 0; k < n; ++k) {
    const auto cache = actor_.Forward(records[k].observation, true);
    diag.first_epoch_max_ratio_error =
        std::max(diag.first_epoch_max_ratio_error, std::abs(ratio_of(k, cache, mean) - 1.0));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = std::min<std::size_t>(n, config_.minibatch_size);
  std::size_t clipped = 0;
  std::size_t evaluated = 0;
  for (int epoch = 0; epoch < config_.update_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng_);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      const double inv = 1.0 / static_cast<double>(end - start);
      nn::Gradients actor_grad = actor_.ZeroGradients();
      nn::Gradients critic_grad = critic_.ZeroGradients();
      double objective = 0.0;
      double critic_loss = 0.0;
      for (std::size_t idx = start; idx < end; ++idx) {
        const std::size_t k = order[idx];
        const RolloutRecord& r = records[k];
        const double a_hat = adv.advantages[k];

        const auto cache = actor_.Forward(r.observation, true);
        const double f = ratio_of(k, cache, mean);
        objective += ClippedSurrogate(f, a_hat, config_.clip) * inv;
        ++evaluated;
        // The unclipped branch is the active minimum exactly when clipping
        // does not lower the objective; otherwise the gradient vanishes.
        if (f * a_hat <= ClipRatio(f, config_.clip) * a_hat) {
          std::vector<double> out_grad(mean.size());
          const double var = r.policy_std * r.policy_std;
          for (std::size_t m = 0; m < mean.size(); ++m) {
            const double dlogp_dmean = (r.action[m] - mean[m]) / var;
            // descend on the negated surrogate
            out_grad[m] = -inv * a_hat * f * dlogp_dmean * mean[m] * (1.0 - mean[m]);
          }
          actor_grad.Accumulate(actor_.Backward(cache, out_grad));
        } else {
          ++clipped;
        }

        const auto vcache = critic_.Forward(r.observation, true);
        const double err = vcache.output()[0] - adv.returns[k];
        critic_loss += 0.5 * err * err * inv;
        const double vgrad[1] = {err * inv};
        critic_grad.Accumulate(critic_.Backward(vcache, vgrad));
      }
      if (!std::isfinite(objective) || !std::isfinite(critic_loss) ||
          !AllFinite(actor_grad) || !AllFinite(critic_grad)) {
        actor_ = actor_backup;
        critic_ = critic_backup;
        actor_opt_ = actor_opt_backup;
        critic_opt_ = critic_opt_backup;
        buffer_.Clear();
        diag.aborted = true;
        diag.message = "non-finite loss or gradient; update rolled back";
        return diag;
      }
      ClipNorm(actor_grad, config_.max_grad_norm);
      ClipNorm(critic_grad, config_.max_grad_norm);
      actor_opt_.Step(actor_, actor_grad);
      critic_opt_.Step(critic_, critic_grad);
      diag.actor_objective = objective;
      diag.critic_loss = critic_loss;
    }
  }
  diag.clip_fraction =
      evaluated > 0 ? static_cast<double>(clipped) / static_cast<double>(evaluated) : 0.0;
  buffer_.Clear();
  return diag;
}

void PpoAgent::CompactActor() {
  actor_ = nn::Compact(actor_);
  actor_opt_.Reset(actor_);
}

nlohmann::json PpoAgent::Checkpoint() const {
  return {{"format", "tinymadrl.ppo_agent"},
          {"version", 1},
          {"actor", nn::ToJson(actor_)},
          {"critic", nn::ToJson(critic_)},
          {"actor_optimizer", actor_opt_.ToJson()},
          {"critic_optimizer", critic_opt_.ToJson()},
          {"policy_std", policy_std_},
          {"reward_scale", reward_scale_},
          {"shuffle_rng", SaveRng(shuffle_rng_)}};
}

void PpoAgent::Restore(const nlohmann::json& j) {
  if (j.value("format", "") != "tinymadrl.ppo_agent" || j.value("version", 0) != 1) {
    throw std::runtime_error("PpoAgent::Restore: unsupported checkpoint");
  }
  auto actor = nn::MlpFromJson(j.at("actor"));
  auto critic = nn::MlpFromJson(j.at("critic"));
  if (actor.output_size() != boxes_.size()) {
    throw std::runtime_error("PpoAgent::Restore: actor output does not match action space");
  }
  actor_ = std::move(actor);
  critic_ = std::move(critic);
  actor_opt_ = Optimizer::FromJson(j.at("actor_optimizer"));
  critic_opt_ = Optimizer::FromJson(j.at("critic_optimizer"));
  policy_std_ = j.at("policy_std").get<double>();
  reward_scale_ = j.at("reward_scale").get<double>();
  shuffle_rng_ = LoadRng(j.at("shuffle_rng").get<std::string>());
  buffer_.Clear();
}

TinyMadrlAgent::TinyMadrlAgent(std::size_t observation_size,
                               std::vector<PriceBox> boxes, PpoConfig config,
                               nn::PruneSchedule schedule, std::size_t floor_neurons,
                               int final_epoch, std::uint64_t seed)
    : ppo_(observation_size, std::move(boxes), std::move(config), seed),
      schedule_(schedule),
      floor_neurons_(floor_neurons),
      final_epoch_(final_epoch) {
  schedule_.Validate();
  original_hidden_ = ppo_.actor().HiddenNeuronCount();
}

SparsityReport TinyMadrlAgent::Step(int epoch) {
  SparsityReport report;
  report.epoch = epoch;
  report.scheduled_sparsity = nn::SparsityAt(schedule_, epoch);
  if (ppo_.ReadyToUpdate()) {
    report.diagnostics = ppo_.Update();
    report.updated = true;
  }
  if (!compacted_ && schedule_.IsUpdateEpoch(epoch)) {
    const auto update =
        nn::UpdateMasks(ppo_.mutable_actor(), schedule_, epoch, floor_neurons_);
    report.masks_updated = true;
    report.threshold = update.threshold;
  }
  if (!compacted_ && epoch >= final_epoch_) {
    ppo_.CompactActor();
    compacted_ = true;
    report.compacted = true;
  }
  const auto& actor = ppo_.actor();
  report.active_hidden_neurons = actor.ActiveHiddenNeuronCount();
  report.achieved_sparsity =
      1.0 - static_cast<double>(report.active_hidden_neurons) /
                static_cast<double>(original_hidden_);
  report.actor_parameters = actor.ActiveParameterCount();
  return report;
}

}  // namespace tinymadrl::agents
