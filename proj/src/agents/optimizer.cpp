#include <cmath>
#include <stdexcept>

#include "tinymadrl/agents.hpp"

namespace tinymadrl::agents {

std::string ToString(OptimizerKind k) { return k == OptimizerKind::kSgd ? "sgd" : "adam"; }

OptimizerKind OptimizerFromString(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw std::invalid_argument("unknown optimizer '" + name + "'");
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate,
                     const nn::PrunableMlp& net)
    : kind_(kind), learning_rate_(learning_rate) {
  Reset(net);
}

void Optimizer::Reset(const nn::PrunableMlp& net) {
  steps_ = 0;
  first_ = net.ZeroGradients();
  second_ = net.ZeroGradients();
}

void Optimizer::Step(nn::PrunableMlp& net, const nn::Gradients& grads) {
  if (kind_ == OptimizerKind::kSgd) {
    for (std::size_t h = 0; h < net.num_layers(); ++h) {
      auto& layer = net.mutable_layer(h);
      for (std::size_t k = 0; k < layer.weights.size(); ++k) {
        layer.weights[k] -= learning_rate_ * grads.weights[h][k];
      }
      if (!layer.use_bias) continue;
      for (std::size_t k = 0; k < layer.bias.size(); ++k) {
        layer.bias[k] -= learning_rate_ * grads.bias[h][k];
      }
    }
    return;
  }

  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  auto update = [&](double& param, double g, double& m, double& v) {
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g * g;
    param -= learning_rate_ * (m / c1) / (std::sqrt(v / c2) + epsilon_);
  };
  for (std::size_t h = 0; h < net.num_layers(); ++h) {
    auto& layer = net.mutable_layer(h);
    for (std::size_t k = 0; k < layer.weights.size(); ++k) {
      update(layer.weights[k], grads.weights[h][k], first_.weights[h][k],
             second_.weights[h][k]);
    }
    if (!layer.use_bias) continue;
    for (std::size_t k = 0; k < layer.bias.size(); ++k) {
      update(layer.bias[k], grads.bias[h][k], first_.bias[h][k], second_.bias[h][k]);
    }
  }
}

nlohmann::json Optimizer::ToJson() const {
  return {{"kind", ToString(kind_)},
          {"learning_rate", learning_rate_},
          {"beta1", beta1_},
          {"beta2", beta2_},
          {"epsilon", epsilon_},
          {"steps", steps_},
          {"first", {{"weights", first_.weights}, {"bias", first_.bias}}},
          {"second", {{"weights", second_.weights}, {"bias", second_.bias}}}};
}

Optimizer Optimizer::FromJson(const nlohmann::json& j) {
  Optimizer opt;
  opt.kind_ = OptimizerFromString(j.at("kind").get<std::string>());
  opt.learning_rate_ = j.at("learning_rate").get<double>();
  opt.beta1_ = j.at("beta1").get<double>();
  opt.beta2_ = j.at("beta2").get<double>();
  opt.epsilon_ = j.at("epsilon").get<double>();
  opt.steps_ = j.at("steps").get<long>();
  using Grid = std::vector<std::vector<double>>;
  opt.first_.weights = j.at("first").at("weights").get<Grid>();
  opt.first_.bias = j.at("first").at("bias").get<Grid>();
  opt.second_.weights = j.at("second").at("weights").get<Grid>();
  opt.second_.bias = j.at("second").at("bias").get<Grid>();
  return opt;
}

}  // namespace tinymadrl::agents
