#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tinymadrl/nn.hpp"

namespace tinymadrl::nn {
namespace {

double Activate(Activation a, double x) {
  switch (a) {
    case Activation::kRelu:
      return x > 0.0 ? x : 0.0;
    case Activation::kTanh:
      return std::tanh(x);
    case Activation::kIdentity:
      return x;
  }
  return x;
}

// Derivative expressed through the pre-activation and the (unmasked)
// activation value.
double ActivateGrad(Activation a, double pre, double post) {
  switch (a) {
    case Activation::kRelu:
      return pre > 0.0 ? 1.0 : 0.0;
    case Activation::kTanh:
      return 1.0 - post * post;
    case Activation::kIdentity:
      return 1.0;
  }
  return 1.0;
}

}  // namespace

std::string ToString(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kTanh:
      return "tanh";
    case Activation::kIdentity:
      return "identity";
  }
  return "identity";
}

Activation ActivationFromString(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

DenseLayer::DenseLayer(std::size_t in_size, std::size_t out_size,
                       Activation act, bool with_bias)
    : in(in_size),
      out(out_size),
      weights(in_size * out_size, 0.0),
      bias(out_size, 0.0),
      use_bias(with_bias),
      activation(act) {}

void Gradients::Accumulate(const Gradients& other, double scale) {
  for (std::size_t h = 0; h < weights.size(); ++h) {
    for (std::size_t k = 0; k < weights[h].size(); ++k) {
      weights[h][k] += scale * other.weights[h][k];
    }
    for (std::size_t k = 0; k < bias[h].size(); ++k) {
      bias[h][k] += scale * other.bias[h][k];
    }
  }
}

void Gradients::Scale(double factor) {
  for (auto& layer : weights) {
    for (auto& g : layer) g *= factor;
  }
  for (auto& layer : bias) {
    for (auto& g : layer) g *= factor;
  }
}

double Gradients::SquaredNorm() const {
  double total = 0.0;
  for (const auto& layer : weights) {
    for (double g : layer) total += g * g;
  }
  for (const auto& layer : bias) {
    for (double g : layer) total += g * g;
  }
  return total;
}

PrunableMlp::PrunableMlp(std::vector<DenseLayer> layers)
    : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("PrunableMlp: no layers");
  for (std::size_t h = 0; h < layers_.size(); ++h) {
    const auto& l = layers_[h];
    if (l.in == 0 || l.out == 0 || l.weights.size() != l.in * l.out ||
        l.bias.size() != l.out) {
      throw std::invalid_argument("PrunableMlp: layer " + std::to_string(h) +
                                  " has inconsistent storage");
    }
    if (h > 0 && layers_[h - 1].out != l.in) {
      throw std::invalid_argument("PrunableMlp: layer " + std::to_string(h) +
                                  " input does not match previous output");
    }
  }
  mask_.layers.resize(num_hidden_layers());
  for (std::size_t h = 0; h < num_hidden_layers(); ++h) {
    mask_.layers[h].assign(layers_[h].out, 1);
  }
}

PrunableMlp PrunableMlp::Create(const std::vector<std::size_t>& sizes,
                                Activation hidden, Activation output,
                                bool use_bias, Rng& rng, double output_scale) {
  if (sizes.size() < 2) {
    throw std::invalid_argument("PrunableMlp::Create: need input and output sizes");
  }
  std::vector<DenseLayer> layers;
  for (std::size_t h = 0; h + 1 < sizes.size(); ++h) {
    const bool last = h + 2 == sizes.size();
    DenseLayer layer(sizes[h], sizes[h + 1], last ? output : hidden, use_bias);
    const double fan_in = static_cast<double>(sizes[h]);
    const double fan_out = static_cast<double>(sizes[h + 1]);
    double limit = layer.activation == Activation::kRelu
                       ? std::sqrt(6.0 / fan_in)
                       : std::sqrt(6.0 / (fan_in + fan_out));
    if (last) limit *= output_scale;
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& w : layer.weights) w = dist(rng);
    layers.push_back(std::move(layer));
  }
  return PrunableMlp(std::move(layers));
}

void PrunableMlp::set_mask(NeuronMask mask) {
  if (mask.layers.size() != num_hidden_layers()) {
    throw std::invalid_argument("set_mask: wrong number of hidden layers");
  }
  for (std::size_t h = 0; h < mask.layers.size(); ++h) {
    if (mask.layers[h].size() != layers_[h].out) {
      throw std::invalid_argument("set_mask: layer " + std::to_string(h) +
                                  " width mismatch");
    }
  }
  mask_ = std::move(mask);
}

ForwardCache PrunableMlp::Forward(std::span<const double> input,
                                  bool apply_mask) const {
  if (input.size() != input_size()) {
    throw std::invalid_argument("Forward: input length " +
                                std::to_string(input.size()) + " != " +
                                std::to_string(input_size()));
  }
  ForwardCache cache;
  cache.masked = apply_mask;
  cache.input.assign(input.begin(), input.end());
  cache.pre.resize(layers_.size());
  cache.post.resize(layers_.size());
  const std::vector<double>* x = &cache.input;
  for (std::size_t h = 0; h < layers_.size(); ++h) {
    const DenseLayer& l = layers_[h];
    auto& pre = cache.pre[h];
    auto& post = cache.post[h];
    pre.resize(l.out);
    post.resize(l.out);
    const bool hidden = h + 1 < layers_.size();
    for (std::size_t r = 0; r < l.out; ++r) {
      const double* row = &l.weights[r * l.in];
      double z = l.use_bias ? l.bias[r] : 0.0;
      for (std::size_t c = 0; c < l.in; ++c) z += row[c] * (*x)[c];
      pre[r] = z;
      post[r] = Activate(l.activation, z);
      if (apply_mask && hidden && mask_.layers[h][r] == 0) post[r] = 0.0;
    }
    x = &post;
  }
  return cache;
}

std::vector<double> PrunableMlp::Predict(std::span<const double> input) const {
  return Forward(input, false).post.back();
}

std::vector<double> PrunableMlp::MaskedPredict(std::span<const double> input) const {
  return Forward(input, true).post.back();
}

Gradients PrunableMlp::ZeroGradients() const {
  Gradients g;
  for (const auto& l : layers_) {
    g.weights.emplace_back(l.weights.size(), 0.0);
    g.bias.emplace_back(l.bias.size(), 0.0);
  }
  return g;
}

Gradients PrunableMlp::Backward(const ForwardCache& cache,
                                std::span<const double> output_grad) const {
  if (output_grad.size() != output_size()) {
    throw std::invalid_argument("Backward: output gradient length mismatch");
  }
  Gradients grads = ZeroGradients();
  std::vector<double> d_post(output_grad.begin(), output_grad.end());
  std::vector<double> d_pre;
  for (std::size_t h = layers_.size(); h-- > 0;) {
    const DenseLayer& l = layers_[h];
    const bool hidden = h + 1 < layers_.size();
    const std::vector<double>& x = h == 0 ? cache.input : cache.post[h - 1];
    d_pre.assign(l.out, 0.0);
    for (std::size_t r = 0; r < l.out; ++r) {
      if (cache.masked && hidden && mask_.layers[h][r] == 0) continue;
      const double post = Activate(l.activation, cache.pre[h][r]);
      d_pre[r] = d_post[r] * ActivateGrad(l.activation, cache.pre[h][r], post);
    }
    auto& gw = grads.weights[h];
    for (std::size_t r = 0; r < l.out; ++r) {
      if (d_pre[r] == 0.0) continue;
      double* grow = &gw[r * l.in];
      for (std::size_t c = 0; c < l.in; ++c) grow[c] = d_pre[r] * x[c];
      if (l.use_bias) grads.bias[h][r] = d_pre[r];
    }
    if (h == 0) break;
    std::vector<double> d_prev(l.in, 0.0);
    for (std::size_t r = 0; r < l.out; ++r) {
      if (d_pre[r] == 0.0) continue;
      const double* row = &l.weights[r * l.in];
      for (std::size_t c = 0; c < l.in; ++c) d_prev[c] += row[c] * d_pre[r];
    }
    d_post = std::move(d_prev);
  }
  return grads;
}

std::size_t PrunableMlp::HiddenNeuronCount() const {
  std::size_t n = 0;
  for (const auto& m : mask_.layers) n += m.size();
  return n;
}

std::size_t PrunableMlp::ActiveHiddenNeuronCount() const {
  std::size_t n = 0;
  for (const auto& m : mask_.layers) n += std::accumulate(m.begin(), m.end(), std::size_t{0});
  return n;
}

double PrunableMlp::Sparsity() const {
  const std::size_t total = HiddenNeuronCount();
  if (total == 0) return 0.0;
  return 1.0 - static_cast<double>(ActiveHiddenNeuronCount()) /
                   static_cast<double>(total);
}

std::size_t PrunableMlp::ParameterCount() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + (l.use_bias ? l.out : 0);
  return n;
}

std::size_t PrunableMlp::ActiveParameterCount() const {
  std::size_t n = 0;
  std::size_t prev_active = input_size();
  for (std::size_t h = 0; h < layers_.size(); ++h) {
    const auto& l = layers_[h];
    const std::size_t active =
        h < num_hidden_layers()
            ? std::accumulate(mask_.layers[h].begin(), mask_.layers[h].end(),
                              std::size_t{0})
            : l.out;
    n += active * prev_active + (l.use_bias ? active : 0);
    prev_active = active;
  }
  return n;
}

}  // namespace tinymadrl::nn
