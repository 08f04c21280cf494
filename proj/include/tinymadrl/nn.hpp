#ifndef TINYMADRL_NN_HPP_
#define TINYMADRL_NN_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tinymadrl/rng.hpp"

namespace tinymadrl::nn {

enum class Activation { kRelu, kTanh, kIdentity };

std::string ToString(Activation a);
Activation ActivationFromString(const std::string& name);

// Fully connected layer, weights stored out x in row-major.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;  // length out; all zero unless use_bias
  bool use_bias = false;
  Activation activation = Activation::kIdentity;

  DenseLayer() = default;
  DenseLayer(std::size_t in_size, std::size_t out_size, Activation act,
             bool with_bias = false);

  double& w(std::size_t r, std::size_t c) { return weights[r * in + c]; }
  double w(std::size_t r, std::size_t c) const { return weights[r * in + c]; }

  bool operator==(const DenseLayer&) const = default;
};

// One binary vector per hidden layer (every layer but the last).
struct NeuronMask {
  std::vector<std::vector<std::uint8_t>> layers;
  bool operator==(const NeuronMask&) const = default;
};

struct ImportanceScores {
  std::vector<std::vector<double>> layers;
};

// Activations of one forward pass. post[h] already carries the mask when
// the pass was masked; Backward differentiates exactly that computation.
struct ForwardCache {
  std::vector<double> input;
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;
  bool masked = false;

  const std::vector<double>& output() const { return post.back(); }
};

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;

  void Accumulate(const Gradients& other, double scale = 1.0);
  void Scale(double factor);
  double SquaredNorm() const;

  bool operator==(const Gradients&) const = default;
};

class PrunableMlp {
 public:
  PrunableMlp() = default;
  // Throws std::invalid_argument on inconsistent dimensions.
  explicit PrunableMlp(std::vector<DenseLayer> layers);

  // sizes = {input, hidden..., output}. Hidden layers use `hidden`, the last
  // layer `output`. Weights are He/Glorot uniform; the last layer is scaled
  // by output_scale.
  static PrunableMlp Create(const std::vector<std::size_t>& sizes,
                            Activation hidden, Activation output,
                            bool use_bias, Rng& rng,
                            double output_scale = 1.0);

  std::size_t input_size() const { return layers_.front().in; }
  std::size_t output_size() const { return layers_.back().out; }
  std::size_t num_layers() const { return layers_.size(); }
  std::size_t num_hidden_layers() const { return layers_.size() - 1; }

  const std::vector<DenseLayer>& layers() const { return layers_; }
  const DenseLayer& layer(std::size_t h) const { return layers_.at(h); }
  DenseLayer& mutable_layer(std::size_t h) { return layers_.at(h); }

  const NeuronMask& mask() const { return mask_; }
  // Throws std::invalid_argument if the shape does not match hidden layers.
  void set_mask(NeuronMask mask);

  ForwardCache Forward(std::span<const double> input, bool apply_mask) const;
  // Plain forward pass, masks ignored.
  std::vector<double> Predict(std::span<const double> input) const;
  std::vector<double> MaskedPredict(std::span<const double> input) const;

  // d(loss)/d(parameters) given d(loss)/d(output).
  Gradients Backward(const ForwardCache& cache,
                     std::span<const double> output_grad) const;
  Gradients ZeroGradients() const;

  std::size_t HiddenNeuronCount() const;
  std::size_t ActiveHiddenNeuronCount() const;
  double Sparsity() const;
  std::size_t ParameterCount() const;
  // Weights and biases reachable through active neurons only.
  std::size_t ActiveParameterCount() const;

  bool operator==(const PrunableMlp&) const = default;

 private:
  std::vector<DenseLayer> layers_;
  NeuronMask mask_;
};

// L2 norm of each hidden neuron's incoming weights (and bias, when used)
// concatenated with its outgoing weights.
ImportanceScores NeuronImportance(const PrunableMlp& net);

// Cubic sparsity ramp from initial_sparsity at start_epoch to
// target_sparsity at start_epoch + total_steps * frequency.
struct PruneSchedule {
  double initial_sparsity = 0.0;
  double target_sparsity = 0.5;
  int start_epoch = 0;
  int total_steps = 10;
  int frequency = 1;

  void Validate() const;
  int end_epoch() const { return start_epoch + total_steps * frequency; }
  // True at start_epoch, every frequency epochs after, through end_epoch.
  bool IsUpdateEpoch(int epoch) const;

  bool operator==(const PruneSchedule&) const = default;
};

double SparsityAt(const PruneSchedule& schedule, int epoch);

struct MaskUpdate {
  NeuronMask mask;
  double threshold = 0.0;   // smallest importance that survives
  double sparsity_target = 0.0;
  double achieved_sparsity = 0.0;
};

// Masks the round(sparsity * N) least important hidden neurons of the pooled
// ranking. Ties are broken by (layer, index): earlier neurons are masked
// first. Afterwards every layer is topped back up to
// min(floor_neurons, width) active neurons using its highest scores, and the
// revived count is masked elsewhere where floors allow.
MaskUpdate MaskFromScores(const ImportanceScores& scores, double sparsity,
                          std::size_t floor_neurons);

// Recomputes importance from the current weights and installs the mask for
// this epoch. Previously masked neurons may come back.
MaskUpdate UpdateMasks(PrunableMlp& net, const PruneSchedule& schedule,
                       int epoch, std::size_t floor_neurons = 4);

// Physically removes masked neurons. The result has an all-ones mask and
// computes the same function as net.MaskedPredict.
PrunableMlp Compact(const PrunableMlp& net);

// Versioned checkpoint. Doubles round-trip bit-exactly.
nlohmann::json ToJson(const PrunableMlp& net);
PrunableMlp MlpFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const PruneSchedule& schedule);
PruneSchedule ScheduleFromJson(const nlohmann::json& j);

struct NetCheckpoint {
  PrunableMlp net;
  PruneSchedule schedule;
  int epoch = 0;
};

void SaveCheckpoint(const std::filesystem::path& path, const NetCheckpoint& ckpt);
NetCheckpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace tinymadrl::nn

#endif  // TINYMADRL_NN_HPP_
