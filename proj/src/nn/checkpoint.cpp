#include <fstream>
#include <stdexcept>

#include "tinymadrl/nn.hpp"

namespace tinymadrl::nn {
namespace {

constexpr const char* kMlpFormat = "tinymadrl.mlp";
constexpr const char* kCheckpointFormat = "tinymadrl.net_checkpoint";
constexpr int kVersion = 1;

void ExpectFormat(const nlohmann::json& j, const char* format) {
  if (!j.is_object() || j.value("format", "") != format) {
    throw std::runtime_error(std::string("checkpoint: expected format '") + format + "'");
  }
  if (j.value("version", 0) != kVersion) {
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(j.value("version", 0)));
  }
}

}  // namespace

nlohmann::json ToJson(const PrunableMlp& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers()) {
    layers.push_back({{"in", l.in},
                      {"out", l.out},
                      {"activation", ToString(l.activation)},
                      {"use_bias", l.use_bias},
                      {"weights", l.weights},
                      {"bias", l.bias}});
  }
  return {{"format", kMlpFormat},
          {"version", kVersion},
          {"layers", layers},
          {"mask", net.mask().layers}};
}

PrunableMlp MlpFromJson(const nlohmann::json& j) {
  ExpectFormat(j, kMlpFormat);
  std::vector<DenseLayer> layers;
  for (const auto& jl : j.at("layers")) {
    DenseLayer l(jl.at("in").get<std::size_t>(), jl.at("out").get<std::size_t>(),
                 ActivationFromString(jl.at("activation").get<std::string>()),
                 jl.at("use_bias").get<bool>());
    l.weights = jl.at("weights").get<std::vector<double>>();
    l.bias = jl.at("bias").get<std::vector<double>>();
    layers.push_back(std::move(l));
  }
  PrunableMlp net(std::move(layers));
  net.set_mask(NeuronMask{j.at("mask").get<std::vector<std::vector<std::uint8_t>>>()});
  return net;
}

nlohmann::json ToJson(const PruneSchedule& s) {
  return {{"initial_sparsity", s.initial_sparsity},
          {"target_sparsity", s.target_sparsity},
          {"start_epoch", s.start_epoch},
          {"total_steps", s.total_steps},
          {"frequency", s.frequency}};
}

PruneSchedule ScheduleFromJson(const nlohmann::json& j) {
  PruneSchedule s;
  s.initial_sparsity = j.at("initial_sparsity").get<double>();
  s.target_sparsity = j.at("target_sparsity").get<double>();
  s.start_epoch = j.at("start_epoch").get<int>();
  s.total_steps = j.at("total_steps").get<int>();
  s.frequency = j.at("frequency").get<int>();
  s.Validate();
  return s;
}

void SaveCheckpoint(const std::filesystem::path& path, const NetCheckpoint& ckpt) {
  const nlohmann::json j = {{"format", kCheckpointFormat},
                            {"version", kVersion},
                            {"epoch", ckpt.epoch},
                            {"schedule", ToJson(ckpt.schedule)},
                            {"net", ToJson(ckpt.net)}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << j.dump() << '\n';
  if (!out) throw std::runtime_error("error writing checkpoint " + path.string());
}

NetCheckpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  const nlohmann::json j = nlohmann::json::parse(in);
  ExpectFormat(j, kCheckpointFormat);
  return NetCheckpoint{MlpFromJson(j.at("net")), ScheduleFromJson(j.at("schedule")),
                       j.at("epoch").get<int>()};
}

}  // namespace tinymadrl::nn
