#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "tinymadrl/nn.hpp"

namespace tinymadrl::nn {

ImportanceScores NeuronImportance(const PrunableMlp& net) {
  ImportanceScores scores;
  scores.layers.resize(net.num_hidden_layers());
  for (std::size_t h = 0; h < net.num_hidden_layers(); ++h) {
    const DenseLayer& in = net.layer(h);
    const DenseLayer& next = net.layer(h + 1);
    auto& out = scores.layers[h];
    out.assign(in.out, 0.0);
    for (std::size_t n = 0; n < in.out; ++n) {
      double sq = 0.0;
      for (std::size_t c = 0; c < in.in; ++c) sq += in.w(n, c) * in.w(n, c);
      if (in.use_bias) sq += in.bias[n] * in.bias[n];
      for (std::size_t r = 0; r < next.out; ++r) sq += next.w(r, n) * next.w(r, n);
      out[n] = std::sqrt(sq);
    }
  }
  return scores;
}

void PruneSchedule::Validate() const {
  if (!(initial_sparsity >= 0.0 && initial_sparsity < 1.0)) {
    throw std::invalid_argument("PruneSchedule: initial_sparsity must lie in [0, 1)");
  }
  if (!(target_sparsity >= 0.0 && target_sparsity < 1.0)) {
    throw std::invalid_argument("PruneSchedule: target_sparsity must lie in [0, 1)");
  }
  if (initial_sparsity > target_sparsity) {
    throw std::invalid_argument("PruneSchedule: initial_sparsity exceeds target_sparsity");
  }
  if (frequency < 1) throw std::invalid_argument("PruneSchedule: frequency must be >= 1");
  if (total_steps < 0) throw std::invalid_argument("PruneSchedule: total_steps must be >= 0");
}

bool PruneSchedule::IsUpdateEpoch(int epoch) const {
  return epoch >= start_epoch && epoch <= end_epoch() &&
         (epoch - start_epoch) % frequency == 0;
}

double SparsityAt(const PruneSchedule& schedule, int epoch) {
  const int span = schedule.total_steps * schedule.frequency;
  if (span <= 0) {
    return epoch < schedule.start_epoch ? schedule.initial_sparsity
                                        : schedule.target_sparsity;
  }
  const int t = std::clamp(epoch, schedule.start_epoch, schedule.end_epoch());
  const double remaining =
      1.0 - static_cast<double>(t - schedule.start_epoch) / static_cast<double>(span);
  return schedule.target_sparsity +
         (schedule.initial_sparsity - schedule.target_sparsity) * remaining *
             remaining * remaining;
}

MaskUpdate MaskFromScores(const ImportanceScores& scores, double sparsity,
                          std::size_t floor_neurons) {
  struct Entry {
    double score;
    std::size_t layer;
    std::size_t index;
  };
  std::vector<Entry> pooled;
  MaskUpdate update;
  update.sparsity_target = sparsity;
  update.mask.layers.resize(scores.layers.size());
  for (std::size_t h = 0; h < scores.layers.size(); ++h) {
    update.mask.layers[h].assign(scores.layers[h].size(), 1);
    for (std::size_t n = 0; n < scores.layers[h].size(); ++n) {
      pooled.push_back({scores.layers[h][n], h, n});
    }
  }
  const std::size_t total = pooled.size();
  if (total == 0) return update;

  std::sort(pooled.begin(), pooled.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.score, a.layer, a.index) < std::tie(b.score, b.layer, b.index);
  });
  const double clamped = std::clamp(sparsity, 0.0, 1.0);
  const auto to_mask = std::min<std::size_t>(
      total, static_cast<std::size_t>(std::llround(clamped * static_cast<double>(total))));
  for (std::size_t k = 0; k < to_mask; ++k) {
    update.mask.layers[pooled[k].layer][pooled[k].index] = 0;
  }

  for (std::size_t h = 0; h < scores.layers.size(); ++h) {
    auto& m = update.mask.layers[h];
    // A layer never empties completely, whatever the configured floor.
    const std::size_t floor = std::min(std::max<std::size_t>(floor_neurons, 1), m.size());
    std::size_t active = std::count(m.begin(), m.end(), std::uint8_t{1});
    if (active >= floor) continue;
    std::vector<std::size_t> masked;
    for (std::size_t n = 0; n < m.size(); ++n) {
      if (m[n] == 0) masked.push_back(n);
    }
    std::stable_sort(masked.begin(), masked.end(), [&](std::size_t a, std::size_t b) {
      return scores.layers[h][a] > scores.layers[h][b];
    });
    for (std::size_t k = 0; active < floor && k < masked.size(); ++k, ++active) {
      m[masked[k]] = 1;
    }
  }

  // Neurons revived by a floor are paid back from the other layers, lowest
  // scores first, as long as those layers stay above their own floor.
  std::size_t masked_total = 0;
  for (const auto& m : update.mask.layers) {
    masked_total += std::count(m.begin(), m.end(), std::uint8_t{0});
  }
  for (std::size_t k = to_mask; k < total && masked_total < to_mask; ++k) {
    auto& m = update.mask.layers[pooled[k].layer];
    const std::size_t floor = std::min(std::max<std::size_t>(floor_neurons, 1), m.size());
    const auto active =
        static_cast<std::size_t>(std::count(m.begin(), m.end(), std::uint8_t{1}));
    if (m[pooled[k].index] == 1 && active > floor) {
      m[pooled[k].index] = 0;
      ++masked_total;
    }
  }
  update.threshold = std::numeric_limits<double>::infinity();
  for (const auto& e : pooled) {
    if (update.mask.layers[e.layer][e.index] == 1) {
      update.threshold = std::min(update.threshold, e.score);
    }
  }
  update.achieved_sparsity =
      static_cast<double>(masked_total) / static_cast<double>(total);
  return update;
}

MaskUpdate UpdateMasks(PrunableMlp& net, const PruneSchedule& schedule,
                       int epoch, std::size_t floor_neurons) {
  MaskUpdate update = MaskFromScores(NeuronImportance(net),
                                     SparsityAt(schedule, epoch), floor_neurons);
  net.set_mask(update.mask);
  return update;
}

PrunableMlp Compact(const PrunableMlp& net) {
  const std::size_t H = net.num_layers();
  std::vector<std::vector<std::size_t>> keep(H);
  for (std::size_t h = 0; h < H; ++h) {
    const auto& l = net.layer(h);
    for (std::size_t n = 0; n < l.out; ++n) {
      if (h + 1 == H || net.mask().layers[h][n] == 1) keep[h].push_back(n);
    }
  }
  std::vector<DenseLayer> layers;
  for (std::size_t h = 0; h < H; ++h) {
    const auto& src = net.layer(h);
    std::vector<std::size_t> cols;
    if (h == 0) {
      cols.resize(src.in);
      for (std::size_t c = 0; c < src.in; ++c) cols[c] = c;
    } else {
      cols = keep[h - 1];
    }
    DenseLayer dst(cols.size(), keep[h].size(), src.activation, src.use_bias);
    for (std::size_t r = 0; r < keep[h].size(); ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        dst.w(r, c) = src.w(keep[h][r], cols[c]);
      }
      dst.bias[r] = src.bias[keep[h][r]];
    }
    layers.push_back(std::move(dst));
  }
  return PrunableMlp(std::move(layers));
}

}  // namespace tinymadrl::nn
