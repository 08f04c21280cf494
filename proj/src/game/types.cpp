#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "tinymadrl/game.hpp"

namespace tinymadrl::game {
namespace {

void Require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

bool InUnitInterval(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

ChannelLink::ChannelLink(double transmit_power_dbm, double channel_gain_db,
                         double noise_dbm)
    : transmit_power_dbm_(transmit_power_dbm),
      channel_gain_db_(channel_gain_db),
      noise_dbm_(noise_dbm) {
  Require(std::isfinite(transmit_power_dbm) && std::isfinite(channel_gain_db) &&
              std::isfinite(noise_dbm),
          "ChannelLink: dB parameters must be finite");
  snr_ = std::pow(10.0, snr_db() / 10.0);
  spectrum_efficiency_ = std::log1p(snr_) / std::log(2.0);
  Require(spectrum_efficiency_ > 0.0 && std::isfinite(spectrum_efficiency_),
          "ChannelLink: spectrum efficiency must be positive and finite");
}

std::string ToString(BudgetCase c) {
  return c == BudgetCase::kActive ? "budget_active" : "budget_inactive";
}

GameInstance::GameInstance(std::vector<UavProfile> uavs,
                           std::vector<RsuProfile> rsus)
    : uavs_(std::move(uavs)), rsus_(std::move(rsus)) {
  Require(!uavs_.empty(), "GameInstance: need at least one UAV");
  Require(!rsus_.empty(), "GameInstance: need at least one RSU");
  const std::size_t J = rsus_.size();
  for (std::size_t j = 0; j < J; ++j) {
    const auto& r = rsus_[j];
    const std::string tag = "RSU " + std::to_string(j) + ": ";
    Require(r.bandwidth_cost > 0.0 && std::isfinite(r.bandwidth_cost),
            tag + "bandwidth_cost must be positive");
    Require(std::isfinite(r.price_cap) && r.bandwidth_cost <= r.price_cap,
            tag + "bandwidth_cost must not exceed price_cap");
  }
  for (std::size_t i = 0; i < uavs_.size(); ++i) {
    const auto& u = uavs_[i];
    const std::string tag = "UAV " + std::to_string(i) + ": ";
    Require(u.delta > 0.0 && std::isfinite(u.delta), tag + "delta must be positive");
    Require(u.budget > 0.0 && std::isfinite(u.budget), tag + "budget must be positive");
    Require(u.ssim_threshold > 0.0 && u.ssim_threshold < 1.0,
            tag + "ssim_threshold must lie in (0, 1)");
    Require(u.per_rsu_ssim.size() == J,
            tag + "per_rsu_ssim must have one entry per RSU");
    for (const auto& t : u.per_rsu_ssim) {
      Require(InUnitInterval(t.luminance) && InUnitInterval(t.contrast) &&
                  InUnitInterval(t.structure),
              tag + "similarity components must lie in [0, 1]");
      Require(t.weights.alpha > 0.0 && t.weights.beta > 0.0 && t.weights.nu > 0.0,
              tag + "SSIM weights must be positive");
    }
  }

  q_.resize(J);
  for (std::size_t j = 0; j < J; ++j) q_[j] = rsus_[j].link.spectrum_efficiency();
  s_ = Matrix(uavs_.size(), J);
  for (std::size_t i = 0; i < uavs_.size(); ++i) {
    for (std::size_t j = 0; j < J; ++j) {
      const double ssim = Ssim(uavs_[i].per_rsu_ssim[j]);
      s_(i, j) = ssim > 0.0 ? std::log(ssim / uavs_[i].ssim_threshold)
                            : -std::numeric_limits<double>::infinity();
    }
  }
}

PriceMatrix::PriceMatrix(const GameInstance& instance, Matrix prices)
    : prices_(std::move(prices)) {
  Require(prices_.rows() == instance.num_rsus() &&
              prices_.cols() == instance.num_uavs(),
          "PriceMatrix: expected J x I prices");
  for (std::size_t j = 0; j < prices_.rows(); ++j) {
    for (std::size_t i = 0; i < prices_.cols(); ++i) {
      const double p = prices_(j, i);
      Require(p >= instance.cost(j) && p <= instance.cap(j),
              "PriceMatrix: price (" + std::to_string(j) + ", " +
                  std::to_string(i) + ") outside [cost, cap]");
    }
  }
}

PriceMatrix PriceMatrix::Clamped(const GameInstance& instance, Matrix prices) {
  Require(prices.rows() == instance.num_rsus() &&
              prices.cols() == instance.num_uavs(),
          "PriceMatrix: expected J x I prices");
  for (std::size_t j = 0; j < prices.rows(); ++j) {
    for (auto& p : prices.row(j)) {
      p = std::isnan(p) ? instance.cost(j)
                        : std::clamp(p, instance.cost(j), instance.cap(j));
    }
  }
  return PriceMatrix(std::move(prices));
}

PriceMatrix PriceMatrix::AtCost(const GameInstance& instance) {
  Matrix m(instance.num_rsus(), instance.num_uavs());
  for (std::size_t j = 0; j < m.rows(); ++j) {
    for (auto& p : m.row(j)) p = instance.cost(j);
  }
  return PriceMatrix(std::move(m));
}

DemandMatrix::DemandMatrix(Matrix demands) : demands_(std::move(demands)) {
  for (double b : demands_.data()) {
    Require(b >= 0.0 && std::isfinite(b), "DemandMatrix: demands must be >= 0");
  }
}

void DemandMatrix::set_uav_row(std::size_t i, std::span<const double> row) {
  Require(row.size() == demands_.cols(), "DemandMatrix: row length mismatch");
  for (std::size_t j = 0; j < row.size(); ++j) {
    Require(row[j] >= 0.0 && std::isfinite(row[j]),
            "DemandMatrix: demands must be >= 0");
    demands_(i, j) = row[j];
  }
}

}  // namespace tinymadrl::game
