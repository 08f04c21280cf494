#ifndef TINYMADRL_GAME_HPP_
#define TINYMADRL_GAME_HPP_

// Bandwidth-pricing Stackelberg game between RSUs (sellers, leaders) and
// UAVs (buyers, followers).
//
// Index conventions used throughout:
//   i  UAV index in [0, I)
//   j  RSU index in [0, J)
//   prices  p(j, i): price RSU j charges UAV i, stored J x I
//   demands b(i, j): bandwidth UAV i buys from RSU j, stored I x J
// A "price row" for UAV i is the length-J vector (p(0,i), ..., p(J-1,i)).
// A "price column" / "price row of RSU j" is the length-I vector p(j, .).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tinymadrl/parallel.hpp"

namespace tinymadrl::game {

// Dense row-major matrix used for both strategy spaces.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::vector<double> column(std::size_t c) const;

  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Downlink from an RSU. Inputs are dB-domain; the SNR and spectrum
// efficiency are computed once here.
class ChannelLink {
 public:
  ChannelLink() : ChannelLink(0.0, 0.0, 0.0) {}
  ChannelLink(double transmit_power_dbm, double channel_gain_db,
              double noise_dbm);

  double transmit_power_dbm() const { return transmit_power_dbm_; }
  double channel_gain_db() const { return channel_gain_db_; }
  double noise_dbm() const { return noise_dbm_; }
  double snr_db() const { return transmit_power_dbm_ + channel_gain_db_ - noise_dbm_; }
  double snr() const { return snr_; }
  // q = log2(1 + snr), bits/s/Hz.
  double spectrum_efficiency() const { return spectrum_efficiency_; }

  bool operator==(const ChannelLink&) const = default;

 private:
  double transmit_power_dbm_;
  double channel_gain_db_;
  double noise_dbm_;
  double snr_;
  double spectrum_efficiency_;
};

struct SsimWeights {
  double alpha = 1.0;
  double beta = 1.0;
  double nu = 1.0;
  bool operator==(const SsimWeights&) const = default;
};

// Luminance / contrast / structure similarity of a received frame.
struct SsimTriple {
  double luminance = 1.0;
  double contrast = 1.0;
  double structure = 1.0;
  SsimWeights weights;
  bool operator==(const SsimTriple&) const = default;
};

struct UavProfile {
  double delta = 1.0;           // immersion-scaled satisfaction factor
  double budget = 1.0;          // payment budget R_i
  double ssim_threshold = 0.5;  // minimum acceptable SSIM
  std::vector<SsimTriple> per_rsu_ssim;  // length J
  bool operator==(const UavProfile&) const = default;
};

struct RsuProfile {
  double bandwidth_cost = 1.0;  // c^j
  double price_cap = 1.0;       // upper price bound
  ChannelLink link;
  bool operator==(const RsuProfile&) const = default;
};

// Immutable market description. Construction validates every invariant and
// caches the spectrum efficiency q^j and log-quality S(i, j).
class GameInstance {
 public:
  GameInstance(std::vector<UavProfile> uavs, std::vector<RsuProfile> rsus);

  std::size_t num_uavs() const { return uavs_.size(); }
  std::size_t num_rsus() const { return rsus_.size(); }
  const UavProfile& uav(std::size_t i) const { return uavs_.at(i); }
  const RsuProfile& rsu(std::size_t j) const { return rsus_.at(j); }
  const std::vector<UavProfile>& uavs() const { return uavs_; }
  const std::vector<RsuProfile>& rsus() const { return rsus_; }

  double q(std::size_t j) const { return q_[j]; }
  // ln(SSIM / threshold); -infinity for a zero-SSIM (unusable) link.
  double s(std::size_t i, std::size_t j) const { return s_(i, j); }
  double cost(std::size_t j) const { return rsus_[j].bandwidth_cost; }
  double cap(std::size_t j) const { return rsus_[j].price_cap; }

  bool operator==(const GameInstance& other) const {
    return uavs_ == other.uavs_ && rsus_ == other.rsus_;
  }

 private:
  std::vector<UavProfile> uavs_;
  std::vector<RsuProfile> rsus_;
  std::vector<double> q_;
  Matrix s_;
};

// J x I prices, every entry inside [c^j, cap^j].
class PriceMatrix {
 public:
  // Throws std::invalid_argument if any entry is outside its box.
  PriceMatrix(const GameInstance& instance, Matrix prices);

  static PriceMatrix Clamped(const GameInstance& instance, Matrix prices);
  static PriceMatrix AtCost(const GameInstance& instance);

  std::size_t num_rsus() const { return prices_.rows(); }
  std::size_t num_uavs() const { return prices_.cols(); }
  double operator()(std::size_t j, std::size_t i) const { return prices_(j, i); }
  // Prices RSU j charges every UAV.
  std::span<const double> rsu_row(std::size_t j) const { return prices_.row(j); }
  // Prices every RSU charges UAV i.
  std::vector<double> uav_row(std::size_t i) const { return prices_.column(i); }
  const Matrix& matrix() const { return prices_; }

  bool operator==(const PriceMatrix&) const = default;

 private:
  explicit PriceMatrix(Matrix prices) : prices_(std::move(prices)) {}
  Matrix prices_;
};

// I x J non-negative demands.
class DemandMatrix {
 public:
  DemandMatrix() = default;
  DemandMatrix(std::size_t num_uavs, std::size_t num_rsus)
      : demands_(num_uavs, num_rsus) {}
  explicit DemandMatrix(Matrix demands);

  std::size_t num_uavs() const { return demands_.rows(); }
  std::size_t num_rsus() const { return demands_.cols(); }
  double operator()(std::size_t i, std::size_t j) const { return demands_(i, j); }
  std::span<const double> uav_row(std::size_t i) const { return demands_.row(i); }
  std::vector<double> rsu_column(std::size_t j) const { return demands_.column(j); }
  void set_uav_row(std::size_t i, std::span<const double> row);
  const Matrix& matrix() const { return demands_; }

  bool operator==(const DemandMatrix&) const = default;

 private:
  Matrix demands_;
};

enum class BudgetCase { kInactive, kActive };
std::string ToString(BudgetCase c);

struct FollowerSolution {
  std::vector<double> demands;  // length J
  BudgetCase case_label = BudgetCase::kInactive;
  double lambda = 0.0;
  std::vector<std::size_t> support;  // RSUs with positive demand
  // Active case collapsed to an empty support; demands were zeroed.
  bool degenerate = false;
};

// ---- utilities -------------------------------------------------------------

double SpectrumEfficiency(const ChannelLink& link);
double Ssim(const SsimTriple& triple);
// ln(SSIM / threshold). Throws std::domain_error when SSIM == 0.
double LogQuality(const UavProfile& uav, std::size_t rsu_index);

double UavUtility(const GameInstance& instance, std::size_t uav,
                  std::span<const double> demand_row,
                  std::span<const double> price_row);
double RsuUtility(const GameInstance& instance, std::size_t rsu,
                  std::span<const double> price_row,
                  std::span<const double> demand_column);
// delta * ln(1 + b q) * S: the positive part of the UAV utility. The
// individual immersion and satisfaction factors only ever enter through
// their product delta.
double ImmersionMetric(const GameInstance& instance, std::size_t uav,
                       std::size_t rsu, double demand);

// ---- follower (stage II) ---------------------------------------------------

FollowerSolution FollowerBestResponse(const GameInstance& instance,
                                      std::size_t uav,
                                      std::span<const double> price_row);

DemandMatrix AllFollowersRespond(const GameInstance& instance,
                                 const PriceMatrix& prices,
                                 Execution exec = Execution::kParallel);

// ---- leader (stage I) ------------------------------------------------------

// sqrt(delta S q c), the seller's optimum when the buyer's budget is slack.
// nullopt when S <= 0: no price yields positive demand.
std::optional<double> LeaderUnconstrainedPrice(const GameInstance& instance,
                                               std::size_t rsu,
                                               std::size_t uav);

enum class LeaderResponseKind {
  kCompetitive,  // budget-active best response against other sellers
  kLoneSeller,   // only one RSU has positive log-quality for this UAV
  kNoSurplus,    // this RSU has S <= 0 for this UAV; priced at cost
};

struct LeaderResponse {
  std::vector<double> prices;  // length J
  std::vector<LeaderResponseKind> kinds;
};

// Budget-active best response of every RSU to UAV i given the other RSUs'
// prices, before projection onto the price boxes.
LeaderResponse LeaderResponseUnclamped(const GameInstance& instance,
                                       std::size_t uav,
                                       std::span<const double> price_row);

// Same map projected onto [c^j, cap^j].
std::vector<double> LeaderBestResponseMap(const GameInstance& instance,
                                          std::size_t uav,
                                          std::span<const double> price_row);

// ---- equilibrium -----------------------------------------------------------

struct SolverOptions {
  double tolerance = 1e-9;
  int max_iterations = 10000;
};

struct UavEquilibrium {
  std::vector<double> prices;  // length J
  BudgetCase case_label = BudgetCase::kInactive;
  int iterations = 0;
  double residual = 0.0;
  bool consistent = true;
  std::string diagnostic;
};

struct EquilibriumSolution {
  PriceMatrix prices;
  DemandMatrix demands;
  std::vector<double> rsu_utilities;
  std::vector<double> uav_utilities;
  std::vector<BudgetCase> per_uav_case;
  int iterations = 0;     // max over UAV subproblems
  double residual = 0.0;  // max final sup-norm price change
  bool consistent = true;
  std::vector<std::string> diagnostics;

  double AverageRsuUtility() const;
};

// Solves the leader subgame for UAV i alone. Subproblems for distinct UAVs
// are independent.
UavEquilibrium SolveUavSubgame(const GameInstance& instance, std::size_t uav,
                               const SolverOptions& options);

EquilibriumSolution SolveEquilibrium(const GameInstance& instance,
                                     const SolverOptions& options = {},
                                     Execution exec = Execution::kParallel);

// Assembles a solution (demands recomputed from scratch, utilities) for an
// arbitrary price matrix. Used by the solver and by verification probes.
EquilibriumSolution EvaluatePrices(const GameInstance& instance,
                                   const PriceMatrix& prices,
                                   Execution exec = Execution::kParallel);

struct Violation {
  enum class Player { kRsu, kUav } player;
  std::size_t index;
  double baseline;     // utility at the solution
  double improved;     // utility at the probe
  double magnitude;    // relative improvement
};

struct VerificationReport {
  std::size_t probes_per_player = 0;
  double tolerance = 0.0;
  std::vector<Violation> violations;
  double max_rsu_gain = 0.0;  // largest relative RSU improvement seen
  double max_uav_gain = 0.0;
  bool ok() const { return violations.empty(); }
};

// Probes random unilateral deviations: per RSU, new prices inside its box
// (single entry or whole row); per UAV, random budget-feasible demand rows.
VerificationReport VerifyEquilibrium(const GameInstance& instance,
                                     const EquilibriumSolution& solution,
                                     std::size_t num_probes,
                                     std::uint64_t seed,
                                     double tolerance = 1e-6,
                                     Execution exec = Execution::kParallel);

}  // namespace tinymadrl::game

#endif  // TINYMADRL_GAME_HPP_
