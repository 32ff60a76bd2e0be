// Copyright 2026 The bankmfg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BANKMFG_MARKET_MODEL_HPP
#define BANKMFG_MARKET_MODEL_HPP

// Economic primitives of the discrete-time bank deposit-rate game: client
// migration drifts, one-step transitions, running rewards, adjustment costs
// and the central-bank rate chain.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace bankmfg {

struct MarketParams {
  double kappa_major = 5.0;      // escape rate of the major bank's clients
  double kappa_minor = 5.0;      // escape rate of a minor bank's clients
  double delta_major = 0.001;    // viscosity protecting the major bank
  double delta_minor = 0.001;    // viscosity protecting a minor bank
  double deposit_volume = 1.0;   // W
  double premium_major = 0.0;    // liquidity premium l0
  double premium_minor = 0.001;  // liquidity premium l
  double discount = 0.9;         // per-step gamma
  double cost_linear = 0.1;
  double cost_fixed = 0.001;
  int horizon = 5;  // number of decision steps
  double dt = 1.0;
  double rate_min = 0.025;
  double rate_max = 0.035;
  double prop_min = 0.20;
  double prop_max = 0.80;

  // Throws DomainError naming the first violated invariant.
  void validate() const;

  // kappa_max * (rate_max - rate_min - delta_min): the largest single
  // migration speed between two banks.
  double max_migration_speed() const;
};

// (proportion, posted rate). Minor banks carry the rescaled proportion.
struct BankState {
  double p = 0.0;
  double r = 0.0;
};

// One atom of a finite-support minor-bank measure.
struct RateAtom {
  double p = 0.0;
  double r = 0.0;
  double weight = 0.0;
};

// C(dr) = cost_linear * |dr| + cost_fixed * 1{dr != 0}. Changes below
// kRateTolerance count as no change.
inline constexpr double kRateTolerance = 1e-12;
double adjustment_cost(double rate_change, const MarketParams& params);

// Net migration speed into the major bank. `major_rate` is its freshly
// posted rate; the crowd atoms carry the minor banks' freshly posted rates.
double drift_major(double major_rate, double major_p,
                   std::span<const RateAtom> crowd,
                   const MarketParams& params);

// Net migration speed into a representative minor bank that posts
// `own_rate` while holding `own_p`.
double drift_minor(double major_rate, double major_p, double own_rate,
                   double own_p, std::span<const RateAtom> crowd,
                   const MarketParams& params);

BankState transition_major(const BankState& major, double major_action,
                           std::span<const RateAtom> crowd,
                           const MarketParams& params);

BankState transition_minor(const BankState& major, double major_action,
                           const BankState& own, double own_action,
                           std::span<const RateAtom> crowd,
                           const MarketParams& params);

// W p0 (l0 + rc - u0) - C(u0 - r0), on the pre-transition proportion.
double reward_major(const BankState& major, double action, double cb_rate,
                    const MarketParams& params);
double reward_minor(const BankState& own, double action, double cb_rate,
                    const MarketParams& params);

// Number of times a transition had to clamp a proportion into [0, 1].
std::uint64_t proportion_clamp_count();

namespace detail {
// Unchecked kernels shared by the mean-field operator and the evaluators.
double drift_major_unchecked(double major_rate, double major_p,
                             std::span<const RateAtom> crowd,
                             const MarketParams& params);
double drift_minor_unchecked(double major_rate, double major_p,
                             double own_rate, double own_p,
                             std::span<const RateAtom> crowd,
                             const MarketParams& params);
double clamp_proportion(double p);
}  // namespace detail

// Finite-state Markov chain of the central-bank policy rate.
class CentralBankChain {
 public:
  // Jump-chain Euler step: stay with probability 1 - lambda*dt, otherwise
  // jump uniformly to one of the other rates.
  CentralBankChain(std::vector<double> rates, double lambda, double dt);
  // Explicit row-stochastic matrix, rows and columns ordered like `rates`.
  CentralBankChain(std::vector<double> rates, Eigen::MatrixXd transition);

  const std::vector<double>& rates() const { return rates_; }
  const Eigen::MatrixXd& transition() const { return transition_; }
  std::size_t size() const { return rates_.size(); }

  // Throws DomainError if `rate` is not one of the chain's rates.
  std::size_t index_of(double rate) const;
  Eigen::VectorXd row(double rate) const;
  double probability(std::size_t from, std::size_t to) const {
    return transition_(static_cast<Eigen::Index>(from),
                       static_cast<Eigen::Index>(to));
  }
  double sample(double rate, std::mt19937_64& rng) const;
  std::size_t sample_index(std::size_t from, std::mt19937_64& rng) const;

 private:
  void validate() const;

  std::vector<double> rates_;
  Eigen::MatrixXd transition_;
};

// Evenly spaced admissible posted rates.
class ActionGrid {
 public:
  ActionGrid(double lo, double hi, int count);
  explicit ActionGrid(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  bool contains(double rate) const;
  // Index of the grid value within kRateTolerance of `rate`; DomainError
  // otherwise.
  std::size_t index_of(double rate) const;

 private:
  std::vector<double> values_;
};

}  // namespace bankmfg

#endif  // BANKMFG_MARKET_MODEL_HPP
