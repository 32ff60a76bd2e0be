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

#include "bankmfg/market_model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <sstream>
#include <utility>

#include "bankmfg/errors.hpp"

namespace bankmfg {
namespace {

std::atomic<std::uint64_t> clamp_events{0};

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(std::string("MarketParams: ") + what);
}

void check_crowd(std::span<const RateAtom> crowd) {
  for (const RateAtom& atom : crowd) {
    if (!(atom.weight >= 0.0) || !std::isfinite(atom.weight)) {
      std::ostringstream msg;
      msg << "measure atom (" << atom.p << ", " << atom.r
          << ") has invalid weight " << atom.weight;
      throw InvalidMeasureError(msg.str());
    }
  }
}

}  // namespace

void MarketParams::validate() const {
  require(kappa_major > 0.0, "kappa_major must be > 0");
  require(kappa_minor > 0.0, "kappa_minor must be > 0");
  require(delta_major >= 0.0 && delta_major <= 1.0,
          "delta_major must lie in [0, 1]");
  require(delta_minor >= 0.0 && delta_minor <= 1.0,
          "delta_minor must lie in [0, 1]");
  require(deposit_volume > 0.0, "deposit_volume must be > 0");
  require(premium_major >= 0.0 && premium_major <= 1.0,
          "premium_major must lie in [0, 1]");
  require(premium_minor >= 0.0 && premium_minor <= 1.0,
          "premium_minor must lie in [0, 1]");
  require(discount > 0.0 && discount < 1.0, "discount must lie in (0, 1)");
  require(cost_linear >= 0.0, "cost_linear must be >= 0");
  require(cost_fixed >= 0.0, "cost_fixed must be >= 0");
  require(horizon >= 1, "horizon must be >= 1");
  require(dt > 0.0, "dt must be > 0");
  require(rate_min >= 0.0 && rate_max <= 1.0, "rates must lie in [0, 1]");
  require(rate_min < rate_max, "rate_min must be < rate_max");
  require(prop_min >= 0.0 && prop_max <= 1.0,
          "proportion bounds must lie in [0, 1]");
  require(prop_min < prop_max, "prop_min must be < prop_max");
}

double MarketParams::max_migration_speed() const {
  return std::max(kappa_major, kappa_minor) *
         (rate_max - rate_min - std::min(delta_major, delta_minor));
}

double adjustment_cost(double rate_change, const MarketParams& params) {
  const double size = std::abs(rate_change);
  if (size <= kRateTolerance) return 0.0;
  return params.cost_linear * size + params.cost_fixed;
}

namespace detail {

double drift_major_unchecked(double major_rate, double major_p,
                             std::span<const RateAtom> crowd,
                             const MarketParams& params) {
  double gain = 0.0;
  double loss = 0.0;
  for (const RateAtom& atom : crowd) {
    gain += atom.weight * params.kappa_minor *
            positive_part(major_rate - atom.r - params.delta_minor) * atom.p;
    loss += atom.weight * params.kappa_major *
            positive_part(atom.r - major_rate - params.delta_major);
  }
  return gain - loss * major_p;
}

double drift_minor_unchecked(double major_rate, double major_p,
                             double own_rate, double own_p,
                             std::span<const RateAtom> crowd,
                             const MarketParams& params) {
  const double kappa = params.kappa_minor;
  const double delta = params.delta_minor;
  double gain = params.kappa_major *
                positive_part(own_rate - major_rate - params.delta_major) *
                major_p;
  double loss_speed = kappa * positive_part(major_rate - own_rate - delta);
  for (const RateAtom& atom : crowd) {
    gain += atom.weight * kappa * positive_part(own_rate - atom.r - delta) *
            atom.p;
    loss_speed +=
        atom.weight * kappa * positive_part(atom.r - own_rate - delta);
  }
  return gain - loss_speed * own_p;
}

double clamp_proportion(double p) {
  if (p < 0.0 || p > 1.0) {
    if (clamp_events.fetch_add(1) == 0) {
      std::cerr << "warning: proportion " << p
                << " left [0, 1] after a transition and was clamped\n";
    }
    return std::clamp(p, 0.0, 1.0);
  }
  return p;
}

}  // namespace detail

double drift_major(double major_rate, double major_p,
                   std::span<const RateAtom> crowd,
                   const MarketParams& params) {
  check_crowd(crowd);
  return detail::drift_major_unchecked(major_rate, major_p, crowd, params);
}

double drift_minor(double major_rate, double major_p, double own_rate,
                   double own_p, std::span<const RateAtom> crowd,
                   const MarketParams& params) {
  check_crowd(crowd);
  return detail::drift_minor_unchecked(major_rate, major_p, own_rate, own_p,
                                       crowd, params);
}

BankState transition_major(const BankState& major, double major_action,
                           std::span<const RateAtom> crowd,
                           const MarketParams& params) {
  const double drift = drift_major(major_action, major.p, crowd, params);
  return {detail::clamp_proportion(major.p + drift * params.dt),
          major_action};
}

BankState transition_minor(const BankState& major, double major_action,
                           const BankState& own, double own_action,
                           std::span<const RateAtom> crowd,
                           const MarketParams& params) {
  const double drift =
      drift_minor(major_action, major.p, own_action, own.p, crowd, params);
  return {detail::clamp_proportion(own.p + drift * params.dt), own_action};
}

double reward_major(const BankState& major, double action, double cb_rate,
                    const MarketParams& params) {
  return params.deposit_volume * major.p *
             (params.premium_major + cb_rate - action) -
         adjustment_cost(action - major.r, params);
}

double reward_minor(const BankState& own, double action, double cb_rate,
                    const MarketParams& params) {
  return params.deposit_volume * own.p *
             (params.premium_minor + cb_rate - action) -
         adjustment_cost(action - own.r, params);
}

std::uint64_t proportion_clamp_count() { return clamp_events.load(); }

CentralBankChain::CentralBankChain(std::vector<double> rates, double lambda,
                                   double dt)
    : rates_(std::move(rates)) {
  const auto n = static_cast<Eigen::Index>(rates_.size());
  if (n == 0) throw DomainError("central-bank chain needs at least one rate");
  const double jump = lambda * dt;
  if (jump < 0.0 || jump > 1.0) {
    throw DomainError("central-bank chain needs lambda * dt in [0, 1]");
  }
  transition_ = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) {
        transition_(i, j) = n == 1 ? 1.0 : 1.0 - jump;
      } else {
        transition_(i, j) = jump / static_cast<double>(n - 1);
      }
    }
  }
  validate();
}

CentralBankChain::CentralBankChain(std::vector<double> rates,
                                   Eigen::MatrixXd transition)
    : rates_(std::move(rates)), transition_(std::move(transition)) {
  validate();
}

void CentralBankChain::validate() const {
  const auto n = static_cast<Eigen::Index>(rates_.size());
  if (n == 0) throw DomainError("central-bank chain needs at least one rate");
  if (transition_.rows() != n || transition_.cols() != n) {
    throw DomainError("central-bank transition matrix must be square and "
                      "match the number of rates");
  }
  for (std::size_t i = 0; i < rates_.size(); ++i) {
    if (rates_[i] < 0.0 || rates_[i] > 1.0) {
      throw DomainError("central-bank rates must lie in [0, 1]");
    }
    if (i > 0 && !(rates_[i] > rates_[i - 1])) {
      throw DomainError("central-bank rates must be strictly increasing");
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if ((transition_.row(i).array() < 0.0).any()) {
      throw DomainError("central-bank transition has a negative entry");
    }
    if (std::abs(transition_.row(i).sum() - 1.0) > 1e-12) {
      throw DomainError("central-bank transition row does not sum to 1");
    }
  }
}

std::size_t CentralBankChain::index_of(double rate) const {
  for (std::size_t i = 0; i < rates_.size(); ++i) {
    if (std::abs(rates_[i] - rate) <= kRateTolerance) return i;
  }
  std::ostringstream msg;
  msg << "central-bank rate " << rate << " is not a state of the chain";
  throw DomainError(msg.str());
}

Eigen::VectorXd CentralBankChain::row(double rate) const {
  return transition_.row(static_cast<Eigen::Index>(index_of(rate)))
      .transpose();
}

std::size_t CentralBankChain::sample_index(std::size_t from,
                                           std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng);
  double cumulative = 0.0;
  const auto row_index = static_cast<Eigen::Index>(from);
  std::size_t last_positive = from;
  for (Eigen::Index j = 0; j < transition_.cols(); ++j) {
    const double p = transition_(row_index, j);
    if (p <= 0.0) continue;
    last_positive = static_cast<std::size_t>(j);
    cumulative += p;
    if (u < cumulative) return last_positive;
  }
  return last_positive;
}

double CentralBankChain::sample(double rate, std::mt19937_64& rng) const {
  return rates_[sample_index(index_of(rate), rng)];
}

ActionGrid::ActionGrid(double lo, double hi, int count) {
  if (count < 1) throw DomainError("action grid needs at least one point");
  if (count == 1) {
    values_.push_back(lo);
    return;
  }
  if (!(lo < hi)) throw DomainError("action grid needs lo < hi");
  values_.reserve(static_cast<std::size_t>(count));
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (int k = 0; k < count; ++k) values_.push_back(lo + step * k);
  values_.back() = hi;
}

ActionGrid::ActionGrid(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DomainError("action grid needs at least one point");
  for (std::size_t k = 1; k < values_.size(); ++k) {
    if (!(values_[k] > values_[k - 1])) {
      throw DomainError("action grid must be strictly increasing");
    }
  }
}

bool ActionGrid::contains(double rate) const {
  return std::any_of(values_.begin(), values_.end(), [rate](double v) {
    return std::abs(v - rate) <= kRateTolerance;
  });
}

std::size_t ActionGrid::index_of(double rate) const {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (std::abs(values_[k] - rate) <= kRateTolerance) return k;
  }
  std::ostringstream msg;
  msg << "rate " << rate << " is not on the action grid";
  throw DomainError(msg.str());
}

}  // namespace bankmfg
