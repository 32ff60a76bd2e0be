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

#ifndef BANKMFG_POLICIES_HPP
#define BANKMFG_POLICIES_HPP

// Control functions of the major bank, u0_t(x0, rc, mu), and of a minor bank,
// u_t(x0, x, rc, mu). Greedy policies read them off a Q-network.

#include <functional>
#include <vector>

#include "bankmfg/features.hpp"
#include "bankmfg/game.hpp"
#include "bankmfg/market_model.hpp"
#include "bankmfg/measure_projection.hpp"
#include "bankmfg/qnet.hpp"

namespace bankmfg {

class MajorPolicy {
 public:
  virtual ~MajorPolicy() = default;
  virtual double action(int t, const BankState& major, double cb_rate,
                        const ProjectedMeasure& mu) const = 0;
};

class MinorPolicy {
 public:
  virtual ~MinorPolicy() = default;
  virtual double action(int t, const BankState& major, const BankState& own,
                        double cb_rate, const ProjectedMeasure& mu) const = 0;

  // Action at every grid node. Nodes without mass keep their current rate
  // since nothing downstream reads them.
  virtual std::vector<double> node_actions(int t, const BankState& major,
                                           double cb_rate,
                                           const ProjectedMeasure& mu,
                                           const GridSpec& grid) const;
};

class ConstantMajorPolicy final : public MajorPolicy {
 public:
  explicit ConstantMajorPolicy(double rate) : rate_(rate) {}
  double action(int, const BankState&, double,
                const ProjectedMeasure&) const override {
    return rate_;
  }

 private:
  double rate_;
};

class ConstantMinorPolicy final : public MinorPolicy {
 public:
  explicit ConstantMinorPolicy(double rate) : rate_(rate) {}
  double action(int, const BankState&, const BankState&, double,
                const ProjectedMeasure&) const override {
    return rate_;
  }

 private:
  double rate_;
};

// Keeps the currently posted rate.
class HoldRateMajorPolicy final : public MajorPolicy {
 public:
  double action(int, const BankState& major, double,
                const ProjectedMeasure&) const override {
    return major.r;
  }
};

class HoldRateMinorPolicy final : public MinorPolicy {
 public:
  double action(int, const BankState&, const BankState& own, double,
                const ProjectedMeasure&) const override {
    return own.r;
  }
};

class FunctionMajorPolicy final : public MajorPolicy {
 public:
  using Fn = std::function<double(int, const BankState&, double,
                                  const ProjectedMeasure&)>;
  explicit FunctionMajorPolicy(Fn fn) : fn_(std::move(fn)) {}
  double action(int t, const BankState& major, double cb_rate,
                const ProjectedMeasure& mu) const override {
    return fn_(t, major, cb_rate, mu);
  }

 private:
  Fn fn_;
};

class FunctionMinorPolicy final : public MinorPolicy {
 public:
  using Fn = std::function<double(int, const BankState&, const BankState&,
                                  double, const ProjectedMeasure&)>;
  explicit FunctionMinorPolicy(Fn fn) : fn_(std::move(fn)) {}
  double action(int t, const BankState& major, const BankState& own,
                double cb_rate, const ProjectedMeasure& mu) const override {
    return fn_(t, major, own, cb_rate, mu);
  }

 private:
  Fn fn_;
};

// argmax over the action grid of the major Q-network.
class GreedyMajorPolicy final : public MajorPolicy {
 public:
  GreedyMajorPolicy(NeuronMeasure net, const Game& game);

  double action(int t, const BankState& major, double cb_rate,
                const ProjectedMeasure& mu) const override;
  GreedyChoice<double> choose(int t, const BankState& major, double cb_rate,
                              const ProjectedMeasure& mu) const;
  const NeuronMeasure& net() const { return net_; }

 private:
  NeuronMeasure net_;
  FeatureScaling scaling_;
  std::vector<double> actions_;
  std::vector<double> encoded_actions_;
};

// argmax over the action grid of the minor Q-network. node_actions shares the
// measure part of the hidden pre-activation across all grid nodes.
class GreedyMinorPolicy final : public MinorPolicy {
 public:
  GreedyMinorPolicy(NeuronMeasure net, const Game& game);

  double action(int t, const BankState& major, const BankState& own,
                double cb_rate, const ProjectedMeasure& mu) const override;
  std::vector<double> node_actions(int t, const BankState& major,
                                   double cb_rate, const ProjectedMeasure& mu,
                                   const GridSpec& grid) const override;
  GreedyChoice<double> choose(int t, const BankState& major,
                              const BankState& own, double cb_rate,
                              const ProjectedMeasure& mu) const;
  const NeuronMeasure& net() const { return net_; }

 private:
  NeuronMeasure net_;
  FeatureScaling scaling_;
  std::vector<double> actions_;
  std::vector<double> encoded_actions_;
};

// Mean-field step with the minor banks following `policy`.
MeanFieldStep mean_field_transition(int t, const BankState& major,
                                    double major_action, double cb_rate,
                                    const ProjectedMeasure& mu,
                                    const MinorPolicy& policy,
                                    const GridSpec& grid,
                                    const MarketParams& params,
                                    SupportPolicy support =
                                        SupportPolicy::kStrict);

}  // namespace bankmfg

#endif  // BANKMFG_POLICIES_HPP
