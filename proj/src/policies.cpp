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

#include "bankmfg/policies.hpp"

#include <utility>

#include "bankmfg/errors.hpp"

namespace bankmfg {
namespace {

std::vector<double> encode_all(const FeatureScaling& scaling,
                               std::span<const double> actions) {
  std::vector<double> out;
  out.reserve(actions.size());
  for (double u : actions) out.push_back(scaling.rate(u));
  return out;
}

}  // namespace

std::vector<double> MinorPolicy::node_actions(int t, const BankState& major,
                                              double cb_rate,
                                              const ProjectedMeasure& mu,
                                              const GridSpec& grid) const {
  std::vector<double> out(grid.size());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const BankState own{grid.node_p(node), grid.node_r(node)};
    out[node] = mu[node] > 0.0 ? action(t, major, own, cb_rate, mu) : own.r;
  }
  return out;
}

GreedyMajorPolicy::GreedyMajorPolicy(NeuronMeasure net, const Game& game)
    : net_(std::move(net)),
      scaling_(game.params),
      actions_(game.actions.values().begin(), game.actions.values().end()),
      encoded_actions_(encode_all(scaling_, actions_)) {
  if (net_.input_dim() != MajorLayout::input_dim(game.grid.size())) {
    throw DimensionError("major network does not match the grid size");
  }
}

GreedyChoice<double> GreedyMajorPolicy::choose(
    int t, const BankState& major, double cb_rate,
    const ProjectedMeasure& mu) const {
  const Eigen::VectorXd z =
      encode_major(scaling_, t, major, actions_.front(), cb_rate, mu);
  return greedy_choice(net_, z, MajorLayout::kAction,
                       std::span<const double>(encoded_actions_));
}

double GreedyMajorPolicy::action(int t, const BankState& major,
                                 double cb_rate,
                                 const ProjectedMeasure& mu) const {
  return actions_[choose(t, major, cb_rate, mu).index];
}

GreedyMinorPolicy::GreedyMinorPolicy(NeuronMeasure net, const Game& game)
    : net_(std::move(net)),
      scaling_(game.params),
      actions_(game.actions.values().begin(), game.actions.values().end()),
      encoded_actions_(encode_all(scaling_, actions_)) {
  if (net_.input_dim() != MinorLayout::input_dim(game.grid.size())) {
    throw DimensionError("minor network does not match the grid size");
  }
}

GreedyChoice<double> GreedyMinorPolicy::choose(
    int t, const BankState& major, const BankState& own, double cb_rate,
    const ProjectedMeasure& mu) const {
  const Eigen::VectorXd z =
      encode_minor(scaling_, t, major, own, actions_.front(), cb_rate, mu);
  return greedy_choice(net_, z, MinorLayout::kAction,
                       std::span<const double>(encoded_actions_));
}

double GreedyMinorPolicy::action(int t, const BankState& major,
                                 const BankState& own, double cb_rate,
                                 const ProjectedMeasure& mu) const {
  return actions_[choose(t, major, own, cb_rate, mu).index];
}

std::vector<double> GreedyMinorPolicy::node_actions(
    int t, const BankState& major, double cb_rate, const ProjectedMeasure& mu,
    const GridSpec& grid) const {
  using L = MinorLayout;
  if (mu.size() != grid.size()) {
    throw DimensionError("measure does not match the grid");
  }
  // Pre-activation with the own-state and action features zeroed.
  Eigen::VectorXd z = encode_minor(scaling_, t, major, BankState{}, 0.0,
                                   cb_rate, mu);
  z[L::kOwnP] = 0.0;
  z[L::kOwnR] = 0.0;
  z[L::kAction] = 0.0;
  const Eigen::VectorXd base = net_.in_weights() * z + net_.bias();
  const auto own_p = net_.in_weights().col(L::kOwnP);
  const auto own_r = net_.in_weights().col(L::kOwnR);
  const auto act = net_.in_weights().col(L::kAction);

  std::vector<double> out(grid.size());
  Eigen::VectorXd node_pre(base.size());
  Eigen::VectorXd pre(base.size());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const double r = grid.node_r(node);
    if (!(mu[node] > 0.0)) {
      out[node] = r;
      continue;
    }
    node_pre = base + own_p * scaling_.proportion(grid.node_p(node)) +
               own_r * scaling_.rate(r);
    std::size_t best = 0;
    double best_value = 0.0;
    for (std::size_t k = 0; k < actions_.size(); ++k) {
      pre = node_pre + act * encoded_actions_[k];
      const double value = net_.read_out(pre);
      if (k == 0 || value > best_value) {
        best = k;
        best_value = value;
      }
    }
    out[node] = actions_[best];
  }
  return out;
}

MeanFieldStep mean_field_transition(int t, const BankState& major,
                                    double major_action, double cb_rate,
                                    const ProjectedMeasure& mu,
                                    const MinorPolicy& policy,
                                    const GridSpec& grid,
                                    const MarketParams& params,
                                    SupportPolicy support) {
  const std::vector<double> actions =
      policy.node_actions(t, major, cb_rate, mu, grid);
  return mean_field_transition(major, major_action, mu, actions, grid, params,
                               support);
}

}  // namespace bankmfg
