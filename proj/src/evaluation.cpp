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

#include "bankmfg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include "bankmfg/errors.hpp"

namespace bankmfg {
namespace {

double discount_factor(const MarketParams& params, int t) {
  return std::pow(params.discount, t);
}

void check_rate(double rate, const MarketParams& params, const char* who) {
  if (!(rate >= params.rate_min - kRateTolerance &&
        rate <= params.rate_max + kRateTolerance)) {
    std::ostringstream msg;
    msg << who << " posted rate " << rate << " outside ["
        << params.rate_min << ", " << params.rate_max << "]";
    throw DomainError(msg.str());
  }
}

void check_conservation(const BankState& major, const ProjectedMeasure& mu,
                        const GridSpec& grid, int t) {
  const double total = major.p + aggregate_minor_mass(mu, grid);
  if (!(std::abs(total - 1.0) < kConservationTolerance)) {
    std::ostringstream msg;
    msg << "mass conservation violated at t = " << t << ": total "
        << total;
    throw Error(msg.str());
  }
}

// Major state after one step, without the silent clamp of the public
// transition.
BankState strict_major_step(const BankState& major, double action,
                            std::span<const RateAtom> crowd,
                            const MarketParams& params) {
  const double p =
      major.p + detail::drift_major_unchecked(action, major.p, crowd, params) *
                    params.dt;
  if (!(p >= 0.0 && p <= 1.0)) {
    std::ostringstream msg;
    msg << "major proportion " << p << " left [0, 1]";
    throw OutOfSupportError(msg.str());
  }
  return {p, action};
}

}  // namespace

FlowTree FlowTree::build(const Game& game, const MajorPolicy& major_policy,
                         const MinorPolicy& minor_policy) {
  const MarketParams& params = game.params;
  FlowTree tree;
  FlowNode root(game.initial_measure());
  root.cb_index = game.chain.index_of(game.initial.cb_rate);
  root.cb_rate = game.initial.cb_rate;
  root.major = game.initial.major;
  tree.nodes_.push_back(std::move(root));

  for (std::size_t i = 0; i < tree.nodes_.size(); ++i) {
    FlowNode& node = tree.nodes_[i];
    check_conservation(node.major, node.mu, game.grid, node.t);
    node.major_action =
        major_policy.action(node.t, node.major, node.cb_rate, node.mu);
    check_rate(node.major_action, params, "major");
    node.node_actions = minor_policy.node_actions(
        node.t, node.major, node.cb_rate, node.mu, game.grid);
    for (std::size_t k = 0; k < node.node_actions.size(); ++k) {
      if (node.mu[k] > 0.0) check_rate(node.node_actions[k], params, "minor");
    }
    node.crowd = post_decision_crowd(node.mu, node.node_actions, game.grid);
    node.reward_major =
        reward_major(node.major, node.major_action, node.cb_rate, params);
    if (node.t + 1 >= params.horizon) continue;

    const BankState next_major =
        strict_major_step(node.major, node.major_action, node.crowd, params);
    MeanFieldStep step =
        mean_field_transition(node.major, node.major_action, node.crowd,
                              game.grid, params, SupportPolicy::kStrict);
    const int t = node.t;
    const std::size_t from = node.cb_index;
    const double prob = node.probability;
    for (std::size_t j = 0; j < game.chain.size(); ++j) {
      const double p = game.chain.probability(from, j);
      if (!(p > 0.0)) continue;
      FlowNode child(step.next);
      child.t = t + 1;
      child.parent = static_cast<int>(i);
      child.cb_index = j;
      child.cb_rate = game.chain.rates()[j];
      child.probability = prob * p;
      child.major = next_major;
      tree.nodes_.push_back(std::move(child));
      // push_back may have moved the parent.
      FlowNode& parent = tree.nodes_[i];
      parent.children.push_back(static_cast<int>(tree.nodes_.size() - 1));
      parent.child_probability.push_back(p);
    }
  }
  return tree;
}

std::vector<std::vector<int>> FlowTree::paths() const {
  std::vector<std::vector<int>> out;
  std::vector<int> current;
  std::vector<std::pair<int, int>> todo{{0, 0}};
  while (!todo.empty()) {
    const auto [index, depth] = todo.back();
    todo.pop_back();
    current.resize(static_cast<std::size_t>(depth));
    current.push_back(index);
    const FlowNode& node = nodes_[static_cast<std::size_t>(index)];
    if (node.children.empty()) {
      out.push_back(current);
      continue;
    }
    for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) {
      todo.emplace_back(*it, depth + 1);
    }
  }
  return out;
}

std::string to_string(RolloutMode mode) {
  return mode == RolloutMode::kSampled ? "sampled" : "full-tree";
}

RolloutMode rollout_mode_from_string(const std::string& name) {
  if (name == "sampled") return RolloutMode::kSampled;
  if (name == "full-tree") return RolloutMode::kFullTree;
  throw DomainError("unknown rollout mode '" + name + "'");
}

namespace {

std::vector<int> sample_path(const FlowTree& tree, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> path{0};
  const FlowNode* node = &tree.root();
  while (!node->children.empty()) {
    const double u = unit(rng);
    double cumulative = 0.0;
    std::size_t pick = node->children.size() - 1;
    for (std::size_t k = 0; k < node->children.size(); ++k) {
      cumulative += node->child_probability[k];
      if (u < cumulative) {
        pick = k;
        break;
      }
    }
    path.push_back(node->children[pick]);
    node = &tree.nodes()[static_cast<std::size_t>(node->children[pick])];
  }
  return path;
}

TrajectoryStep make_step(const FlowNode& node, const Game& game) {
  TrajectoryStep step;
  step.t = node.t;
  step.cb_rate = node.cb_rate;
  step.major = node.major;
  step.major_action = node.major_action;
  step.reward_major = node.reward_major;
  step.mu = node.mu.weights();
  step.minor_mass = aggregate_minor_mass(node.mu, game.grid);
  step.minor_mean_rate = mean_rate(node.mu, game.grid);
  double action = 0.0;
  double reward = 0.0;
  for (std::size_t k = 0; k < game.grid.size(); ++k) {
    const double w = node.mu[k];
    if (!(w > 0.0)) continue;
    const BankState own{game.grid.node_p(k), game.grid.node_r(k)};
    action += w * node.node_actions[k];
    reward += w * reward_minor(own, node.node_actions[k], node.cb_rate,
                               game.params);
  }
  step.minor_mean_action = action;
  step.minor_mean_reward = reward;
  step.total_mass = node.major.p + step.minor_mass;
  return step;
}

Trajectory make_trajectory(const FlowTree& tree, const std::vector<int>& path,
                           double probability, const Game& game) {
  Trajectory out;
  out.probability = probability;
  for (int index : path) {
    out.steps.push_back(
        make_step(tree.nodes()[static_cast<std::size_t>(index)], game));
  }
  return out;
}

double major_path_value(const FlowTree& tree, const std::vector<int>& path,
                        const MarketParams& params) {
  double value = 0.0;
  for (int index : path) {
    const FlowNode& node = tree.nodes()[static_cast<std::size_t>(index)];
    value += discount_factor(params, node.t) * node.reward_major;
  }
  return value;
}

// Atoms of the initial minor distribution.
std::vector<RateAtom> initial_atoms(const FlowTree& tree, const Game& game) {
  std::vector<RateAtom> atoms;
  const ProjectedMeasure& mu = tree.root().mu;
  for (std::size_t k = 0; k < game.grid.size(); ++k) {
    if (mu[k] > 0.0) {
      atoms.push_back({game.grid.node_p(k), game.grid.node_r(k), mu[k]});
    }
  }
  return atoms;
}

// Value of one minor bank following `policy` along a central-bank path,
// tracking its own proportion exactly.
double minor_path_value(const FlowTree& tree, const std::vector<int>& path,
                        BankState own, const Game& game,
                        const MinorPolicy& policy) {
  const MarketParams& params = game.params;
  double value = 0.0;
  for (int index : path) {
    const FlowNode& node = tree.nodes()[static_cast<std::size_t>(index)];
    const double u =
        policy.action(node.t, node.major, own, node.cb_rate, node.mu);
    value += discount_factor(params, node.t) *
             reward_minor(own, u, node.cb_rate, params);
    own = {own.p + detail::drift_minor_unchecked(node.major_action,
                                                 node.major.p, u, own.p,
                                                 node.crowd, params) *
                       params.dt,
           u};
  }
  return value;
}

double minor_path_value(const FlowTree& tree, const std::vector<int>& path,
                        const Game& game, const MinorPolicy& policy) {
  double value = 0.0;
  for (const RateAtom& atom : initial_atoms(tree, game)) {
    value += atom.weight *
             minor_path_value(tree, path, {atom.p, atom.r}, game, policy);
  }
  return value;
}

}  // namespace

std::vector<Trajectory> rollout(const Game& game,
                                const MajorPolicy& major_policy,
                                const MinorPolicy& minor_policy,
                                RolloutMode mode, int sampled_paths,
                                std::mt19937_64& rng) {
  const FlowTree tree = FlowTree::build(game, major_policy, minor_policy);
  std::vector<Trajectory> out;
  if (mode == RolloutMode::kFullTree) {
    for (const std::vector<int>& path : tree.paths()) {
      const double prob =
          tree.nodes()[static_cast<std::size_t>(path.back())].probability;
      out.push_back(make_trajectory(tree, path, prob, game));
    }
    return out;
  }
  if (sampled_paths < 1) throw DomainError("sampled_paths must be >= 1");
  for (int k = 0; k < sampled_paths; ++k) {
    out.push_back(make_trajectory(tree, sample_path(tree, rng),
                                  1.0 / sampled_paths, game));
  }
  return out;
}

ValueEstimate value_estimate(const Game& game, const MajorPolicy& major_policy,
                             const MinorPolicy& minor_policy,
                             RolloutMode mode, int sampled_paths,
                             std::mt19937_64& rng) {
  const FlowTree tree = FlowTree::build(game, major_policy, minor_policy);
  ValueEstimate out;
  if (mode == RolloutMode::kFullTree) {
    for (const FlowNode& node : tree.nodes()) {
      out.major += node.probability *
                   discount_factor(game.params, node.t) * node.reward_major;
    }
    out.minor = minor_on_policy_exact(tree, game, minor_policy);
    out.paths = static_cast<int>(tree.paths().size());
    return out;
  }
  if (sampled_paths < 1) throw DomainError("sampled_paths must be >= 1");
  std::vector<double> major(static_cast<std::size_t>(sampled_paths));
  std::vector<double> minor(major.size());
  for (std::size_t k = 0; k < major.size(); ++k) {
    const std::vector<int> path = sample_path(tree, rng);
    major[k] = major_path_value(tree, path, game.params);
    minor[k] = minor_path_value(tree, path, game, minor_policy);
  }
  auto mean_and_stderr = [](const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    if (xs.size() < 2) return std::pair{mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::pair{mean, std::sqrt(ss / (n - 1.0) / n)};
  };
  std::tie(out.major, out.major_stderr) = mean_and_stderr(major);
  std::tie(out.minor, out.minor_stderr) = mean_and_stderr(minor);
  out.paths = sampled_paths;
  return out;
}

void EvaluationConfig::validate() const {
  if (br_p_points < 2) throw DomainError("br_p_points must be >= 2");
  if (major_br_horizon < 1) throw DomainError("major_br_horizon must be >= 1");
  if (!(major_tree_budget >= 1.0)) {
    throw DomainError("major_tree_budget must be >= 1");
  }
  if (!(minor_exact_budget >= 0.0)) {
    throw DomainError("minor_exact_budget must be >= 0");
  }
  if (sampled_paths < 1) throw DomainError("sampled_paths must be >= 1");
}

namespace {

// Per tree node and candidate action: own-proportion drift is
// gain - loss_speed * p, plus the reward prefactor.
struct MinorNodeTable {
  std::vector<double> gain;
  std::vector<double> loss_speed;
};

std::vector<MinorNodeTable> minor_node_tables(const FlowTree& tree,
                                              const Game& game) {
  const MarketParams& params = game.params;
  std::vector<MinorNodeTable> tables(tree.nodes().size());
  for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
    const FlowNode& node = tree.nodes()[i];
    MinorNodeTable& table = tables[i];
    for (std::size_t k = 0; k < game.actions.size(); ++k) {
      const double u = game.actions[k];
      const double at_zero = detail::drift_minor_unchecked(
          node.major_action, node.major.p, u, 0.0, node.crowd, params);
      const double at_one = detail::drift_minor_unchecked(
          node.major_action, node.major.p, u, 1.0, node.crowd, params);
      table.gain.push_back(at_zero * params.dt);
      table.loss_speed.push_back((at_zero - at_one) * params.dt);
    }
  }
  return tables;
}

class ExactMinorSearch {
 public:
  ExactMinorSearch(const FlowTree& tree, const Game& game)
      : tree_(tree), game_(game), tables_(minor_node_tables(tree, game)) {}

  double value(int index, double p, double r) const {
    const FlowNode& node = tree_.nodes()[static_cast<std::size_t>(index)];
    const MinorNodeTable& table = tables_[static_cast<std::size_t>(index)];
    const MarketParams& params = game_.params;
    const double discount = discount_factor(params, node.t);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < game_.actions.size(); ++k) {
      const double u = game_.actions[k];
      double v = discount * reward_minor({p, r}, u, node.cb_rate, params);
      if (!node.children.empty()) {
        const double next_p = p + table.gain[k] - table.loss_speed[k] * p;
        for (std::size_t c = 0; c < node.children.size(); ++c) {
          v += node.child_probability[c] * value(node.children[c], next_p, u);
        }
      }
      best = std::max(best, v);
    }
    return best;
  }

 private:
  const FlowTree& tree_;
  const Game& game_;
  std::vector<MinorNodeTable> tables_;
};

// Linear interpolation on an increasing grid, clamped at the ends.
double interpolate(const std::vector<double>& xs, const double* ys, double x) {
  if (x <= xs.front()) return ys[0];
  if (x >= xs.back()) return ys[xs.size() - 1];
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  const std::size_t lo = hi - 1;
  const double s = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return (1.0 - s) * ys[lo] + s * ys[hi];
}

// Own-rate states of the grid method: the action grid and the grid rates.
std::vector<double> rate_states(const Game& game) {
  std::vector<double> rates(game.actions.values().begin(),
                            game.actions.values().end());
  for (double r : game.grid.r_points) {
    if (std::none_of(rates.begin(), rates.end(), [&](double x) {
          return std::abs(x - r) <= kRateTolerance;
        })) {
      rates.push_back(r);
    }
  }
  std::sort(rates.begin(), rates.end());
  return rates;
}

std::size_t rate_state_index(const std::vector<double>& rates, double r) {
  for (std::size_t j = 0; j < rates.size(); ++j) {
    if (std::abs(rates[j] - r) <= kRateTolerance) return j;
  }
  throw DomainError("rate " + std::to_string(r) +
                    " is not a state of the interpolation grid");
}

// Backward induction on (tree node, p grid, own-rate state). `policy` null
// means the bank maximizes.
double minor_grid_value(const FlowTree& tree, const Game& game, int p_points,
                        const MinorPolicy* policy) {
  if (p_points < 2) throw DomainError("p_points must be >= 2");
  const MarketParams& params = game.params;
  std::vector<double> ps(static_cast<std::size_t>(p_points));
  for (int i = 0; i < p_points; ++i) {
    ps[static_cast<std::size_t>(i)] =
        params.prop_min +
        (params.prop_max - params.prop_min) * i / (p_points - 1.0);
  }
  const std::vector<double> rates = rate_states(game);
  const std::vector<MinorNodeTable> tables = minor_node_tables(tree, game);
  std::vector<std::size_t> action_state(game.actions.size());
  for (std::size_t k = 0; k < game.actions.size(); ++k) {
    action_state[k] = rate_state_index(rates, game.actions[k]);
  }
  const std::size_t n_p = ps.size();
  // values[node] laid out as [rate state][p index].
  std::vector<std::vector<double>> values(tree.nodes().size());

  for (std::size_t idx = tree.nodes().size(); idx-- > 0;) {
    const FlowNode& node = tree.nodes()[idx];
    const MinorNodeTable& table = tables[idx];
    const double discount = discount_factor(params, node.t);
    std::vector<double>& out = values[idx];
    out.assign(rates.size() * n_p, 0.0);
    // Continuation per action as a function of next p: sum over children.
    std::vector<double> next(game.actions.size() * n_p, 0.0);
    auto continuation = [&](std::size_t k, double next_p) {
      double v = 0.0;
      for (std::size_t c = 0; c < node.children.size(); ++c) {
        const std::vector<double>& child =
            values[static_cast<std::size_t>(node.children[c])];
        v += node.child_probability[c] *
             interpolate(ps, child.data() + action_state[k] * n_p, next_p);
      }
      return v;
    };
    for (std::size_t j = 0; j < rates.size(); ++j) {
      for (std::size_t i = 0; i < n_p; ++i) {
        const BankState own{ps[i], rates[j]};
        auto action_value = [&](std::size_t k) {
          const double u = game.actions[k];
          double v = discount * reward_minor(own, u, node.cb_rate, params);
          if (!node.children.empty()) {
            v += continuation(
                k, own.p + table.gain[k] - table.loss_speed[k] * own.p);
          }
          return v;
        };
        double v;
        if (policy != nullptr) {
          const double u =
              policy->action(node.t, node.major, own, node.cb_rate, node.mu);
          v = action_value(game.actions.index_of(u));
        } else {
          v = -std::numeric_limits<double>::infinity();
          for (std::size_t k = 0; k < game.actions.size(); ++k) {
            v = std::max(v, action_value(k));
          }
        }
        out[j * n_p + i] = v;
      }
    }
  }

  double total = 0.0;
  const std::vector<double>& root = values.front();
  for (const RateAtom& atom : initial_atoms(tree, game)) {
    const std::size_t j = rate_state_index(rates, atom.r);
    total += atom.weight * interpolate(ps, root.data() + j * n_p, atom.p);
  }
  return total;
}

}  // namespace

double minor_best_response_exact(const FlowTree& tree, const Game& game) {
  const ExactMinorSearch search(tree, game);
  double total = 0.0;
  for (const RateAtom& atom : initial_atoms(tree, game)) {
    total += atom.weight * search.value(0, atom.p, atom.r);
  }
  return total;
}

double minor_on_policy_exact(const FlowTree& tree, const Game& game,
                             const MinorPolicy& minor_policy) {
  double total = 0.0;
  for (const std::vector<int>& path : tree.paths()) {
    const double prob =
        tree.nodes()[static_cast<std::size_t>(path.back())].probability;
    total += prob * minor_path_value(tree, path, game, minor_policy);
  }
  return total;
}

double minor_best_response_grid(const FlowTree& tree, const Game& game,
                                int p_points) {
  return minor_grid_value(tree, game, p_points, nullptr);
}

double minor_on_policy_grid(const FlowTree& tree, const Game& game,
                            const MinorPolicy& minor_policy, int p_points) {
  return minor_grid_value(tree, game, p_points, &minor_policy);
}

double minor_exact_expansions(const FlowTree& tree, const Game& game) {
  const double actions = static_cast<double>(game.actions.size());
  double per_atom = 0.0;
  for (const FlowNode& node : tree.nodes()) {
    per_atom += std::pow(actions, node.t + 1);
  }
  return per_atom * static_cast<double>(initial_atoms(tree, game).size());
}

namespace {

PlayerGap make_gap(double on_policy, double best_response) {
  PlayerGap gap;
  gap.on_policy = on_policy;
  gap.best_response = best_response;
  gap.gap = best_response - on_policy;
  gap.relative_gap = on_policy != 0.0 ? gap.gap / std::abs(on_policy)
                                      : std::numeric_limits<double>::infinity();
  return gap;
}

MinorBestResponse minor_report(const FlowTree& tree, const Game& game,
                               const MinorPolicy& minor_policy,
                               const EvaluationConfig& config) {
  MinorBestResponse out;
  out.grid_on_policy =
      minor_on_policy_grid(tree, game, minor_policy, config.br_p_points);
  out.grid_best_response =
      minor_best_response_grid(tree, game, config.br_p_points);
  const double on_policy = minor_on_policy_exact(tree, game, minor_policy);
  const double on_policy_error = std::abs(out.grid_on_policy - on_policy);
  if (minor_exact_expansions(tree, game) <= config.minor_exact_budget) {
    const double best = minor_best_response_exact(tree, game);
    out.method = "exact-tree";
    out.gap = make_gap(on_policy, best);
    out.interpolation_tolerance =
        std::max(on_policy_error, std::abs(out.grid_best_response - best));
  } else {
    out.method = "grid-interpolation";
    out.gap = make_gap(out.grid_on_policy, out.grid_best_response);
    out.interpolation_tolerance = on_policy_error;
  }
  return out;
}

class MajorDeviationSearch {
 public:
  MajorDeviationSearch(const Game& game, const MajorPolicy& major_policy,
                       const MinorPolicy& minor_policy, int horizon)
      : game_(game),
        major_policy_(major_policy),
        minor_policy_(minor_policy),
        horizon_(horizon) {}

  double value(int t, const BankState& major, std::size_t cb_index,
               const ProjectedMeasure& mu) {
    const MarketParams& params = game_.params;
    const double cb_rate = game_.chain.rates()[cb_index];
    check_conservation(major, mu, game_.grid, t);
    const std::vector<double> node_actions =
        minor_policy_.node_actions(t, major, cb_rate, mu, game_.grid);
    const std::vector<RateAtom> crowd =
        post_decision_crowd(mu, node_actions, game_.grid);
    std::vector<double> candidates;
    if (t < horizon_) {
      candidates.assign(game_.actions.values().begin(),
                        game_.actions.values().end());
    } else {
      candidates.push_back(major_policy_.action(t, major, cb_rate, mu));
    }
    const double discount = discount_factor(params, t);
    double best = -std::numeric_limits<double>::infinity();
    for (double u : candidates) {
      double v = discount * reward_major(major, u, cb_rate, params);
      if (t + 1 < params.horizon) {
        const BankState next_major =
            strict_major_step(major, u, crowd, params);
        const MeanFieldStep step = mean_field_transition(
            major, u, crowd, game_.grid, params, SupportPolicy::kStrict);
        for (std::size_t j = 0; j < game_.chain.size(); ++j) {
          const double p = game_.chain.probability(cb_index, j);
          if (!(p > 0.0)) continue;
          v += p * value(t + 1, next_major, j, step.next);
        }
      } else {
        leaves_ += 1.0;
      }
      best = std::max(best, v);
    }
    return best;
  }

  double leaves() const { return leaves_; }

 private:
  const Game& game_;
  const MajorPolicy& major_policy_;
  const MinorPolicy& minor_policy_;
  int horizon_;
  double leaves_ = 0.0;
};

}  // namespace

MinorBestResponse best_response_minor(const Game& game,
                                      const MajorPolicy& major_policy,
                                      const MinorPolicy& minor_policy,
                                      const EvaluationConfig& config) {
  config.validate();
  const FlowTree tree = FlowTree::build(game, major_policy, minor_policy);
  return minor_report(tree, game, minor_policy, config);
}

MajorBestResponse best_response_major(const Game& game,
                                      const MajorPolicy& major_policy,
                                      const MinorPolicy& minor_policy,
                                      int horizon, double budget) {
  if (horizon < 1 || horizon > game.params.horizon) {
    throw DomainError("major deviation horizon must lie in [1, T]");
  }
  const double branching = static_cast<double>(game.actions.size()) *
                           static_cast<double>(game.chain.size());
  const double size = std::pow(branching, horizon);
  if (size > budget) {
    std::ostringstream msg;
    msg << "major best-response tree has " << size
        << " branches, above the budget " << budget;
    throw DomainError(msg.str());
  }
  const FlowTree tree = FlowTree::build(game, major_policy, minor_policy);
  double on_policy = 0.0;
  for (const FlowNode& node : tree.nodes()) {
    on_policy += node.probability * discount_factor(game.params, node.t) *
                 node.reward_major;
  }
  MajorDeviationSearch search(game, major_policy, minor_policy, horizon);
  const FlowNode& root = tree.root();
  const double best = search.value(0, root.major, root.cb_index, root.mu);
  MajorBestResponse out;
  out.gap = make_gap(on_policy, best);
  out.deviation_horizon = horizon;
  out.leaves = search.leaves();
  return out;
}

ExploitabilityReport evaluate_exploitability(const Game& game,
                                             const MajorPolicy& major_policy,
                                             const MinorPolicy& minor_policy,
                                             const EvaluationConfig& config) {
  config.validate();
  ExploitabilityReport report;
  report.minor = best_response_minor(game, major_policy, minor_policy, config);
  report.major =
      best_response_major(game, major_policy, minor_policy,
                          std::min(config.major_br_horizon,
                                   game.params.horizon),
                          config.major_tree_budget);
  return report;
}

}  // namespace bankmfg
