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

#ifndef BANKMFG_EVALUATION_HPP
#define BANKMFG_EVALUATION_HPP

// Rollouts of a policy profile, its objective values and its distance to a
// Nash equilibrium.
//
// The central-bank rate is the only randomness, so everything is a function
// of the central-bank history: the flow tree enumerates those histories with
// the major state and the projected minor measure attached to each.

#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bankmfg/game.hpp"
#include "bankmfg/policies.hpp"

namespace bankmfg {

// Everything one decision step produces along a central-bank history.
struct FlowNode {
  explicit FlowNode(ProjectedMeasure measure) : mu(std::move(measure)) {}

  int t = 0;
  int parent = -1;
  std::size_t cb_index = 0;
  double cb_rate = 0.0;
  double probability = 1.0;  // probability of the history up to this node
  BankState major;
  ProjectedMeasure mu;
  double major_action = 0.0;
  std::vector<double> node_actions;
  std::vector<RateAtom> crowd;  // post-decision minor atoms
  double reward_major = 0.0;    // undiscounted
  std::vector<int> children;
  std::vector<double> child_probability;
};

class FlowTree {
 public:
  // Enumerates every central-bank history with positive probability. Throws
  // OutOfSupportError if the measure leaves the grid and Error if mass stops
  // being conserved.
  static FlowTree build(const Game& game, const MajorPolicy& major_policy,
                        const MinorPolicy& minor_policy);

  const std::vector<FlowNode>& nodes() const { return nodes_; }
  const FlowNode& root() const { return nodes_.front(); }
  // Root-to-leaf node index sequences.
  std::vector<std::vector<int>> paths() const;

 private:
  std::vector<FlowNode> nodes_;
};

inline constexpr double kConservationTolerance = 1e-9;

struct TrajectoryStep {
  int t = 0;
  double cb_rate = 0.0;
  BankState major;
  double major_action = 0.0;
  double reward_major = 0.0;
  Eigen::VectorXd mu;
  double minor_mass = 0.0;          // integral of p over mu
  double minor_mean_rate = 0.0;     // pre-decision
  double minor_mean_action = 0.0;   // post-decision
  double minor_mean_reward = 0.0;   // mu-average of minor running rewards
  double total_mass = 0.0;          // p0 + minor_mass
};

struct Trajectory {
  double probability = 1.0;  // full-tree: path probability; sampled: 1/n
  std::vector<TrajectoryStep> steps;
};

enum class RolloutMode { kSampled, kFullTree };
std::string to_string(RolloutMode mode);
RolloutMode rollout_mode_from_string(const std::string& name);

// Sampled mode draws `sampled_paths` central-bank paths from `rng`; full-tree
// mode returns every path with its probability.
std::vector<Trajectory> rollout(const Game& game,
                                const MajorPolicy& major_policy,
                                const MinorPolicy& minor_policy,
                                RolloutMode mode, int sampled_paths,
                                std::mt19937_64& rng);

struct ValueEstimate {
  double major = 0.0;
  double minor = 0.0;  // representative minor bank started from mu_0
  double major_stderr = 0.0;
  double minor_stderr = 0.0;
  int paths = 0;
};

// Objective values of the profile. Full-tree mode is exact; sampled mode is
// a Monte Carlo mean with its standard error.
ValueEstimate value_estimate(const Game& game, const MajorPolicy& major_policy,
                             const MinorPolicy& minor_policy,
                             RolloutMode mode, int sampled_paths,
                             std::mt19937_64& rng);

struct EvaluationConfig {
  int br_p_points = 121;       // proportion grid of the interpolated minor BR
  int major_br_horizon = 2;    // steps over which the major may deviate
  double major_tree_budget = 1e5;   // max (|A| |R|)^horizon
  double minor_exact_budget = 5e8;  // max exact-tree expansions
  int sampled_paths = 1000;

  void validate() const;
};

struct PlayerGap {
  double on_policy = 0.0;
  double best_response = 0.0;
  double gap = 0.0;           // best_response - on_policy
  double relative_gap = 0.0;  // gap / |on_policy|
};

struct MinorBestResponse {
  PlayerGap gap;
  std::string method;  // "exact-tree" or "grid-interpolation"
  double grid_on_policy = 0.0;
  double grid_best_response = 0.0;
  // Discrepancy between the interpolated and the exact evaluation.
  double interpolation_tolerance = 0.0;
};

struct MajorBestResponse {
  PlayerGap gap;
  int deviation_horizon = 0;
  double leaves = 0.0;
};

struct ExploitabilityReport {
  MajorBestResponse major;
  MinorBestResponse minor;
};

// Value of a single minor bank that deviates from the profile against the
// equilibrium flow (which it cannot move). Exact search over every action
// sequence along the central-bank tree, own proportion tracked exactly.
// Returns the mu_0-average of the per-atom optimal values.
double minor_best_response_exact(const FlowTree& tree, const Game& game);
double minor_on_policy_exact(const FlowTree& tree, const Game& game,
                             const MinorPolicy& minor_policy);

// Backward induction on a proportion grid with linear interpolation.
double minor_best_response_grid(const FlowTree& tree, const Game& game,
                                int p_points);
double minor_on_policy_grid(const FlowTree& tree, const Game& game,
                            const MinorPolicy& minor_policy, int p_points);

// Number of expansions minor_best_response_exact needs.
double minor_exact_expansions(const FlowTree& tree, const Game& game);

MinorBestResponse best_response_minor(const Game& game,
                                      const MajorPolicy& major_policy,
                                      const MinorPolicy& minor_policy,
                                      const EvaluationConfig& config);

// The major bank may deviate during the first `horizon` steps and follows
// its policy afterwards; the minor banks keep their policy and react through
// the measure. Exhaustive search over (action x central-bank rate) branches.
// Throws DomainError if (|A| |R|)^horizon exceeds `budget`.
MajorBestResponse best_response_major(const Game& game,
                                      const MajorPolicy& major_policy,
                                      const MinorPolicy& minor_policy,
                                      int horizon, double budget);

ExploitabilityReport evaluate_exploitability(const Game& game,
                                             const MajorPolicy& major_policy,
                                             const MinorPolicy& minor_policy,
                                             const EvaluationConfig& config);

}  // namespace bankmfg

#endif  // BANKMFG_EVALUATION_HPP
