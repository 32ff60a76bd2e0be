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

#ifndef BANKMFG_TRAINER_HPP
#define BANKMFG_TRAINER_HPP

// Fictitious-play deep Q-iteration for the major and the representative minor
// bank. Each outer iteration freezes the greedy policies of the averaged
// networks, fits the live networks to their Bellman targets for a number of
// optimizer steps, and mixes the result into the running average with weight
// 1/(n+1).

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bankmfg/game.hpp"
#include "bankmfg/policies.hpp"
#include "bankmfg/qnet.hpp"

namespace bankmfg {

// Order of the max over the next action and the expectation over the next
// central-bank rate in the continuation term.
enum class ContinuationOrder {
  kExpectationOfMax,  // E_rc'[max_u Q]: the next action sees rc'
  kMaxOfExpectation,  // max_u E_rc'[Q]
};

std::string to_string(ContinuationOrder order);
ContinuationOrder continuation_order_from_string(const std::string& name);

struct TrainConfig {
  int outer_iterations = 100;
  int inner_iterations = 400;
  int batch_size = 240;
  int width = 256;
  double learning_rate = 1e-3;
  AveragingMode averaging = AveragingMode::kResample;
  // Probability that a sampled measure comes from the replay of visited
  // measures (when it is not empty) rather than a flat Dirichlet draw.
  double replay_mix = 0.5;
  Activation activation = Activation::kRelu;
  bool stop_gradient = true;
  ContinuationOrder continuation = ContinuationOrder::kExpectationOfMax;
  double divergence_threshold = 1e3;
  bool record_wall_clock = true;
  std::uint64_t seed = 0;

  void validate() const;
};

// Independent random streams derived from one root seed.
enum class RngStream : std::uint64_t {
  kInitMajor = 1,
  kInitMinor = 2,
  kSampling = 3,
  kAveraging = 4,
  kRollout = 5,
  kEvaluation = 6,
};
std::mt19937_64 make_rng(std::uint64_t root_seed, RngStream stream);

struct TrainingSample {
  int t = 0;
  BankState major;
  double major_action = 0.0;
  BankState minor;
  double minor_action = 0.0;
  double cb_rate = 0.0;
  ProjectedMeasure mu;
};

// t uniform on {0..T-1}; proportions uniform on the state box; rates,
// actions and the central-bank rate uniform on their grids; the measure from
// the replay with probability replay_mix, otherwise flat Dirichlet.
std::vector<TrainingSample> sample_batch(std::mt19937_64& rng,
                                         const Game& game,
                                         const TrainConfig& config,
                                         std::span<const ProjectedMeasure>
                                             replay);

// Flat Dirichlet draw over `nodes` simplex vertices.
ProjectedMeasure random_simplex_measure(std::size_t nodes,
                                        std::mt19937_64& rng);

// Right-hand side of the Bellman equation for one sample. `continuation`
// lists the next-state network inputs the target depends on and their
// weights, so that a residual-gradient update can differentiate through it.
struct BellmanTarget {
  double value = 0.0;
  double reward = 0.0;  // discounted running reward
  std::vector<std::pair<double, Eigen::VectorXd>> continuation;
};

BellmanTarget bellman_target_major(const TrainingSample& sample,
                                   const NeuronMeasure& major_q,
                                   const MinorPolicy& minor_policy,
                                   const Game& game,
                                   ContinuationOrder order =
                                       ContinuationOrder::kExpectationOfMax);

BellmanTarget bellman_target_minor(const TrainingSample& sample,
                                   const NeuronMeasure& minor_q,
                                   const MajorPolicy& major_policy,
                                   const MinorPolicy& minor_policy,
                                   const Game& game,
                                   ContinuationOrder order =
                                       ContinuationOrder::kExpectationOfMax);

// Both targets of one sample, sharing the minor policy's node actions.
std::pair<BellmanTarget, BellmanTarget> bellman_targets(
    const TrainingSample& sample, const NeuronMeasure& major_q,
    const NeuronMeasure& minor_q, const MajorPolicy& major_policy,
    const MinorPolicy& minor_policy, const Game& game,
    ContinuationOrder order);

struct NetworkPair {
  NeuronMeasure major;
  NeuronMeasure minor;
};

struct OptimizerPair {
  AdamState<double> major;
  AdamState<double> minor;
};

struct TrainRecord {
  int outer = 0;
  int inner = 0;
  double loss_major = 0.0;
  double loss_minor = 0.0;
  double wall_ms = 0.0;
};

// One optimizer step per network per iteration on a shared fresh batch.
// Throws DivergenceError when a loss exceeds the configured threshold.
std::vector<TrainRecord> inner_loop(NetworkPair& live,
                                    OptimizerPair& optimizers,
                                    const MajorPolicy& major_policy,
                                    const MinorPolicy& minor_policy,
                                    const Game& game,
                                    const TrainConfig& config,
                                    std::span<const ProjectedMeasure> replay,
                                    std::mt19937_64& rng, int outer_index);

struct TrainerState {
  int completed = 0;      // outer iterations finished
  NetworkPair averaged;   // fictitious-play average, drives the policies
  NetworkPair live;       // networks being fitted
  OptimizerPair optimizers;
  std::vector<ProjectedMeasure> replay;
  std::mt19937_64 sampling_rng;
  std::mt19937_64 averaging_rng;
};

TrainerState initial_trainer_state(const Game& game,
                                   const TrainConfig& config);

// Called after every outer iteration with the records of that iteration.
using OuterObserver =
    std::function<void(const TrainerState&, std::span<const TrainRecord>)>;

struct TrainResult {
  NetworkPair averaged;
  std::vector<TrainRecord> records;
};

TrainResult outer_loop(const Game& game, const TrainConfig& config,
                       const OuterObserver& observer = {});

// Runs outer iterations [state.completed, config.outer_iterations).
TrainResult outer_loop(TrainerState& state, const Game& game,
                       const TrainConfig& config,
                       const OuterObserver& observer = {});

// Measures on every central-bank path of a rollout under the greedy
// policies of `nets`, used to refresh the replay.
std::vector<ProjectedMeasure> visited_measures(const NetworkPair& nets,
                                               const Game& game);

}  // namespace bankmfg

#endif  // BANKMFG_TRAINER_HPP
