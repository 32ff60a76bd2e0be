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

#include "bankmfg/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "bankmfg/errors.hpp"
#include "bankmfg/evaluation.hpp"
#include "bankmfg/features.hpp"

namespace bankmfg {

std::string to_string(ContinuationOrder order) {
  return order == ContinuationOrder::kExpectationOfMax ? "expectation-of-max"
                                                       : "max-of-expectation";
}

ContinuationOrder continuation_order_from_string(const std::string& name) {
  if (name == "expectation-of-max") return ContinuationOrder::kExpectationOfMax;
  if (name == "max-of-expectation") return ContinuationOrder::kMaxOfExpectation;
  throw DomainError("unknown continuation order '" + name + "'");
}

void TrainConfig::validate() const {
  if (outer_iterations < 1) throw DomainError("outer_iterations must be >= 1");
  if (inner_iterations < 1) throw DomainError("inner_iterations must be >= 1");
  if (batch_size < 1) throw DomainError("batch_size must be >= 1");
  if (width < 1) throw DomainError("width must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw DomainError("learning_rate must be finite and >= 0");
  }
  if (!(replay_mix >= 0.0 && replay_mix <= 1.0)) {
    throw DomainError("replay_mix must lie in [0, 1]");
  }
  if (!(divergence_threshold > 0.0)) {
    throw DomainError("divergence_threshold must be > 0");
  }
}

std::mt19937_64 make_rng(std::uint64_t root_seed, RngStream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(root_seed),
                    static_cast<std::uint32_t>(root_seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

ProjectedMeasure random_simplex_measure(std::size_t nodes,
                                        std::mt19937_64& rng) {
  std::exponential_distribution<double> draw(1.0);
  Eigen::VectorXd w(static_cast<Eigen::Index>(nodes));
  for (Eigen::Index k = 0; k < w.size(); ++k) w[k] = draw(rng);
  w /= w.sum();
  return ProjectedMeasure(std::move(w));
}

std::vector<TrainingSample> sample_batch(
    std::mt19937_64& rng, const Game& game, const TrainConfig& config,
    std::span<const ProjectedMeasure> replay) {
  const MarketParams& params = game.params;
  std::uniform_int_distribution<int> pick_t(0, params.horizon - 1);
  std::uniform_real_distribution<double> pick_p(params.prop_min,
                                                params.prop_max);
  std::uniform_int_distribution<std::size_t> pick_action(
      0, game.actions.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_cb(0,
                                                     game.chain.size() - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  std::vector<TrainingSample> batch;
  batch.reserve(static_cast<std::size_t>(config.batch_size));
  for (int b = 0; b < config.batch_size; ++b) {
    const int t = pick_t(rng);
    const double major_p = pick_p(rng);
    const double major_r = game.actions[pick_action(rng)];
    const double major_u = game.actions[pick_action(rng)];
    const double minor_p = pick_p(rng);
    const double minor_r = game.actions[pick_action(rng)];
    const double minor_u = game.actions[pick_action(rng)];
    const double cb_rate = game.chain.rates()[pick_cb(rng)];
    const bool from_replay = !replay.empty() && coin(rng) < config.replay_mix;
    ProjectedMeasure mu =
        from_replay
            ? replay[std::uniform_int_distribution<std::size_t>(
                  0, replay.size() - 1)(rng)]
            : random_simplex_measure(game.grid.size(), rng);
    batch.push_back(TrainingSample{t, {major_p, major_r}, major_u,
                                   {minor_p, minor_r}, minor_u, cb_rate,
                                   std::move(mu)});
  }
  return batch;
}

namespace {

double discount_factor(const MarketParams& params, int t) {
  return std::pow(params.discount, t);
}

// Adds E_rc'[max_u Q] or max_u E_rc'[Q] to `target`. `z` is the next-state
// input; its action and central-bank features are overwritten.
void add_continuation(const NeuronMeasure& net, Eigen::VectorXd z,
                      Eigen::Index action_feature, Eigen::Index cb_feature,
                      double cb_rate, const Game& game,
                      const FeatureScaling& scaling, ContinuationOrder order,
                      BellmanTarget& target) {
  const std::size_t from = game.chain.index_of(cb_rate);
  std::vector<std::size_t> next_cb;
  for (std::size_t j = 0; j < game.chain.size(); ++j) {
    if (game.chain.probability(from, j) > 0.0) next_cb.push_back(j);
  }
  const std::size_t n_actions = game.actions.size();

  z[action_feature] = 0.0;
  z[cb_feature] = 0.0;
  const Eigen::VectorXd base = net.in_weights() * z + net.bias();
  const auto action_col = net.in_weights().col(action_feature);
  const auto cb_col = net.in_weights().col(cb_feature);

  Eigen::MatrixXd values(static_cast<Eigen::Index>(next_cb.size()),
                         static_cast<Eigen::Index>(n_actions));
  Eigen::VectorXd cb_pre(base.size());
  for (std::size_t j = 0; j < next_cb.size(); ++j) {
    cb_pre = base + cb_col * scaling.rate(game.chain.rates()[next_cb[j]]);
    for (std::size_t k = 0; k < n_actions; ++k) {
      values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
          net.read_out(cb_pre + action_col * scaling.rate(game.actions[k]));
    }
  }

  auto push_input = [&](std::size_t j, std::size_t k, double weight) {
    z[cb_feature] = scaling.rate(game.chain.rates()[next_cb[j]]);
    z[action_feature] = scaling.rate(game.actions[k]);
    target.continuation.emplace_back(weight, z);
  };

  if (order == ContinuationOrder::kExpectationOfMax) {
    for (std::size_t j = 0; j < next_cb.size(); ++j) {
      Eigen::Index best = 0;
      const double best_value =
          values.row(static_cast<Eigen::Index>(j)).maxCoeff(&best);
      const double prob = game.chain.probability(from, next_cb[j]);
      target.value += prob * best_value;
      push_input(j, static_cast<std::size_t>(best), prob);
    }
    return;
  }
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(values.cols());
  for (std::size_t j = 0; j < next_cb.size(); ++j) {
    expected += game.chain.probability(from, next_cb[j]) *
                values.row(static_cast<Eigen::Index>(j)).transpose();
  }
  Eigen::Index best = 0;
  target.value += expected.maxCoeff(&best);
  for (std::size_t j = 0; j < next_cb.size(); ++j) {
    push_input(j, static_cast<std::size_t>(best),
               game.chain.probability(from, next_cb[j]));
  }
}

struct NextState {
  BankState major;
  ProjectedMeasure mu;
};

NextState next_state(const BankState& major, double major_action,
                     const std::vector<RateAtom>& crowd, const Game& game) {
  BankState next_major =
      transition_major(major, major_action, crowd, game.params);
  MeanFieldStep step = mean_field_transition(
      major, major_action, crowd, game.grid, game.params,
      SupportPolicy::kClamp);
  return {next_major, std::move(step.next)};
}

BellmanTarget major_target_from(const TrainingSample& s,
                                const NeuronMeasure& major_q,
                                const NextState* next, const Game& game,
                                const FeatureScaling& scaling,
                                ContinuationOrder order) {
  BellmanTarget target;
  target.reward = discount_factor(game.params, s.t) *
                  reward_major(s.major, s.major_action, s.cb_rate,
                               game.params);
  target.value = target.reward;
  if (next == nullptr) return target;
  add_continuation(major_q,
                   encode_major(scaling, s.t + 1, next->major, 0.0, 0.0,
                                next->mu),
                   MajorLayout::kAction, MajorLayout::kCbRate, s.cb_rate,
                   game, scaling, order, target);
  return target;
}

BellmanTarget minor_target_from(const TrainingSample& s,
                                const NeuronMeasure& minor_q,
                                const MajorPolicy& major_policy,
                                const std::vector<RateAtom>* crowd,
                                const NextState* reuse, const Game& game,
                                const FeatureScaling& scaling,
                                ContinuationOrder order) {
  BellmanTarget target;
  target.reward = discount_factor(game.params, s.t) *
                  reward_minor(s.minor, s.minor_action, s.cb_rate,
                               game.params);
  target.value = target.reward;
  if (crowd == nullptr) return target;
  const double major_action =
      major_policy.action(s.t, s.major, s.cb_rate, s.mu);
  const BankState own = transition_minor(s.major, major_action, s.minor,
                                         s.minor_action, *crowd, game.params);
  const bool same = reuse != nullptr &&
                    std::abs(major_action - s.major_action) <= kRateTolerance;
  const NextState next =
      same ? *reuse : next_state(s.major, major_action, *crowd, game);
  add_continuation(minor_q,
                   encode_minor(scaling, s.t + 1, next.major, own, 0.0, 0.0,
                                next.mu),
                   MinorLayout::kAction, MinorLayout::kCbRate, s.cb_rate,
                   game, scaling, order, target);
  return target;
}

bool is_terminal(const TrainingSample& s, const Game& game) {
  if (s.t < 0 || s.t >= game.params.horizon) {
    throw DomainError("sample time outside {0, ..., T-1}");
  }
  return s.t == game.params.horizon - 1;
}

std::vector<RateAtom> sample_crowd(const TrainingSample& s,
                                   const MinorPolicy& minor_policy,
                                   const Game& game) {
  const std::vector<double> actions =
      minor_policy.node_actions(s.t, s.major, s.cb_rate, s.mu, game.grid);
  return post_decision_crowd(s.mu, actions, game.grid);
}

}  // namespace

BellmanTarget bellman_target_major(const TrainingSample& sample,
                                   const NeuronMeasure& major_q,
                                   const MinorPolicy& minor_policy,
                                   const Game& game,
                                   ContinuationOrder order) {
  const FeatureScaling scaling(game.params);
  if (is_terminal(sample, game)) {
    return major_target_from(sample, major_q, nullptr, game, scaling, order);
  }
  const std::vector<RateAtom> crowd =
      sample_crowd(sample, minor_policy, game);
  const NextState next =
      next_state(sample.major, sample.major_action, crowd, game);
  return major_target_from(sample, major_q, &next, game, scaling, order);
}

BellmanTarget bellman_target_minor(const TrainingSample& sample,
                                   const NeuronMeasure& minor_q,
                                   const MajorPolicy& major_policy,
                                   const MinorPolicy& minor_policy,
                                   const Game& game,
                                   ContinuationOrder order) {
  const FeatureScaling scaling(game.params);
  if (is_terminal(sample, game)) {
    return minor_target_from(sample, minor_q, major_policy, nullptr, nullptr,
                             game, scaling, order);
  }
  const std::vector<RateAtom> crowd =
      sample_crowd(sample, minor_policy, game);
  return minor_target_from(sample, minor_q, major_policy, &crowd, nullptr,
                           game, scaling, order);
}

std::pair<BellmanTarget, BellmanTarget> bellman_targets(
    const TrainingSample& sample, const NeuronMeasure& major_q,
    const NeuronMeasure& minor_q, const MajorPolicy& major_policy,
    const MinorPolicy& minor_policy, const Game& game,
    ContinuationOrder order) {
  const FeatureScaling scaling(game.params);
  if (is_terminal(sample, game)) {
    return {major_target_from(sample, major_q, nullptr, game, scaling, order),
            minor_target_from(sample, minor_q, major_policy, nullptr, nullptr,
                              game, scaling, order)};
  }
  const std::vector<RateAtom> crowd =
      sample_crowd(sample, minor_policy, game);
  const NextState sampled =
      next_state(sample.major, sample.major_action, crowd, game);
  BellmanTarget major = major_target_from(sample, major_q, &sampled, game,
                                          scaling, order);
  BellmanTarget minor = minor_target_from(sample, minor_q, major_policy,
                                          &crowd, &sampled, game, scaling,
                                          order);
  return {std::move(major), std::move(minor)};
}

namespace {

// Loss and gradient of the batch mean squared Bellman residual. With
// stop_gradient off the continuation inputs are differentiated as well.
LossAndGradient<double> bellman_loss_gradient(
    const NeuronMeasure& net, const Eigen::MatrixXd& inputs,
    const std::vector<BellmanTarget>& targets, bool stop_gradient) {
  Eigen::VectorXd values(static_cast<Eigen::Index>(targets.size()));
  for (std::size_t i = 0; i < targets.size(); ++i) {
    values[static_cast<Eigen::Index>(i)] = targets[i].value;
  }
  if (stop_gradient) return squared_loss_gradient(net, inputs, values);

  const Eigen::VectorXd residual = net.forward_batch(inputs) - values;
  const double batch = static_cast<double>(inputs.cols());
  Eigen::Index columns = inputs.cols();
  for (const BellmanTarget& target : targets) {
    columns += static_cast<Eigen::Index>(target.continuation.size());
  }
  Eigen::MatrixXd all(inputs.rows(), columns);
  Eigen::VectorXd coeffs(columns);
  all.leftCols(inputs.cols()) = inputs;
  coeffs.head(inputs.cols()) = residual * (2.0 / batch);
  Eigen::Index col = inputs.cols();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    for (const auto& [weight, z] : targets[i].continuation) {
      all.col(col) = z;
      coeffs[col] =
          -2.0 * residual[static_cast<Eigen::Index>(i)] * weight / batch;
      ++col;
    }
  }
  LossAndGradient<double> out;
  out.loss = residual.squaredNorm() / batch;
  out.gradient = weighted_output_gradient(net, all, coeffs);
  return out;
}

void check_divergence(double loss, double threshold, const char* network,
                      int outer, int inner) {
  if (!std::isfinite(loss) || loss > threshold) {
    std::ostringstream msg;
    msg << network << " loss " << loss << " exceeded the divergence guard "
        << threshold << " at outer " << outer << ", inner " << inner;
    throw DivergenceError(msg.str());
  }
}

}  // namespace

std::vector<TrainRecord> inner_loop(NetworkPair& live,
                                    OptimizerPair& optimizers,
                                    const MajorPolicy& major_policy,
                                    const MinorPolicy& minor_policy,
                                    const Game& game,
                                    const TrainConfig& config,
                                    std::span<const ProjectedMeasure> replay,
                                    std::mt19937_64& rng, int outer_index) {
  using Clock = std::chrono::steady_clock;
  const FeatureScaling scaling(game.params);
  const std::size_t nodes = game.grid.size();
  std::vector<TrainRecord> records;
  records.reserve(static_cast<std::size_t>(config.inner_iterations));

  for (int m = 0; m < config.inner_iterations; ++m) {
    const auto start = Clock::now();
    const std::vector<TrainingSample> batch =
        sample_batch(rng, game, config, replay);
    const auto b = static_cast<Eigen::Index>(batch.size());
    Eigen::MatrixXd major_inputs(MajorLayout::input_dim(nodes), b);
    Eigen::MatrixXd minor_inputs(MinorLayout::input_dim(nodes), b);
    std::vector<BellmanTarget> major_targets;
    std::vector<BellmanTarget> minor_targets;
    major_targets.reserve(batch.size());
    minor_targets.reserve(batch.size());
    for (Eigen::Index i = 0; i < b; ++i) {
      const TrainingSample& s = batch[static_cast<std::size_t>(i)];
      major_inputs.col(i) =
          encode_major(scaling, s.t, s.major, s.major_action, s.cb_rate, s.mu);
      minor_inputs.col(i) = encode_minor(scaling, s.t, s.major, s.minor,
                                         s.minor_action, s.cb_rate, s.mu);
      auto [major_target, minor_target] =
          bellman_targets(s, live.major, live.minor, major_policy,
                          minor_policy, game, config.continuation);
      if (!std::isfinite(major_target.value) ||
          !std::isfinite(minor_target.value)) {
        throw DivergenceError("non-finite Bellman target at outer " +
                              std::to_string(outer_index) + ", inner " +
                              std::to_string(m));
      }
      major_targets.push_back(std::move(major_target));
      minor_targets.push_back(std::move(minor_target));
    }

    const LossAndGradient<double> major = bellman_loss_gradient(
        live.major, major_inputs, major_targets, config.stop_gradient);
    const LossAndGradient<double> minor = bellman_loss_gradient(
        live.minor, minor_inputs, minor_targets, config.stop_gradient);
    check_divergence(major.loss, config.divergence_threshold, "major",
                     outer_index, m);
    check_divergence(minor.loss, config.divergence_threshold, "minor",
                     outer_index, m);
    adam_step(live.major, major.gradient, optimizers.major);
    adam_step(live.minor, minor.gradient, optimizers.minor);

    double wall_ms = 0.0;
    if (config.record_wall_clock) {
      wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start)
                    .count();
    }
    records.push_back({outer_index, m, major.loss, minor.loss, wall_ms});
  }
  return records;
}

TrainerState initial_trainer_state(const Game& game,
                                   const TrainConfig& config) {
  game.validate();
  config.validate();
  const std::size_t nodes = game.grid.size();
  std::mt19937_64 init_major = make_rng(config.seed, RngStream::kInitMajor);
  std::mt19937_64 init_minor = make_rng(config.seed, RngStream::kInitMinor);
  NetworkPair live{
      NeuronMeasure::random(config.width, MajorLayout::input_dim(nodes),
                            config.activation, init_major),
      NeuronMeasure::random(config.width, MinorLayout::input_dim(nodes),
                            config.activation, init_minor)};
  OptimizerPair optimizers;
  optimizers.major.learning_rate = config.learning_rate;
  optimizers.minor.learning_rate = config.learning_rate;
  optimizers.major.reset(live.major.width(), live.major.input_dim());
  optimizers.minor.reset(live.minor.width(), live.minor.input_dim());
  return TrainerState{0,
                      live,
                      live,
                      std::move(optimizers),
                      {},
                      make_rng(config.seed, RngStream::kSampling),
                      make_rng(config.seed, RngStream::kAveraging)};
}

std::vector<ProjectedMeasure> visited_measures(const NetworkPair& nets,
                                               const Game& game) {
  const GreedyMajorPolicy major(nets.major, game);
  const GreedyMinorPolicy minor(nets.minor, game);
  const FlowTree tree = FlowTree::build(game, major, minor);
  std::vector<ProjectedMeasure> out;
  out.reserve(tree.nodes().size());
  for (const FlowNode& node : tree.nodes()) out.push_back(node.mu);
  return out;
}

TrainResult outer_loop(TrainerState& state, const Game& game,
                       const TrainConfig& config,
                       const OuterObserver& observer) {
  config.validate();
  std::vector<TrainRecord> all_records;
  for (int n = state.completed; n < config.outer_iterations; ++n) {
    std::vector<TrainRecord> records;
    {
      const GreedyMajorPolicy major_policy(state.averaged.major, game);
      const GreedyMinorPolicy minor_policy(state.averaged.minor, game);
      records = inner_loop(state.live, state.optimizers, major_policy,
                           minor_policy, game, config, state.replay,
                           state.sampling_rng, n);
    }

    const double weight_old = static_cast<double>(n) / (n + 1.0);
    state.averaged.major =
        fp_average(state.averaged.major, state.live.major, weight_old,
                   config.averaging, &state.averaging_rng, config.width);
    state.averaged.minor =
        fp_average(state.averaged.minor, state.live.minor, weight_old,
                   config.averaging, &state.averaging_rng, config.width);
    if (config.averaging == AveragingMode::kResample) {
      state.live = state.averaged;
    }

    std::vector<ProjectedMeasure> visited =
        visited_measures(state.averaged, game);
    state.replay.insert(state.replay.end(),
                        std::make_move_iterator(visited.begin()),
                        std::make_move_iterator(visited.end()));
    state.completed = n + 1;
    if (observer) observer(state, records);
    all_records.insert(all_records.end(), records.begin(), records.end());
  }
  return TrainResult{state.averaged, std::move(all_records)};
}

TrainResult outer_loop(const Game& game, const TrainConfig& config,
                       const OuterObserver& observer) {
  TrainerState state = initial_trainer_state(game, config);
  return outer_loop(state, game, config, observer);
}

}  // namespace bankmfg
