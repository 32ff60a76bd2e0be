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


#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "bankmfg/errors.hpp"
#include "bankmfg/evaluation.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bankmfg;

namespace {

// All minor banks start at 3% so that a common 3% rate means no migration.
Game flat_game(double cb_rate, double lambda) {
  Game game = Game::default_profile();
  game.chain = CentralBankChain({0.025, 0.03, 0.035}, lambda, 1.0);
  game.initial.cb_rate = cb_rate;
  game.initial.minor_r_lo = 0.03;
  game.initial.minor_r_hi = 0.03;
  return game;
}

double geometric(double g, int n) {
  double s = 0.0;
  for (int t = 0; t < n; ++t) s += std::pow(g, t);
  return s;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("flow tree enumerates every central-bank history") {
  const Game game = Game::default_profile();
  const auto major = oracle::random_major_policy(game, 1.0);
  const auto minor = oracle::random_minor_policy(game, 2.0);
  const FlowTree tree = FlowTree::build(game, major, minor);
  CHECK(tree.nodes().size() == 121);
  const auto paths = tree.paths();
  CHECK(paths.size() == 81);
  double total = 0.0;
  for (const auto& path : paths) {
    CHECK(path.size() == 5);
    total += tree.nodes()[static_cast<std::size_t>(path.back())].probability;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  for (const FlowNode& node : tree.nodes()) {
    double children = 0.0;
    for (double p : node.child_probability) children += p;
    if (!node.children.empty()) CHECK(children == doctest::Approx(1.0));
    CHECK(node.mu.weights().minCoeff() >= 0.0);
    CHECK(std::abs(node.major.p + aggregate_minor_mass(node.mu, game.grid) -
                   1.0) < kConservationTolerance);
  }
}

TEST_CASE("without rate differences nothing moves") {
  const Game game = flat_game(0.03, 0.2);
  const ConstantMajorPolicy major(0.03);
  const ConstantMinorPolicy minor(0.03);
  const FlowTree tree = FlowTree::build(game, major, minor);
  for (const FlowNode& node : tree.nodes()) {
    CHECK(node.major.p == game.initial.major.p);
    CHECK((node.mu.weights() - tree.root().mu.weights()).cwiseAbs().maxCoeff() <
          1e-15);
  }
}

TEST_CASE("frozen central bank gives closed-form values") {
  const Game game = flat_game(0.035, 0.0);
  const ConstantMajorPolicy major(0.03);
  const ConstantMinorPolicy minor(0.03);
  std::mt19937_64 rng(71);
  const ValueEstimate v =
      value_estimate(game, major, minor, RolloutMode::kFullTree, 0, rng);
  const double sum = geometric(0.9, 5);
  CHECK(v.paths == 1);
  CHECK(v.major == doctest::Approx(0.5 * 0.005 * sum).epsilon(1e-12));
  // 3% is not a grid rate: the projected atoms sit at 2.9% and 3.1% and pay
  // one adjustment to 3%.
  const double adjust = 0.1 * 0.001 + 0.001;
  CHECK(v.minor ==
        doctest::Approx(0.5 * 0.006 * sum - adjust).epsilon(1e-12));
}

TEST_CASE("full-tree values match a direct recursion") {
  const Game game = fixture::reduced_game(3, 5);
  for (double salt : {0.0, 1.0, 2.0}) {
    const auto major = oracle::random_major_policy(game, salt);
    const auto minor = oracle::random_minor_policy(game, salt + 0.5);
    std::mt19937_64 rng(72);
    const ValueEstimate v =
        value_estimate(game, major, minor, RolloutMode::kFullTree, 0, rng);
    CHECK(v.major == doctest::Approx(oracle::major_on_policy(game, major,
                                                             minor))
                         .epsilon(1e-12));
  }
}

TEST_CASE("two-step values by hand") {
  Game game = fixture::reduced_game(2, 3);
  game.initial.minor_resolution = 2;
  const ConstantMajorPolicy major(0.035);
  const ConstantMinorPolicy minor(0.025);
  std::mt19937_64 rng(73);
  const ValueEstimate v =
      value_estimate(game, major, minor, RolloutMode::kFullTree, 0, rng);
  const MarketParams& m = game.params;
  const ProjectedMeasure mu = game.initial_measure();
  std::vector<RateAtom> crowd;
  for (std::size_t k = 0; k < game.grid.size(); ++k) {
    if (mu[k] > 0.0) crowd.push_back({game.grid.node_p(k), 0.025, mu[k]});
  }
  const double p1 = 0.5 + oracle::major_drift(0.035, 0.5, crowd, m);
  // t = 0 at 3%, then each rate with its chain probability.
  double expected = oracle::major_reward(0.5, 0.03, 0.035, 0.03, m);
  const double next = 0.1 * oracle::major_reward(p1, 0.035, 0.035, 0.025, m) +
                      0.8 * oracle::major_reward(p1, 0.035, 0.035, 0.03, m) +
                      0.1 * oracle::major_reward(p1, 0.035, 0.035, 0.035, m);
  expected += 0.9 * next;
  CHECK(v.major == doctest::Approx(expected).epsilon(1e-13));
  CHECK(p1 > 0.5);
}

TEST_CASE("sampled values agree with the full tree") {
  const Game game = fixture::reduced_game(4, 5);
  const auto major = oracle::random_major_policy(game, 3.0);
  const auto minor = oracle::random_minor_policy(game, 4.0);
  std::mt19937_64 rng(74);
  const ValueEstimate exact =
      value_estimate(game, major, minor, RolloutMode::kFullTree, 0, rng);
  const ValueEstimate sampled =
      value_estimate(game, major, minor, RolloutMode::kSampled, 20000, rng);
  CHECK(sampled.paths == 20000);
  CHECK(sampled.major_stderr > 0.0);
  CHECK(std::abs(sampled.major - exact.major) < 4.0 * sampled.major_stderr);
  CHECK(std::abs(sampled.minor - exact.minor) < 4.0 * sampled.minor_stderr);
}

TEST_CASE("rollout trajectories") {
  const Game game = fixture::reduced_game(3, 5);
  const auto major = oracle::random_major_policy(game, 5.0);
  const auto minor = oracle::random_minor_policy(game, 6.0);
  std::mt19937_64 rng(75);
  const auto full =
      rollout(game, major, minor, RolloutMode::kFullTree, 0, rng);
  CHECK(full.size() == 9);
  double total = 0.0;
  for (const Trajectory& tr : full) {
    total += tr.probability;
    REQUIRE(tr.steps.size() == 3);
    for (const TrajectoryStep& s : tr.steps) {
      CHECK(std::abs(s.total_mass - 1.0) < kConservationTolerance);
      CHECK(s.mu.sum() == doctest::Approx(1.0));
      CHECK(game.actions.contains(s.major_action));
    }
    CHECK(tr.steps[0].cb_rate == 0.03);
  }
  CHECK(total == doctest::Approx(1.0));
  const auto sampled =
      rollout(game, major, minor, RolloutMode::kSampled, 7, rng);
  CHECK(sampled.size() == 7);
  CHECK(sampled[0].probability == doctest::Approx(1.0 / 7));
  CHECK_THROWS_AS(rollout(game, major, minor, RolloutMode::kSampled, 0, rng),
                  DomainError);
  CHECK(rollout_mode_from_string("sampled") == RolloutMode::kSampled);
  CHECK(to_string(RolloutMode::kFullTree) == "full-tree");
  CHECK_THROWS_AS(rollout_mode_from_string("tree"), DomainError);
}

TEST_CASE("minor best response matches exhaustive enumeration") {
  const Game game = fixture::reduced_game(3, 5, 4);
  for (double salt : {0.0, 7.0}) {
    const auto major = oracle::random_major_policy(game, salt);
    const auto minor = oracle::random_minor_policy(game, salt + 1.0);
    const FlowTree tree = FlowTree::build(game, major, minor);
    const double exact = minor_best_response_exact(tree, game);
    CHECK(std::abs(exact - oracle::minor_best_response(tree, game)) < 1e-10);
    CHECK(exact >= minor_on_policy_exact(tree, game, minor) - 1e-15);
  }
}

TEST_CASE("major best response matches breadth-first enumeration") {
  const Game game = fixture::reduced_game(3, 5, 4);
  const auto major = oracle::random_major_policy(game, 8.0);
  const auto minor = oracle::random_minor_policy(game, 9.0);
  double previous = -1e300;
  for (int horizon = 1; horizon <= 3; ++horizon) {
    const MajorBestResponse br =
        best_response_major(game, major, minor, horizon, 1e6);
    CHECK(std::abs(br.gap.best_response -
                   oracle::major_best_response(game, major, minor, horizon)) <
          1e-10);
    CHECK(br.gap.best_response >= previous - 1e-15);
    CHECK(br.gap.gap >= -1e-15);
    previous = br.gap.best_response;
  }
}

TEST_CASE("one-step deviation is the best first action") {
  const Game game = fixture::reduced_game(3, 5, 4);
  const auto major = oracle::random_major_policy(game, 10.0);
  const auto minor = oracle::random_minor_policy(game, 11.0);
  double best = -1e300;
  std::mt19937_64 rng(76);
  for (double u : game.actions.values()) {
    const FunctionMajorPolicy deviate(
        [&, u](int t, const BankState& x, double rc,
               const ProjectedMeasure& mu) {
          return t == 0 ? u : major.action(t, x, rc, mu);
        });
    best = std::max(best, value_estimate(game, deviate, minor,
                                         RolloutMode::kFullTree, 0, rng)
                              .major);
  }
  const MajorBestResponse br = best_response_major(game, major, minor, 1, 1e6);
  CHECK(br.gap.best_response == doctest::Approx(best).epsilon(1e-13));
  CHECK(br.leaves == doctest::Approx(5 * 9));
}

TEST_CASE("grid best response converges to the exact search") {
  const Game game = fixture::reduced_game(3, 5, 4);
  const auto major = oracle::random_major_policy(game, 12.0);
  const auto minor = oracle::random_minor_policy(game, 13.0);
  const FlowTree tree = FlowTree::build(game, major, minor);
  const double exact = minor_best_response_exact(tree, game);
  const double coarse = std::abs(minor_best_response_grid(tree, game, 16) -
                                 exact);
  const double fine = std::abs(minor_best_response_grid(tree, game, 481) -
                               exact);
  CHECK(fine <= coarse + 1e-15);
  CHECK(fine < 1e-4 * std::abs(exact));
  // On-policy interpolation needs a policy that is smooth in the own
  // proportion.
  const FunctionMinorPolicy by_time(
      [&game](int t, const BankState&, const BankState&, double rc,
              const ProjectedMeasure&) {
        return game.actions[static_cast<std::size_t>(t + (rc > 0.03 ? 2 : 0)) %
                            game.actions.size()];
      });
  const FlowTree smooth = FlowTree::build(game, major, by_time);
  const double on_policy = minor_on_policy_exact(smooth, game, by_time);
  CHECK(std::abs(minor_on_policy_grid(smooth, game, by_time, 481) -
                 on_policy) < 1e-4 * std::abs(on_policy));
}

TEST_CASE("exploitability report") {
  const Game game = fixture::reduced_game(3, 5, 4);
  const auto major = oracle::random_major_policy(game, 14.0);
  const auto minor = oracle::random_minor_policy(game, 15.0);
  EvaluationConfig config;
  config.br_p_points = 61;
  const ExploitabilityReport report =
      evaluate_exploitability(game, major, minor, config);
  CHECK(report.minor.method == "exact-tree");
  CHECK(report.minor.gap.gap >= -1e-15);
  CHECK(report.major.gap.gap >= -1e-15);
  CHECK(report.major.deviation_horizon == 2);
  CHECK(std::abs(report.minor.grid_best_response -
                 report.minor.gap.best_response) <=
        report.minor.interpolation_tolerance + 1e-15);
  config.minor_exact_budget = 0.0;
  const ExploitabilityReport grid =
      evaluate_exploitability(game, major, minor, config);
  CHECK(grid.minor.method == "grid-interpolation");
  CHECK(grid.minor.gap.best_response == report.minor.grid_best_response);
  CHECK(grid.minor.gap.relative_gap ==
        doctest::Approx(grid.minor.gap.gap /
                        std::abs(grid.minor.gap.on_policy)));
}

TEST_CASE("search limits") {
  const Game game = Game::default_profile();
  const ConstantMajorPolicy major(0.03);
  const ConstantMinorPolicy minor(0.03);
  CHECK_THROWS_AS(best_response_major(game, major, minor, 4, 1e5),
                  DomainError);
  CHECK_THROWS_AS(best_response_major(game, major, minor, 0, 1e5),
                  DomainError);
  CHECK_THROWS_AS(best_response_major(game, major, minor, 6, 1e99),
                  DomainError);
  EvaluationConfig config;
  config.br_p_points = 1;
  CHECK_THROWS_AS(config.validate(), DomainError);
  const FlowTree tree = FlowTree::build(game, major, minor);
  CHECK(minor_exact_expansions(tree, game) ==
        doctest::Approx(36.0 * (11 + 3 * 121 + 9 * 1331 + 27 * 14641.0 +
                                81 * 161051.0)));
}

TEST_CASE("a measure leaving the grid is an error") {
  Game game = Game::default_profile();
  game.grid = GridSpec::uniform(0.4, 0.6, 6, 0.025, 0.035, 6);
  const ConstantMajorPolicy major(0.035);
  const ConstantMinorPolicy minor(0.025);
  CHECK_THROWS_AS(FlowTree::build(game, major, minor), OutOfSupportError);
}

TEST_CASE("posted rates outside the box are rejected") {
  const Game game = Game::default_profile();
  const ConstantMajorPolicy major(0.05);
  const ConstantMinorPolicy minor(0.03);
  CHECK_THROWS_AS(FlowTree::build(game, major, minor), DomainError);
}

}  // TEST_SUITE
