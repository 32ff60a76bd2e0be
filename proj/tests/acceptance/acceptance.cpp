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


// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.
//
//   acceptance [WORK_DIR]
//
// Training runs are written under WORK_DIR (default: ./acceptance_runs),
// which is wiped first.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bankmfg/artifacts.hpp"
#include "bankmfg/commands.hpp"
#include "bankmfg/config.hpp"
#include "bankmfg/evaluation.hpp"
#include "bankmfg/features.hpp"
#include "bankmfg/policies.hpp"
#include "bankmfg/trainer.hpp"
#include "io.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace bankmfg;

namespace {

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail
            << std::endl;
}

// Runs one criterion; an exception is a failure with its message.
void criterion(const std::string& name,
               const std::function<std::pair<bool, std::string>()>& body) {
  try {
    const auto [pass, detail] = body();
    report(name, pass, detail);
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return buf;
}

// ---------------------------------------------------------------- projection

std::pair<bool, std::string> projection_exactness() {
  const GridSpec grid = Game::default_profile().grid;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double mass = 0.0;
  double moment_p = 0.0;
  double moment_r = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 200);
    std::vector<RateAtom> atoms;
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
      atoms.push_back({grid.p_lo() + (grid.p_hi() - grid.p_lo()) * unit(rng),
                       grid.r_lo() + (grid.r_hi() - grid.r_lo()) * unit(rng),
                       unit(rng)});
      total += atoms.back().weight;
    }
    double mp = 0.0;
    double mr = 0.0;
    for (auto& a : atoms) {
      a.weight /= total;
      mp += a.weight * a.p;
      mr += a.weight * a.r;
    }
    const ProjectedMeasure mu = project(EmpiricalMeasure{atoms}, grid);
    mass = std::max(mass, std::abs(mu.weights().sum() - 1.0));
    moment_p = std::max(moment_p, std::abs(aggregate_minor_mass(mu, grid) - mp));
    moment_r = std::max(moment_r, std::abs(mean_rate(mu, grid) - mr));
  }
  double identity = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(grid.size()));
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      w[k] = unit(rng) < 0.2 ? unit(rng) : 0.0;
    }
    w[static_cast<Eigen::Index>(rng() % grid.size())] += 0.1;
    w /= w.sum();
    std::vector<RateAtom> atoms;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (w[static_cast<Eigen::Index>(k)] > 0.0) {
        atoms.push_back({grid.node_p(k), grid.node_r(k),
                         w[static_cast<Eigen::Index>(k)]});
      }
    }
    identity = std::max(
        identity, (project_atoms(atoms, grid) - w).cwiseAbs().maxCoeff());
  }
  const double worst = std::max({mass, moment_p, moment_r, identity});
  return {worst < 1e-12,
          "1000 random measures: mass err " + fmt(mass) + ", p-moment err " +
              fmt(moment_p) + ", r-moment err " + fmt(moment_r) +
              "; 1000 grid-supported measures: identity err " +
              fmt(identity) + " (tol 1e-12)"};
}

// ----------------------------------------------------------------- averaging

std::pair<bool, std::string> averaging_fidelity() {
  std::mt19937_64 rng(102);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index d = 20;
  const auto a = NeuronMeasure::random(256, d, Activation::kRelu, rng);
  const auto b = NeuronMeasure::random(256, d, Activation::kRelu, rng);
  std::vector<Eigen::VectorXd> inputs;
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd z(d);
    for (Eigen::Index i = 0; i < d; ++i) z[i] = normal(rng);
    inputs.push_back(z);
  }

  double exact_err = 0.0;
  double ratio_sum = 0.0;
  int ratio_count = 0;
  const Eigen::Index width = 4096;
  for (double w : {0.5, 0.9, 0.99}) {
    const NeuronMeasure concat =
        fp_average(a, b, w, AveragingMode::kExactConcat);
    const NeuronMeasure resampled =
        fp_average(a, b, w, AveragingMode::kResample, &rng, width);
    for (const Eigen::VectorXd& z : inputs) {
      const double expected = w * a.forward(z) + (1 - w) * b.forward(z);
      const double exact = concat.forward(z);
      exact_err = std::max(exact_err, std::abs(exact - expected));
      // Per-neuron contributions beta * phi(.) under the mixture measure.
      auto moments = [&z](const NeuronMeasure& net) {
        const Eigen::ArrayXd c =
            net.out_weights().array() *
            (net.in_weights() * z + net.bias()).array().cwiseMax(0.0);
        return std::pair{c.mean(), c.square().mean()};
      };
      const auto [ma, sa] = moments(a);
      const auto [mb, sb] = moments(b);
      const double mean = w * ma + (1 - w) * mb;
      const double var = w * sa + (1 - w) * sb - mean * mean;
      const double scale = std::sqrt(std::max(var, 0.0) /
                                     static_cast<double>(width));
      ratio_sum += std::abs(resampled.forward(z) - exact) / scale;
      ++ratio_count;
    }
  }
  const double mean_ratio = ratio_sum / ratio_count;
  return {exact_err < 1e-12 && mean_ratio < 3.0,
          "exact-concat max err " + fmt(exact_err) +
              " (tol 1e-12) on 100 inputs x 3 weights; resample L=4096 mean "
              "|dev| = " +
              fmt(mean_ratio) + " pooled std/sqrt(L) (tol 3)"};
}

// ------------------------------------------------------------------ gradient

std::pair<bool, std::string> gradient_correctness() {
  std::mt19937_64 rng(103);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  int draws = 0;
  for (Activation act : {Activation::kRelu, Activation::kTanh}) {
    for (int draw = 0; draw < 50; ++draw, ++draws) {
      const Eigen::Index width = 4 + static_cast<Eigen::Index>(rng() % 60);
      const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng() % 30);
      const Eigen::Index batch = 1 + static_cast<Eigen::Index>(rng() % 16);
      NeuronMeasure net = NeuronMeasure::random(width, d, act, rng);
      Eigen::MatrixXd inputs(d, batch);
      Eigen::VectorXd targets(batch);
      for (Eigen::Index j = 0; j < batch; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) inputs(i, j) = normal(rng);
        targets[j] = normal(rng);
      }
      const auto analytic = squared_loss_gradient(net, inputs, targets);
      auto loss = [&]() {
        return (net.forward_batch(inputs) - targets).squaredNorm() /
               static_cast<double>(batch);
      };
      const double h = 1e-6;
      auto central = [&](double& x) {
        const double saved = x;
        x = saved + h;
        const double up = loss();
        x = saved - h;
        const double down = loss();
        x = saved;
        return (up - down) / (2 * h);
      };
      double diff = 0.0;
      double norm_a = 0.0;
      double norm_f = 0.0;
      auto accumulate = [&](double g, double f) {
        diff += (g - f) * (g - f);
        norm_a += g * g;
        norm_f += f * f;
      };
      for (Eigen::Index l = 0; l < width; ++l) {
        accumulate(analytic.gradient.out_weights[l],
                   central(net.out_weights()[l]));
        accumulate(analytic.gradient.bias[l], central(net.bias()[l]));
        for (Eigen::Index k = 0; k < d; ++k) {
          accumulate(analytic.gradient.in_weights(l, k),
                     central(net.in_weights()(l, k)));
        }
      }
      worst = std::max(worst, std::sqrt(diff) /
                                  std::max(std::sqrt(norm_a), std::sqrt(norm_f)));
    }
  }
  return {worst < 1e-5, std::to_string(draws) +
                            " draws (relu, tanh): max relative error " +
                            fmt(worst) + " (tol 1e-5)"};
}

// --------------------------------------------------------- mass conservation

std::pair<bool, std::string> mass_conservation() {
  const Game game = Game::default_profile();
  std::mt19937_64 rng(104);
  double worst = 0.0;
  int steps = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto major = oracle::random_major_policy(game, 0.37 * k);
    const auto minor = oracle::random_minor_policy(game, 1.91 * k + 0.5);
    const auto paths = rollout(game, major, minor, RolloutMode::kSampled, 1,
                               rng);
    for (const TrajectoryStep& s : paths.front().steps) {
      worst = std::max(worst, std::abs(s.major.p + s.minor_mass - 1.0));
      ++steps;
    }
  }
  return {worst < 1e-9, "1000 random-policy rollouts, " +
                            std::to_string(steps) +
                            " steps: max |p0 + minor mass - 1| = " +
                            fmt(worst) + " (tol 1e-9)"};
}

// ----------------------------------------------------------- oracle matching

Game reduced_instance() {
  Game game = Game::default_profile();
  game.params.horizon = 3;
  game.actions = ActionGrid(game.params.rate_min, game.params.rate_max, 5);
  game.grid = GridSpec::uniform(0.2, 0.8, 7, 0.025, 0.035, 6);
  game.initial.minor_resolution = 10;
  return game;
}

struct OracleMatch {
  double minor = 0.0;
  double major = 0.0;
  int profiles = 0;
};

void match_profile(const Game& game, const MajorPolicy& major,
                   const MinorPolicy& minor, OracleMatch& out) {
  const FlowTree tree = FlowTree::build(game, major, minor);
  out.minor = std::max(out.minor,
                       std::abs(minor_best_response_exact(tree, game) -
                                oracle::minor_best_response(tree, game)));
  for (int horizon = 1; horizon <= game.params.horizon; ++horizon) {
    const MajorBestResponse br =
        best_response_major(game, major, minor, horizon, 1e9);
    out.major = std::max(
        out.major,
        std::abs(br.gap.best_response -
                 oracle::major_best_response(game, major, minor, horizon)));
    out.major = std::max(out.major,
                         std::abs(br.gap.on_policy -
                                  oracle::major_on_policy(game, major, minor)));
  }
  ++out.profiles;
}

OracleMatch reduced_oracle_match() {
  const Game game = reduced_instance();
  OracleMatch out;
  for (int salt = 0; salt < 5; ++salt) {
    match_profile(game, oracle::random_major_policy(game, 3.0 * salt),
                  oracle::random_minor_policy(game, 3.0 * salt + 1.0), out);
  }
  TrainConfig config;
  config.outer_iterations = 5;
  config.inner_iterations = 60;
  config.batch_size = 32;
  config.width = 32;
  config.record_wall_clock = false;
  const TrainResult trained = outer_loop(game, config);
  match_profile(game, GreedyMajorPolicy(trained.averaged.major, game),
                GreedyMinorPolicy(trained.averaged.minor, game), out);
  return out;
}

// ------------------------------------------------------------ training runs

struct Run {
  std::uint64_t seed = 0;
  fs::path dir;
  std::vector<double> loss_major;
  std::vector<double> loss_minor;
  double seconds = 0.0;
};

Run train_run(const RunConfig& base, std::uint64_t seed, int outer,
              const fs::path& dir) {
  RunConfig config = base;
  config.seed = seed;
  config.train.seed = seed;
  config.train.outer_iterations = outer;
  config.output_dir = dir.string();
  const auto start = std::chrono::steady_clock::now();
  cmd_train(config, dir);
  Run run;
  run.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  run.seed = seed;
  run.dir = dir;
  const testio::Csv csv = testio::read_csv((dir / "loss.csv").string());
  const std::size_t major = csv.column("loss_major");
  const std::size_t minor = csv.column("loss_minor");
  for (const auto& row : csv.rows) {
    run.loss_major.push_back(std::stod(row[major]));
    run.loss_minor.push_back(std::stod(row[minor]));
  }
  std::cout << "  trained seed " << seed << " (" << outer << " outer) in "
            << fmt(run.seconds) << " s" << std::endl;
  return run;
}

// Mean over the window of `width` steps ending at `last`.
double rolling_at(const std::vector<double>& xs, std::size_t last,
                  std::size_t width) {
  double s = 0.0;
  for (std::size_t k = last + 1 - width; k <= last; ++k) s += xs[k];
  return s / static_cast<double>(width);
}

std::size_t first_below(const std::vector<double>& xs, std::size_t width,
                        double level) {
  double s = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    s += xs[k];
    if (k >= width) s -= xs[k - width];
    if (k + 1 >= width && s / static_cast<double>(width) < level) return k + 1;
  }
  return 0;
}

NetworkPair load_networks(const Run& run, int n, const Game& game) {
  return read_checkpoint(run.dir / "checkpoints" / checkpoint_file_name(n),
                         game.grid)
      .networks;
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_runs");
  fs::remove_all(work);
  fs::create_directories(work);
  const RunConfig profile =
      load_run_config(std::string(BANKMFG_SOURCE_DIR) + "/configs/default.yaml");

  criterion("projection exactness", projection_exactness);
  criterion("averaging fidelity", averaging_fidelity);
  criterion("gradient correctness", gradient_correctness);
  criterion("mass conservation", mass_conservation);

  OracleMatch match;
  std::string match_error;
  try {
    match = reduced_oracle_match();
  } catch (const std::exception& e) {
    match_error = e.what();
  }

  // Full shipped profile, seed 0.
  std::vector<Run> runs;
  criterion("Bellman-loss reproduction", [&]() {
    runs.push_back(train_run(profile, 0, profile.train.outer_iterations,
                             work / "seed0"));
    const Run& run = runs.front();
    const std::size_t step = 20000;
    if (run.loss_major.size() < step) {
      return std::pair{false, std::string("run shorter than 20000 steps")};
    }
    const double major = rolling_at(run.loss_major, step - 1, 200);
    const double minor = rolling_at(run.loss_minor, step - 1, 200);
    const std::size_t cross_major = first_below(run.loss_major, 200, 1e-6);
    const std::size_t cross_minor = first_below(run.loss_minor, 200, 1e-6);
    const bool pass = major < 1e-6 && minor < 1e-6 && run.seconds <= 1800.0;
    return std::pair{
        pass, "200-step rolling loss at step 20000: major " + fmt(major) +
                  ", minor " + fmt(minor) + " (tol 1e-6); first below 1e-6 at "
                  "steps " + std::to_string(cross_major) + " / " +
                  std::to_string(cross_minor) + "; final rolling " +
                  fmt(rolling_at(run.loss_major, run.loss_major.size() - 1,
                                 200)) +
                  " / " +
                  fmt(rolling_at(run.loss_minor, run.loss_minor.size() - 1,
                                 200)) +
                  "; wall time " + fmt(run.seconds / 60.0) +
                  " min (limit 30)"};
  });

  criterion("equilibrium behavior", [&]() {
    if (runs.empty()) return std::pair{false, std::string("no trained run")};
    const Game& game = profile.game;
    const NetworkPair nets =
        load_networks(runs.front(), profile.train.outer_iterations, game);
    const GreedyMajorPolicy major(nets.major, game);
    const GreedyMinorPolicy minor(nets.minor, game);
    const FlowTree tree = FlowTree::build(game, major, minor);
    int off_floor = 0;
    int first_floor = 99;
    double max_major_change = 0.0;
    double max_minor_change = 0.0;
    for (const FlowNode& node : tree.nodes()) {
      const bool at_floor =
          std::abs(node.major_action - game.params.rate_min) <= kRateTolerance;
      if (node.t >= 1 && !at_floor) ++off_floor;
      if (at_floor) first_floor = std::min(first_floor, node.t);
      for (int child : node.children) {
        max_major_change = std::max(
            max_major_change,
            std::abs(tree.nodes()[static_cast<std::size_t>(child)].major.p -
                     node.major.p));
      }
      if (node.children.empty()) continue;
      for (const RateAtom& atom : node.crowd) {
        const double change =
            drift_minor(node.major_action, node.major.p, atom.r, atom.p,
                        node.crowd, game.params) *
            game.params.dt;
        max_minor_change = std::max(max_minor_change, std::abs(change));
      }
    }
    const bool pass = off_floor == 0 && first_floor <= 1 &&
                      max_major_change <= 0.02 && max_minor_change <= 0.02;
    return std::pair{
        pass, "major rate at 2.5% from step " + std::to_string(first_floor) +
                  ", " + std::to_string(off_floor) +
                  " later nodes off the floor over " +
                  std::to_string(tree.paths().size()) +
                  " paths; max per-step proportion change major " +
                  fmt(max_major_change) + ", minor atoms " +
                  fmt(max_minor_change) + " (limit 0.02)"};
  });

  // Seeds 1-9 share the first 50 outer iterations with a full run, which
  // covers inner steps up to 20000.
  criterion("repeatability", [&]() {
    for (std::uint64_t seed = 1; seed <= 9; ++seed) {
      runs.push_back(train_run(profile, seed, 50,
                               work / ("seed" + std::to_string(seed))));
    }
    std::vector<double> means_major;
    std::vector<double> means_minor;
    for (const Run& run : runs) {
      auto window = [](const std::vector<double>& xs) {
        return std::accumulate(xs.begin() + 10000, xs.begin() + 20000, 0.0) /
               10000.0;
      };
      means_major.push_back(window(run.loss_major));
      means_minor.push_back(window(run.loss_minor));
    }
    auto stderr_of = [](const std::vector<double>& xs) {
      const double n = static_cast<double>(xs.size());
      const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
      double ss = 0.0;
      for (double x : xs) ss += (x - mean) * (x - mean);
      return std::pair{mean, std::sqrt(ss / (n - 1.0) / n)};
    };
    const auto [mean_major, se_major] = stderr_of(means_major);
    const auto [mean_minor, se_minor] = stderr_of(means_minor);
    return std::pair{
        se_major < 5e-6 && se_minor < 5e-6,
        std::to_string(runs.size()) +
            " seeds, mean loss over steps 10000-20000: major " +
            fmt(mean_major) + " +- " + fmt(se_major) + ", minor " +
            fmt(mean_minor) + " +- " + fmt(se_minor) + " (SE tol 5e-6)"};
  });

  criterion("oracle equivalence", [&]() {
    if (!match_error.empty()) {
      return std::pair{false, "reduced instance: " + match_error};
    }
    if (runs.size() < 10) {
      return std::pair{false, std::string("training runs missing")};
    }
    const Game& game = profile.game;
    const std::vector<int> checkpoints{1, 2, 5, 10, 20, 50};
    std::vector<double> medians;
    for (int n : checkpoints) {
      std::vector<double> gaps;
      for (const Run& run : runs) {
        const NetworkPair nets = load_networks(run, n, game);
        gaps.push_back(best_response_minor(game,
                                           GreedyMajorPolicy(nets.major, game),
                                           GreedyMinorPolicy(nets.minor, game),
                                           profile.evaluation)
                           .gap.relative_gap);
      }
      medians.push_back(median(gaps));
    }
    // Least-squares slope of the median against log(n).
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < medians.size(); ++k) {
      mx += std::log(checkpoints[k]);
      my += medians[k];
    }
    mx /= static_cast<double>(medians.size());
    my /= static_cast<double>(medians.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t k = 0; k < medians.size(); ++k) {
      const double dx = std::log(checkpoints[k]) - mx;
      sxy += dx * (medians[k] - my);
      sxx += dx * dx;
    }
    const double slope = sxy / sxx;

    const NetworkPair final_nets =
        load_networks(runs.front(), profile.train.outer_iterations, game);
    const MinorBestResponse final_gap = best_response_minor(
        game, GreedyMajorPolicy(final_nets.major, game),
        GreedyMinorPolicy(final_nets.minor, game), profile.evaluation);

    std::ostringstream medians_text;
    for (std::size_t k = 0; k < medians.size(); ++k) {
      medians_text << (k ? " " : "") << checkpoints[k] << ":"
                   << fmt(medians[k]);
    }
    const bool pass = match.minor < 1e-10 && match.major < 1e-10 &&
                      final_gap.gap.relative_gap < 0.05 && slope <= 0.0 &&
                      medians.back() <= medians.front();
    return std::pair{
        pass,
        "reduced instance, " + std::to_string(match.profiles) +
            " profiles: max |search - enumeration| minor " + fmt(match.minor) +
            ", major " + fmt(match.major) + " (tol 1e-10); trained minor gap " +
            fmt(100.0 * final_gap.gap.relative_gap) + "% of on-policy " +
            fmt(final_gap.gap.on_policy) + " (" + final_gap.method +
            ", limit 5%); median relative gap by outer iteration " +
            medians_text.str() + ", slope vs log n " + fmt(slope)};
  });

  std::cout << (failures == 0 ? "all acceptance criteria passed"
                              : std::to_string(failures) +
                                    " acceptance criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
