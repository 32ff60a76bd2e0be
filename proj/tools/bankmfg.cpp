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

// bankmfg: train, roll out and evaluate the bank deposit-rate game.
//
//   bankmfg train --config configs/default.yaml [--seed N] [--out DIR]
//   bankmfg rollout --config C --checkpoint F [--mode full-tree|sampled]
//   bankmfg evaluate --config C --checkpoint F
//   bankmfg project-demo --config C MEASURE.csv
//
// Exit status: 0 on success, 2 for configuration and usage errors, 1 for
// any other failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "bankmfg/commands.hpp"
#include "bankmfg/config.hpp"
#include "bankmfg/errors.hpp"

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& options) {
  cmd->add_option("--config", options.config, "YAML run configuration")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", options.seed, "override the root seed");
  cmd->add_option("--out", options.out,
                  "output directory (default: output_dir from the config)");
}

bankmfg::RunConfig load(const CommonOptions& options) {
  bankmfg::RunConfig config = bankmfg::load_run_config(options.config);
  if (options.seed) {
    config.seed = *options.seed;
    config.train.seed = *options.seed;
  }
  if (!options.out.empty()) config.output_dir = options.out;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Major-minor mean-field game of bank deposit rates"};
  app.require_subcommand(1);

  CommonOptions train_opts;
  CLI::App* train = app.add_subcommand("train", "fit both Q-networks");
  add_common(train, train_opts);
  bool quiet = false;
  train->add_flag("--quiet", quiet, "no per-iteration progress");

  CommonOptions rollout_opts;
  std::string rollout_checkpoint;
  std::string mode = "full-tree";
  CLI::App* roll =
      app.add_subcommand("rollout", "simulate the policies of a checkpoint");
  add_common(roll, rollout_opts);
  roll->add_option("--checkpoint", rollout_checkpoint, "checkpoint JSON")
      ->required()
      ->check(CLI::ExistingFile);
  roll->add_option("--mode", mode, "full-tree or sampled")
      ->check(CLI::IsMember({"full-tree", "sampled"}));

  CommonOptions eval_opts;
  std::string eval_checkpoint;
  CLI::App* eval = app.add_subcommand(
      "evaluate", "best-response gaps of the policies of a checkpoint");
  add_common(eval, eval_opts);
  eval->add_option("--checkpoint", eval_checkpoint, "checkpoint JSON")
      ->required()
      ->check(CLI::ExistingFile);

  CommonOptions demo_opts;
  std::string measure;
  CLI::App* demo = app.add_subcommand(
      "project-demo", "project a p,r,weight CSV measure onto the grid");
  add_common(demo, demo_opts);
  demo->add_option("measure", measure, "CSV with columns p,r,weight")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) {
      const bankmfg::RunConfig config = load(train_opts);
      bankmfg::cmd_train(config, config.output_dir,
                         quiet ? nullptr : &std::cerr);
    } else if (roll->parsed()) {
      const bankmfg::RunConfig config = load(rollout_opts);
      bankmfg::cmd_rollout(config, rollout_checkpoint,
                           bankmfg::rollout_mode_from_string(mode),
                           config.output_dir);
    } else if (eval->parsed()) {
      const bankmfg::RunConfig config = load(eval_opts);
      bankmfg::cmd_evaluate(config, eval_checkpoint, config.output_dir);
    } else if (demo->parsed()) {
      const bankmfg::RunConfig config = load(demo_opts);
      bankmfg::cmd_project_demo(config, measure, config.output_dir);
    }
  } catch (const bankmfg::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
