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

#include "bankmfg/commands.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "bankmfg/artifacts.hpp"
#include "bankmfg/errors.hpp"

namespace bankmfg {

namespace fs = std::filesystem;
using nlohmann::json;

std::string checkpoint_file_name(int outer_iteration) {
  char name[40];
  std::snprintf(name, sizeof(name), "checkpoint_%04d.json", outer_iteration);
  return name;
}

namespace {

// Runs `body` with the directory locked and the manifest kept in sync.
template <typename Body>
void run_command(const fs::path& out, const std::string& command,
                 const RunConfig& config, json arguments, Body&& body) {
  config.validate();
  DirectoryLock lock(out);
  RunManifest manifest(out, command, config, std::move(arguments));
  try {
    body(manifest);
    manifest.finish();
  } catch (const std::exception& e) {
    manifest.fail(e.what());
    throw;
  }
}

}  // namespace

void cmd_train(const RunConfig& config, const fs::path& out,
               std::ostream* progress) {
  run_command(out, "train", config, json::object(), [&](RunManifest& manifest) {
    fs::create_directories(out / "checkpoints");
    const fs::path loss_path = out / "loss.csv";
    std::ofstream loss(loss_path, std::ios::binary | std::ios::trunc);
    if (!loss) throw Error(loss_path.string() + ": cannot open for writing");
    write_loss_header(loss);
    manifest.add_output("loss.csv");

    const int total = config.train.outer_iterations;
    outer_loop(config.game, config.train,
               [&](const TrainerState& state,
                   std::span<const TrainRecord> records) {
                 write_loss_rows(loss, records);
                 loss.flush();
                 const int n = state.completed;
                 if (n % config.checkpoint_every == 0 || n == total) {
                   const fs::path rel =
                       fs::path("checkpoints") / checkpoint_file_name(n);
                   write_checkpoint(out / rel,
                                    Checkpoint{n, config.seed, state.averaged},
                                    config.game.grid);
                   manifest.add_output(rel);
                 }
                 if (progress != nullptr && !records.empty()) {
                   *progress << "outer " << n << "/" << total
                             << "  loss_major " << records.back().loss_major
                             << "  loss_minor " << records.back().loss_minor
                             << std::endl;
                 }
               });
    loss.close();
    if (!loss) throw Error(loss_path.string() + ": write failed");
  });
}

void cmd_rollout(const RunConfig& config, const fs::path& checkpoint,
                 RolloutMode mode, const fs::path& out) {
  json arguments{{"checkpoint", checkpoint.string()},
                 {"mode", to_string(mode)}};
  run_command(out, "rollout", config, std::move(arguments),
              [&](RunManifest& manifest) {
    const Checkpoint cp = read_checkpoint(checkpoint, config.game.grid);
    const GreedyMajorPolicy major(cp.networks.major, config.game);
    const GreedyMinorPolicy minor(cp.networks.minor, config.game);
    std::mt19937_64 rng = make_rng(config.seed, RngStream::kRollout);
    const std::vector<Trajectory> trajectories =
        rollout(config.game, major, minor, mode,
                config.evaluation.sampled_paths, rng);
    std::ostringstream csv;
    write_trajectory_csv(csv, trajectories, config.game.grid);
    write_text_file(out / "trajectories.csv", csv.str());
    manifest.add_output("trajectories.csv");

    std::mt19937_64 value_rng = make_rng(config.seed, RngStream::kEvaluation);
    const ValueEstimate values =
        value_estimate(config.game, major, minor, mode,
                       config.evaluation.sampled_paths, value_rng);
    write_text_file(out / "values.json",
                    value_estimate_to_json(values, mode).dump(2) + "\n");
    manifest.add_output("values.json");
  });
}

void cmd_evaluate(const RunConfig& config, const fs::path& checkpoint,
                  const fs::path& out) {
  json arguments{{"checkpoint", checkpoint.string()}};
  run_command(out, "evaluate", config, std::move(arguments),
              [&](RunManifest& manifest) {
    const Checkpoint cp = read_checkpoint(checkpoint, config.game.grid);
    const GreedyMajorPolicy major(cp.networks.major, config.game);
    const GreedyMinorPolicy minor(cp.networks.minor, config.game);
    const ExploitabilityReport report =
        evaluate_exploitability(config.game, major, minor, config.evaluation);
    write_text_file(
        out / "exploitability.json",
        exploitability_to_json(report, cp.outer_iteration).dump(2) + "\n");
    manifest.add_output("exploitability.json");
  });
}

void cmd_project_demo(const RunConfig& config, const fs::path& measure,
                      const fs::path& out) {
  json arguments{{"measure", measure.string()}};
  run_command(out, "project-demo", config, std::move(arguments),
              [&](RunManifest& manifest) {
    std::ifstream in(measure);
    if (!in) throw Error(measure.string() + ": cannot open measure file");
    EmpiricalMeasure atoms;
    try {
      atoms = read_measure_csv(in);
    } catch (const DomainError& e) {
      throw DomainError(measure.string() + ": " + e.what());
    }
    const ProjectedMeasure mu = project(atoms, config.game.grid);
    std::ostringstream csv;
    write_projected_csv(csv, mu, config.game.grid);
    write_text_file(out / "projected.csv", csv.str());
    manifest.add_output("projected.csv");
  });
}

}  // namespace bankmfg
