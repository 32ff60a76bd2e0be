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

#ifndef BANKMFG_COMMANDS_HPP
#define BANKMFG_COMMANDS_HPP

// The command-line subcommands as library calls. Each one locks the output
// directory, writes manifest.json with status "running", produces its
// outputs and finalizes the manifest with their content hashes.
//
//   train         loss.csv, checkpoints/checkpoint_NNNN.json
//   rollout       trajectories.csv, values.json
//   evaluate      exploitability.json
//   project-demo  projected.csv

#include <filesystem>
#include <iosfwd>
#include <string>

#include "bankmfg/config.hpp"
#include "bankmfg/evaluation.hpp"

namespace bankmfg {

std::string checkpoint_file_name(int outer_iteration);

void cmd_train(const RunConfig& config, const std::filesystem::path& out,
               std::ostream* progress = nullptr);

void cmd_rollout(const RunConfig& config,
                 const std::filesystem::path& checkpoint, RolloutMode mode,
                 const std::filesystem::path& out);

void cmd_evaluate(const RunConfig& config,
                  const std::filesystem::path& checkpoint,
                  const std::filesystem::path& out);

void cmd_project_demo(const RunConfig& config,
                      const std::filesystem::path& measure,
                      const std::filesystem::path& out);

}  // namespace bankmfg

#endif  // BANKMFG_COMMANDS_HPP
