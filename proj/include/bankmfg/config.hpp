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

#ifndef BANKMFG_CONFIG_HPP
#define BANKMFG_CONFIG_HPP

// Run configuration loaded from a YAML document. Every key is required and
// unknown keys are rejected; errors read "<file>:<line>:<column>: <key>:
// <message>".

#include <cstdint>
#include <string>

#include "bankmfg/evaluation.hpp"
#include "bankmfg/game.hpp"
#include "bankmfg/trainer.hpp"

namespace bankmfg {

struct RunConfig {
  Game game = Game::default_profile();
  TrainConfig train;
  EvaluationConfig evaluation;
  std::uint64_t seed = 0;
  std::string output_dir = "runs/default";
  int checkpoint_every = 1;  // outer iterations between checkpoints

  // Validates every module's invariants.
  void validate() const;
};

// Throws ConfigError.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text,
                           const std::string& source_name);

}  // namespace bankmfg

#endif  // BANKMFG_CONFIG_HPP
