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

#include "bankmfg/game.hpp"

#include "bankmfg/errors.hpp"

namespace bankmfg {

Game Game::default_profile() {
  MarketParams params;
  return Game{params,
              GridSpec::uniform(0.20, 0.80, 16, 0.025, 0.035, 6),
              CentralBankChain({0.025, 0.030, 0.035}, 0.2, params.dt),
              ActionGrid(params.rate_min, params.rate_max, 11),
              InitialCondition{}};
}

ProjectedMeasure Game::initial_measure() const {
  return project_uniform_box(initial.minor_p_lo, initial.minor_p_hi,
                             initial.minor_r_lo, initial.minor_r_hi,
                             initial.minor_resolution, grid);
}

void Game::validate() const {
  params.validate();
  grid.validate();
  if (grid.p_lo() < params.prop_min - 1e-12 ||
      grid.p_hi() > params.prop_max + 1e-12) {
    throw DomainError("grid proportions must lie inside the state box");
  }
  if (grid.r_lo() < params.rate_min - 1e-12 ||
      grid.r_hi() > params.rate_max + 1e-12) {
    throw DomainError("grid rates must lie inside the rate bounds");
  }
  for (double u : actions.values()) {
    if (u < params.rate_min - 1e-12 || u > params.rate_max + 1e-12) {
      throw DomainError("action grid must lie inside the rate bounds");
    }
  }
  for (double rc : chain.rates()) {
    if (rc < 0.0 || rc > 1.0) throw DomainError("central-bank rate outside [0, 1]");
  }
  chain.index_of(initial.cb_rate);
  if (initial.major.p < 0.0 || initial.major.p > 1.0) {
    throw DomainError("initial major proportion outside [0, 1]");
  }
  if (initial.major.r < params.rate_min - 1e-12 ||
      initial.major.r > params.rate_max + 1e-12) {
    throw DomainError("initial major rate outside the rate bounds");
  }
  if (!(initial.minor_p_lo <= initial.minor_p_hi) ||
      !(initial.minor_r_lo <= initial.minor_r_hi) ||
      initial.minor_p_lo < grid.p_lo() || initial.minor_p_hi > grid.p_hi() ||
      initial.minor_r_lo < grid.r_lo() || initial.minor_r_hi > grid.r_hi()) {
    throw DomainError("initial minor box must lie inside the grid");
  }
  if (initial.minor_resolution < 1) {
    throw DomainError("initial minor resolution must be >= 1");
  }
}

}  // namespace bankmfg
