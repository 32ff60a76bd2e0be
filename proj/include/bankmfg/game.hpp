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

#ifndef BANKMFG_GAME_HPP
#define BANKMFG_GAME_HPP

#include <vector>

#include "bankmfg/market_model.hpp"
#include "bankmfg/measure_projection.hpp"

namespace bankmfg {

// Starting point of every rollout: the major bank's state, the central-bank
// rate and a uniform minor distribution over a box.
struct InitialCondition {
  BankState major{0.5, 0.03};
  double cb_rate = 0.03;
  double minor_p_lo = 0.40;
  double minor_p_hi = 0.60;
  double minor_r_lo = 0.025;
  double minor_r_hi = 0.035;
  int minor_resolution = 50;  // midpoints per axis before projection
};

// Everything that defines one instance of the game.
struct Game {
  MarketParams params;
  GridSpec grid;
  CentralBankChain chain;
  ActionGrid actions;
  InitialCondition initial;

  // 16 x 6 grid, three central-bank rates with lambda = 0.2, 11 actions.
  static Game default_profile();

  ProjectedMeasure initial_measure() const;
  void validate() const;
};

}  // namespace bankmfg

#endif  // BANKMFG_GAME_HPP
