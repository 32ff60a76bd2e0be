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


#ifndef BANKMFG_TESTS_FIXTURES_HPP
#define BANKMFG_TESTS_FIXTURES_HPP

#include <random>
#include <vector>

#include "bankmfg/game.hpp"

namespace fixture {

// Full profile with a shorter horizon and a coarser action grid.
inline bankmfg::Game reduced_game(int horizon, int actions,
                                  int resolution = 10) {
  bankmfg::Game game = bankmfg::Game::default_profile();
  game.params.horizon = horizon;
  game.actions = bankmfg::ActionGrid(game.params.rate_min,
                                     game.params.rate_max, actions);
  game.initial.minor_resolution = resolution;
  return game;
}

// Crowd atoms inside the state box. The proportions are rescaled so that the
// major share plus the minor aggregate equals one.
inline std::vector<bankmfg::RateAtom> random_crowd(std::mt19937_64& rng,
                                                   int atoms, double major_p,
                                                   bool grid_rates) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<bankmfg::RateAtom> crowd;
  double total_weight = 0.0;
  for (int k = 0; k < atoms; ++k) {
    const double r = grid_rates
                         ? 0.025 + 0.001 * std::floor(unit(rng) * 11.0)
                         : 0.025 + 0.01 * unit(rng);
    crowd.push_back({0.2 + 0.6 * unit(rng), std::min(r, 0.035),
                     unit(rng) + 0.05});
    total_weight += crowd.back().weight;
  }
  double mass = 0.0;
  for (auto& a : crowd) {
    a.weight /= total_weight;
    mass += a.weight * a.p;
  }
  const double scale = (1.0 - major_p) / mass;
  for (auto& a : crowd) a.p *= scale;
  return crowd;
}

}  // namespace fixture

#endif  // BANKMFG_TESTS_FIXTURES_HPP
