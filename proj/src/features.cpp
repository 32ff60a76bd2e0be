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

#include "bankmfg/features.hpp"

namespace bankmfg {

Eigen::VectorXd encode_major(const FeatureScaling& scaling, int t,
                             const BankState& major, double action,
                             double cb_rate, const ProjectedMeasure& mu) {
  using L = MajorLayout;
  Eigen::VectorXd z(L::input_dim(mu.size()));
  z[L::kTime] = scaling.time(t);
  z[L::kMajorP] = scaling.proportion(major.p);
  z[L::kMajorR] = scaling.rate(major.r);
  z[L::kAction] = scaling.rate(action);
  z[L::kCbRate] = scaling.rate(cb_rate);
  z.tail(mu.weights().size()) = mu.weights();
  return z;
}

Eigen::VectorXd encode_minor(const FeatureScaling& scaling, int t,
                             const BankState& major, const BankState& own,
                             double action, double cb_rate,
                             const ProjectedMeasure& mu) {
  using L = MinorLayout;
  Eigen::VectorXd z(L::input_dim(mu.size()));
  z[L::kTime] = scaling.time(t);
  z[L::kMajorP] = scaling.proportion(major.p);
  z[L::kMajorR] = scaling.rate(major.r);
  z[L::kOwnP] = scaling.proportion(own.p);
  z[L::kOwnR] = scaling.rate(own.r);
  z[L::kAction] = scaling.rate(action);
  z[L::kCbRate] = scaling.rate(cb_rate);
  z.tail(mu.weights().size()) = mu.weights();
  return z;
}

namespace {
void append_measure_names(const GridSpec& grid,
                          std::vector<std::string>& names) {
  for (std::size_t i = 0; i < grid.p_points.size(); ++i) {
    for (std::size_t j = 0; j < grid.r_points.size(); ++j) {
      names.push_back("mu[" + std::to_string(i) + "," + std::to_string(j) +
                      "]");
    }
  }
}
}  // namespace

std::vector<std::string> major_feature_names(const GridSpec& grid) {
  std::vector<std::string> names{"t", "p0", "r0", "u0", "rc"};
  append_measure_names(grid, names);
  return names;
}

std::vector<std::string> minor_feature_names(const GridSpec& grid) {
  std::vector<std::string> names{"t", "p0", "r0", "p", "r", "u", "rc"};
  append_measure_names(grid, names);
  return names;
}

}  // namespace bankmfg
