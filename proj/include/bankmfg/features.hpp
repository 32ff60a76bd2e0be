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

#ifndef BANKMFG_FEATURES_HPP
#define BANKMFG_FEATURES_HPP

// Fixed input layouts of the two Q-networks. Time is scaled to t / T,
// proportions and rates are mapped affinely onto [0, 1] using the state box,
// and the measure weights are passed through unchanged.
//
//   major: [t, p0, r0, u0, rc, mu_0 .. mu_{n-1}]
//   minor: [t, p0, r0, p, r, u, rc, mu_0 .. mu_{n-1}]

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bankmfg/market_model.hpp"
#include "bankmfg/measure_projection.hpp"

namespace bankmfg {

struct MajorLayout {
  static constexpr Eigen::Index kTime = 0;
  static constexpr Eigen::Index kMajorP = 1;
  static constexpr Eigen::Index kMajorR = 2;
  static constexpr Eigen::Index kAction = 3;
  static constexpr Eigen::Index kCbRate = 4;
  static constexpr Eigen::Index kMeasure = 5;
  static Eigen::Index input_dim(std::size_t nodes) {
    return kMeasure + static_cast<Eigen::Index>(nodes);
  }
};

struct MinorLayout {
  static constexpr Eigen::Index kTime = 0;
  static constexpr Eigen::Index kMajorP = 1;
  static constexpr Eigen::Index kMajorR = 2;
  static constexpr Eigen::Index kOwnP = 3;
  static constexpr Eigen::Index kOwnR = 4;
  static constexpr Eigen::Index kAction = 5;
  static constexpr Eigen::Index kCbRate = 6;
  static constexpr Eigen::Index kMeasure = 7;
  static Eigen::Index input_dim(std::size_t nodes) {
    return kMeasure + static_cast<Eigen::Index>(nodes);
  }
};

class FeatureScaling {
 public:
  explicit FeatureScaling(const MarketParams& params)
      : horizon_(params.horizon),
        p_lo_(params.prop_min),
        p_span_(params.prop_max - params.prop_min),
        r_lo_(params.rate_min),
        r_span_(params.rate_max - params.rate_min) {}

  double time(int t) const { return static_cast<double>(t) / horizon_; }
  double proportion(double p) const { return (p - p_lo_) / p_span_; }
  double rate(double r) const { return (r - r_lo_) / r_span_; }

 private:
  double horizon_;
  double p_lo_;
  double p_span_;
  double r_lo_;
  double r_span_;
};

Eigen::VectorXd encode_major(const FeatureScaling& scaling, int t,
                             const BankState& major, double action,
                             double cb_rate, const ProjectedMeasure& mu);

Eigen::VectorXd encode_minor(const FeatureScaling& scaling, int t,
                             const BankState& major, const BankState& own,
                             double action, double cb_rate,
                             const ProjectedMeasure& mu);

// Column names, e.g. "t", "p0", ..., "mu[3,2]".
std::vector<std::string> major_feature_names(const GridSpec& grid);
std::vector<std::string> minor_feature_names(const GridSpec& grid);

}  // namespace bankmfg

#endif  // BANKMFG_FEATURES_HPP
