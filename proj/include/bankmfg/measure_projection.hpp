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

#ifndef BANKMFG_MEASURE_PROJECTION_HPP
#define BANKMFG_MEASURE_PROJECTION_HPP

// Finite representation of the minor-bank distribution: a rectangular grid
// over (proportion, rate), the bilinear projection of finite-support measures
// onto its nodes, and the one-step mean-field transition.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bankmfg/market_model.hpp"

namespace bankmfg {

// Tensor grid of nodes. Node (i, j) sits at (p_points[i], r_points[j]) and is
// stored at flat index i * r_points.size() + j.
struct GridSpec {
  std::vector<double> p_points;
  std::vector<double> r_points;

  static GridSpec uniform(double p_lo, double p_hi, int p_count, double r_lo,
                          double r_hi, int r_count);

  std::size_t size() const { return p_points.size() * r_points.size(); }
  std::size_t index(std::size_t i, std::size_t j) const {
    return i * r_points.size() + j;
  }
  double node_p(std::size_t node) const {
    return p_points[node / r_points.size()];
  }
  double node_r(std::size_t node) const {
    return r_points[node % r_points.size()];
  }
  double p_lo() const { return p_points.front(); }
  double p_hi() const { return p_points.back(); }
  double r_lo() const { return r_points.front(); }
  double r_hi() const { return r_points.back(); }

  void validate() const;
};

// Probability vector over the grid nodes. Immutable once constructed.
class ProjectedMeasure {
 public:
  inline static constexpr double kMassTolerance = 1e-12;

  // Throws InvalidMeasureError unless weights are finite, nonnegative and sum
  // to one within kMassTolerance.
  explicit ProjectedMeasure(Eigen::VectorXd weights);

  static ProjectedMeasure uniform(std::size_t nodes);
  static ProjectedMeasure point_mass(std::size_t nodes, std::size_t node);

  const Eigen::VectorXd& weights() const { return weights_; }
  double operator[](std::size_t node) const {
    return weights_[static_cast<Eigen::Index>(node)];
  }
  std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }

 private:
  Eigen::VectorXd weights_;
};

struct EmpiricalMeasure {
  std::vector<RateAtom> atoms;

  // Weights nonnegative and summing to one, atoms inside the grid's box.
  void validate(const GridSpec& grid) const;
};

enum class SupportPolicy {
  kStrict,  // atoms outside the grid box raise OutOfSupportError
  kClamp,   // atoms are moved to the nearest point of the box
};

// Splits every atom's mass onto the four vertices of its enclosing cell with
// bilinear weights. Returns the (unnormalized) node weights; total mass and
// first moments in p and r are preserved. `clamped`, when given, receives the
// number of atoms that had to be clamped.
Eigen::VectorXd project_atoms(std::span<const RateAtom> atoms,
                              const GridSpec& grid,
                              SupportPolicy support = SupportPolicy::kStrict,
                              int* clamped = nullptr);

ProjectedMeasure project(const EmpiricalMeasure& measure, const GridSpec& grid);

// Uniform distribution on [p_lo, p_hi] x [r_lo, r_hi], discretized with
// `resolution` midpoints per axis and projected.
ProjectedMeasure project_uniform_box(double p_lo, double p_hi, double r_lo,
                                     double r_hi, int resolution,
                                     const GridSpec& grid);

// Integral of the rescaled proportion: the minor banks' aggregate share.
double aggregate_minor_mass(const ProjectedMeasure& mu, const GridSpec& grid);
double mean_rate(const ProjectedMeasure& mu, const GridSpec& grid);

// Atoms (node proportion, node's new rate, weight) for nodes with positive
// weight: the minor crowd right after its decisions.
std::vector<RateAtom> post_decision_crowd(const ProjectedMeasure& mu,
                                          std::span<const double> node_actions,
                                          const GridSpec& grid);

struct MeanFieldStep {
  ProjectedMeasure next;
  std::vector<RateAtom> crowd;  // post-decision atoms used for every drift
  int clamped_atoms = 0;
};

// Moves every node atom by the minor transition under the given node actions
// and re-projects onto the grid.
MeanFieldStep mean_field_transition(const BankState& major,
                                    double major_action,
                                    const ProjectedMeasure& mu,
                                    std::span<const double> node_actions,
                                    const GridSpec& grid,
                                    const MarketParams& params,
                                    SupportPolicy support =
                                        SupportPolicy::kStrict);

// Same step reusing an already built post-decision crowd.
MeanFieldStep mean_field_transition(const BankState& major,
                                    double major_action,
                                    std::vector<RateAtom> crowd,
                                    const GridSpec& grid,
                                    const MarketParams& params,
                                    SupportPolicy support);

}  // namespace bankmfg

#endif  // BANKMFG_MEASURE_PROJECTION_HPP
