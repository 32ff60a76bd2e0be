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

#include "bankmfg/measure_projection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "bankmfg/errors.hpp"

namespace bankmfg {
namespace {

// Offsets this close to a node (in cell units) snap onto it so that atoms
// sitting on a node stay there despite rounding in the node coordinates.
constexpr double kSnap = 1e-10;
constexpr double kSupportSlack = 1e-12;

void validate_axis(const std::vector<double>& points, const char* name) {
  if (points.size() < 2) {
    throw DomainError(std::string("grid axis ") + name +
                      " needs at least two nodes");
  }
  for (std::size_t k = 1; k < points.size(); ++k) {
    if (!(points[k] > points[k - 1])) {
      throw DomainError(std::string("grid axis ") + name +
                        " must be strictly increasing");
    }
  }
}

// Cell index and fractional offset of `x` along an axis.
std::pair<std::size_t, double> locate(const std::vector<double>& points,
                                      double x) {
  auto upper = std::upper_bound(points.begin(), points.end(), x);
  std::size_t cell = upper == points.begin()
                         ? 0
                         : static_cast<std::size_t>(upper - points.begin()) - 1;
  cell = std::min(cell, points.size() - 2);
  double frac = (x - points[cell]) / (points[cell + 1] - points[cell]);
  if (frac < kSnap) frac = 0.0;
  if (frac > 1.0 - kSnap) frac = 1.0;
  return {cell, frac};
}

}  // namespace

GridSpec GridSpec::uniform(double p_lo, double p_hi, int p_count, double r_lo,
                           double r_hi, int r_count) {
  if (p_count < 2 || r_count < 2) {
    throw DomainError("grid needs at least two nodes per axis");
  }
  GridSpec grid;
  for (int i = 0; i < p_count; ++i) {
    grid.p_points.push_back(p_lo + (p_hi - p_lo) * i / (p_count - 1));
  }
  for (int j = 0; j < r_count; ++j) {
    grid.r_points.push_back(r_lo + (r_hi - r_lo) * j / (r_count - 1));
  }
  grid.validate();
  return grid;
}

void GridSpec::validate() const {
  validate_axis(p_points, "p");
  validate_axis(r_points, "r");
}

ProjectedMeasure::ProjectedMeasure(Eigen::VectorXd weights)
    : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw InvalidMeasureError("empty measure");
  for (Eigen::Index k = 0; k < weights_.size(); ++k) {
    if (!std::isfinite(weights_[k]) || weights_[k] < 0.0) {
      std::ostringstream msg;
      msg << "measure weight " << k << " is " << weights_[k];
      throw InvalidMeasureError(msg.str());
    }
  }
  const double total = weights_.sum();
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "measure weights sum to " << total << ", not 1";
    throw InvalidMeasureError(msg.str());
  }
}

ProjectedMeasure ProjectedMeasure::uniform(std::size_t nodes) {
  return ProjectedMeasure(Eigen::VectorXd::Constant(
      static_cast<Eigen::Index>(nodes), 1.0 / static_cast<double>(nodes)));
}

ProjectedMeasure ProjectedMeasure::point_mass(std::size_t nodes,
                                              std::size_t node) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nodes));
  w[static_cast<Eigen::Index>(node)] = 1.0;
  return ProjectedMeasure(std::move(w));
}

void EmpiricalMeasure::validate(const GridSpec& grid) const {
  if (atoms.empty()) throw InvalidMeasureError("empirical measure is empty");
  double total = 0.0;
  for (const RateAtom& atom : atoms) {
    if (!std::isfinite(atom.weight) || atom.weight < 0.0) {
      throw InvalidMeasureError("empirical measure has a negative weight");
    }
    total += atom.weight;
    if (atom.p < grid.p_lo() - kSupportSlack ||
        atom.p > grid.p_hi() + kSupportSlack ||
        atom.r < grid.r_lo() - kSupportSlack ||
        atom.r > grid.r_hi() + kSupportSlack) {
      std::ostringstream msg;
      msg << "atom (" << atom.p << ", " << atom.r
          << ") lies outside the grid support";
      throw OutOfSupportError(msg.str());
    }
  }
  if (std::abs(total - 1.0) > ProjectedMeasure::kMassTolerance) {
    throw InvalidMeasureError("empirical measure weights do not sum to 1");
  }
}

Eigen::VectorXd project_atoms(std::span<const RateAtom> atoms,
                              const GridSpec& grid, SupportPolicy support,
                              int* clamped) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(grid.size()));
  int clamp_count = 0;
  for (const RateAtom& atom : atoms) {
    if (!std::isfinite(atom.weight) || atom.weight < 0.0) {
      throw InvalidMeasureError("cannot project an atom with negative weight");
    }
    double p = atom.p;
    double r = atom.r;
    const bool outside = p < grid.p_lo() - kSupportSlack ||
                         p > grid.p_hi() + kSupportSlack ||
                         r < grid.r_lo() - kSupportSlack ||
                         r > grid.r_hi() + kSupportSlack;
    if (outside) {
      if (support == SupportPolicy::kStrict) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "atom (" << p << ", " << r << ") lies outside the grid support";
        throw OutOfSupportError(msg.str());
      }
      ++clamp_count;
    }
    p = std::clamp(p, grid.p_lo(), grid.p_hi());
    r = std::clamp(r, grid.r_lo(), grid.r_hi());
    const auto [i, fp] = locate(grid.p_points, p);
    const auto [j, fr] = locate(grid.r_points, r);
    const double w = atom.weight;
    out[static_cast<Eigen::Index>(grid.index(i, j))] += (1 - fp) * (1 - fr) * w;
    out[static_cast<Eigen::Index>(grid.index(i, j + 1))] += (1 - fp) * fr * w;
    out[static_cast<Eigen::Index>(grid.index(i + 1, j))] += fp * (1 - fr) * w;
    out[static_cast<Eigen::Index>(grid.index(i + 1, j + 1))] += fp * fr * w;
  }
  if (clamped != nullptr) *clamped = clamp_count;
  return out;
}

ProjectedMeasure project(const EmpiricalMeasure& measure,
                         const GridSpec& grid) {
  measure.validate(grid);
  return ProjectedMeasure(project_atoms(measure.atoms, grid));
}

ProjectedMeasure project_uniform_box(double p_lo, double p_hi, double r_lo,
                                     double r_hi, int resolution,
                                     const GridSpec& grid) {
  if (resolution < 1) throw DomainError("resolution must be >= 1");
  EmpiricalMeasure measure;
  const double w = 1.0 / (static_cast<double>(resolution) * resolution);
  for (int a = 0; a < resolution; ++a) {
    const double p = p_lo + (p_hi - p_lo) * (a + 0.5) / resolution;
    for (int b = 0; b < resolution; ++b) {
      const double r = r_lo + (r_hi - r_lo) * (b + 0.5) / resolution;
      measure.atoms.push_back({p, r, w});
    }
  }
  Eigen::VectorXd weights = project_atoms(measure.atoms, grid);
  // Re-normalize away the rounding of resolution^2 equal weights.
  weights /= weights.sum();
  return ProjectedMeasure(std::move(weights));
}

double aggregate_minor_mass(const ProjectedMeasure& mu, const GridSpec& grid) {
  double total = 0.0;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    total += mu[node] * grid.node_p(node);
  }
  return total;
}

double mean_rate(const ProjectedMeasure& mu, const GridSpec& grid) {
  double total = 0.0;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    total += mu[node] * grid.node_r(node);
  }
  return total;
}

std::vector<RateAtom> post_decision_crowd(const ProjectedMeasure& mu,
                                          std::span<const double> node_actions,
                                          const GridSpec& grid) {
  if (mu.size() != grid.size() || node_actions.size() != grid.size()) {
    throw DimensionError("measure, node actions and grid sizes differ");
  }
  std::vector<RateAtom> crowd;
  crowd.reserve(grid.size());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    if (mu[node] > 0.0) {
      crowd.push_back({grid.node_p(node), node_actions[node], mu[node]});
    }
  }
  return crowd;
}

MeanFieldStep mean_field_transition(const BankState& major,
                                    double major_action,
                                    const ProjectedMeasure& mu,
                                    std::span<const double> node_actions,
                                    const GridSpec& grid,
                                    const MarketParams& params,
                                    SupportPolicy support) {
  return mean_field_transition(major, major_action,
                               post_decision_crowd(mu, node_actions, grid),
                               grid, params, support);
}

MeanFieldStep mean_field_transition(const BankState& major,
                                    double major_action,
                                    std::vector<RateAtom> crowd,
                                    const GridSpec& grid,
                                    const MarketParams& params,
                                    SupportPolicy support) {
  std::vector<RateAtom> moved;
  moved.reserve(crowd.size());
  for (const RateAtom& atom : crowd) {
    const double drift = detail::drift_minor_unchecked(
        major_action, major.p, atom.r, atom.p, crowd, params);
    moved.push_back({detail::clamp_proportion(atom.p + drift * params.dt),
                     atom.r, atom.weight});
  }
  int clamped = 0;
  Eigen::VectorXd next = project_atoms(moved, grid, support, &clamped);
  return {ProjectedMeasure(std::move(next)), std::move(crowd), clamped};
}

}  // namespace bankmfg
