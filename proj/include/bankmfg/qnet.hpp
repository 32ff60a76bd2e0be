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

#ifndef BANKMFG_QNET_HPP
#define BANKMFG_QNET_HPP

// One-hidden-layer networks held as empirical measures over neurons:
//
//   Q(z) = (1/L) sum_l beta_l * phi(alpha_l . z + c_l)
//
// Averaging two networks is then a mixture of their neuron measures, which is
// what the fictitious-play update needs.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

#include "bankmfg/errors.hpp"

namespace bankmfg {

enum class Activation { kRelu, kTanh };

inline std::string to_string(Activation activation) {
  return activation == Activation::kRelu ? "relu" : "tanh";
}

inline Activation activation_from_string(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw DomainError("unknown activation '" + std::string(name) + "'");
}

enum class AveragingMode {
  kExactConcat,  // keep every neuron, rescale out-weights: exact mixture
  kResample,     // draw a fixed number of neurons from the mixture
};

inline std::string to_string(AveragingMode mode) {
  return mode == AveragingMode::kExactConcat ? "exact-concat" : "resample";
}

inline AveragingMode averaging_mode_from_string(std::string_view name) {
  if (name == "exact-concat") return AveragingMode::kExactConcat;
  if (name == "resample") return AveragingMode::kResample;
  throw DomainError("unknown averaging mode '" + std::string(name) + "'");
}

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using ArrayXX = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct Neuron {
  Scalar out_weight{};
  VectorX<Scalar> in_weights;
  Scalar bias{};
};

// Same shape as the network parameters.
template <typename Scalar>
struct ParameterGradient {
  MatrixX<Scalar> in_weights;   // L x d
  VectorX<Scalar> bias;         // L
  VectorX<Scalar> out_weights;  // L

  static ParameterGradient zeros(Eigen::Index width, Eigen::Index input_dim) {
    return {MatrixX<Scalar>::Zero(width, input_dim),
            VectorX<Scalar>::Zero(width), VectorX<Scalar>::Zero(width)};
  }
  ParameterGradient& operator+=(const ParameterGradient& other) {
    in_weights += other.in_weights;
    bias += other.bias;
    out_weights += other.out_weights;
    return *this;
  }
  ParameterGradient& operator*=(Scalar s) {
    in_weights *= s;
    bias *= s;
    out_weights *= s;
    return *this;
  }
  Scalar squared_norm() const {
    return in_weights.squaredNorm() + bias.squaredNorm() +
           out_weights.squaredNorm();
  }
};

template <typename Scalar>
class BasicNeuronMeasure {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;
  using Array = ArrayXX<Scalar>;

  BasicNeuronMeasure(Matrix in_weights, Vector bias, Vector out_weights,
                     Activation activation)
      : in_weights_(std::move(in_weights)),
        bias_(std::move(bias)),
        out_weights_(std::move(out_weights)),
        activation_(activation) {
    if (in_weights_.rows() < 1) {
      throw DimensionError("a network needs at least one neuron");
    }
    if (bias_.size() != in_weights_.rows() ||
        out_weights_.size() != in_weights_.rows()) {
      throw DimensionError("neuron parameter arrays disagree on the width");
    }
  }

  // In-weights and biases ~ U(-1/sqrt(d), 1/sqrt(d)); out-weights
  // ~ U(-1/sqrt(L), 1/sqrt(L)).
  static BasicNeuronMeasure random(Eigen::Index width, Eigen::Index input_dim,
                                   Activation activation,
                                   std::mt19937_64& rng) {
    const double in_scale = 1.0 / std::sqrt(static_cast<double>(input_dim));
    const double out_scale = 1.0 / std::sqrt(static_cast<double>(width));
    std::uniform_real_distribution<double> in_dist(-in_scale, in_scale);
    std::uniform_real_distribution<double> out_dist(-out_scale, out_scale);
    Matrix in_weights(width, input_dim);
    Vector bias(width);
    Vector out_weights(width);
    for (Eigen::Index l = 0; l < width; ++l) {
      for (Eigen::Index k = 0; k < input_dim; ++k) {
        in_weights(l, k) = static_cast<Scalar>(in_dist(rng));
      }
      bias[l] = static_cast<Scalar>(in_dist(rng));
      out_weights[l] = static_cast<Scalar>(out_dist(rng));
    }
    return BasicNeuronMeasure(std::move(in_weights), std::move(bias),
                              std::move(out_weights), activation);
  }

  Eigen::Index width() const { return in_weights_.rows(); }
  Eigen::Index input_dim() const { return in_weights_.cols(); }
  Activation activation() const { return activation_; }

  const Matrix& in_weights() const { return in_weights_; }
  const Vector& bias() const { return bias_; }
  const Vector& out_weights() const { return out_weights_; }
  Matrix& in_weights() { return in_weights_; }
  Vector& bias() { return bias_; }
  Vector& out_weights() { return out_weights_; }

  Neuron<Scalar> neuron(Eigen::Index l) const {
    return {out_weights_[l], in_weights_.row(l).transpose(), bias_[l]};
  }

  template <typename Derived>
  Array activate(const Eigen::ArrayBase<Derived>& pre) const {
    if (activation_ == Activation::kRelu) return pre.cwiseMax(Scalar(0));
    return pre.tanh();
  }

  template <typename Derived>
  Array activate_derivative(const Eigen::ArrayBase<Derived>& pre) const {
    if (activation_ == Activation::kRelu) {
      return (pre > Scalar(0)).template cast<Scalar>();
    }
    return Scalar(1) - pre.tanh().square();
  }

  // Output for a hidden pre-activation vector.
  Scalar read_out(const Vector& pre) const {
    Scalar total;
    if (activation_ == Activation::kRelu) {
      total = out_weights_.dot(pre.cwiseMax(Scalar(0)));
    } else {
      total = out_weights_.dot(pre.array().tanh().matrix());
    }
    return total / static_cast<Scalar>(width());
  }

  Scalar forward(const Vector& z) const {
    check_input(z.size());
    return read_out(in_weights_ * z + bias_);
  }

  // Columns of `inputs` are samples.
  Vector forward_batch(const Matrix& inputs) const {
    check_input(inputs.rows());
    Matrix pre = in_weights_ * inputs;
    pre.colwise() += bias_;
    return (out_weights_.transpose() * activate(pre.array()).matrix())
               .transpose() /
           static_cast<Scalar>(width());
  }

  // Hidden pre-activations at `z` with feature `feature` zeroed.
  Vector partial_preactivation(const Vector& z, Eigen::Index feature) const {
    check_input(z.size());
    Vector pre = in_weights_ * z + bias_;
    pre -= in_weights_.col(feature) * z[feature];
    return pre;
  }

  // Outputs at `z` with feature `feature` replaced by each of `values`.
  Vector evaluate_along(const Vector& z, Eigen::Index feature,
                        std::span<const Scalar> values) const {
    const Vector base = partial_preactivation(z, feature);
    Vector out(static_cast<Eigen::Index>(values.size()));
    for (std::size_t k = 0; k < values.size(); ++k) {
      out[static_cast<Eigen::Index>(k)] =
          read_out(base + in_weights_.col(feature) * values[k]);
    }
    return out;
  }

  template <typename Other>
  BasicNeuronMeasure<Other> cast() const {
    return BasicNeuronMeasure<Other>(in_weights_.template cast<Other>(),
                                     bias_.template cast<Other>(),
                                     out_weights_.template cast<Other>(),
                                     activation_);
  }

  bool operator==(const BasicNeuronMeasure& other) const {
    return activation_ == other.activation_ &&
           in_weights_.rows() == other.in_weights_.rows() &&
           in_weights_.cols() == other.in_weights_.cols() &&
           in_weights_ == other.in_weights_ && bias_ == other.bias_ &&
           out_weights_ == other.out_weights_;
  }

 private:
  void check_input(Eigen::Index size) const {
    if (size != input_dim()) {
      throw DimensionError("network expects " + std::to_string(input_dim()) +
                           " inputs, got " + std::to_string(size));
    }
  }

  Matrix in_weights_;  // L x d, one row per neuron
  Vector bias_;
  Vector out_weights_;
  Activation activation_;
};

using NeuronMeasure = BasicNeuronMeasure<double>;

// Gradient of sum_j coeffs[j] * Q(inputs.col(j)) with respect to every
// parameter.
template <typename Scalar>
ParameterGradient<Scalar> weighted_output_gradient(
    const BasicNeuronMeasure<Scalar>& net, const MatrixX<Scalar>& inputs,
    const VectorX<Scalar>& coeffs) {
  if (inputs.rows() != net.input_dim()) {
    throw DimensionError("gradient inputs do not match the network");
  }
  if (inputs.cols() != coeffs.size()) {
    throw DimensionError("one coefficient per input column is required");
  }
  const Scalar inv_width = Scalar(1) / static_cast<Scalar>(net.width());
  MatrixX<Scalar> pre = net.in_weights() * inputs;
  pre.colwise() += net.bias();
  const ArrayXX<Scalar> hidden = net.activate(pre.array());
  ArrayXX<Scalar> slope = net.activate_derivative(pre.array());

  ParameterGradient<Scalar> grad;
  grad.out_weights = (hidden.matrix() * coeffs) * inv_width;
  // d/d(pre_lj) = coeffs_j * beta_l * phi'(pre_lj) / L
  slope.colwise() *= net.out_weights().array() * inv_width;
  slope.rowwise() *= coeffs.transpose().array();
  grad.bias = slope.rowwise().sum().matrix();
  grad.in_weights = slope.matrix() * inputs.transpose();
  return grad;
}

template <typename Scalar>
struct LossAndGradient {
  Scalar loss{};
  ParameterGradient<Scalar> gradient;
};

// Mean squared residual (1/B) sum |Q(z_i) - y_i|^2 and its gradient with the
// targets held constant.
template <typename Scalar>
LossAndGradient<Scalar> squared_loss_gradient(
    const BasicNeuronMeasure<Scalar>& net, const MatrixX<Scalar>& inputs,
    const VectorX<Scalar>& targets) {
  if (inputs.cols() == 0) throw DimensionError("empty gradient batch");
  if (inputs.cols() != targets.size()) {
    throw DimensionError("one target per input column is required");
  }
  const VectorX<Scalar> residual = net.forward_batch(inputs) - targets;
  const Scalar batch = static_cast<Scalar>(inputs.cols());
  LossAndGradient<Scalar> out;
  out.loss = residual.squaredNorm() / batch;
  out.gradient = weighted_output_gradient(
      net, inputs, VectorX<Scalar>(residual * (Scalar(2) / batch)));
  return out;
}

template <typename Scalar>
struct AdamState {
  Scalar learning_rate = Scalar(1e-3);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar epsilon = Scalar(1e-8);
  std::int64_t step = 0;
  ParameterGradient<Scalar> first_moment;
  ParameterGradient<Scalar> second_moment;

  // Zeroes the moments and the step counter for a network of this shape.
  void reset(Eigen::Index width, Eigen::Index input_dim) {
    step = 0;
    first_moment = ParameterGradient<Scalar>::zeros(width, input_dim);
    second_moment = ParameterGradient<Scalar>::zeros(width, input_dim);
  }
};

namespace detail {
template <typename Param, typename Grad, typename Moment>
void adam_update(Param& param, const Grad& grad, Moment& m, Moment& v,
                 double beta1, double beta2, double step_size, double bias2,
                 double epsilon) {
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseAbs2();
  param.array() -=
      step_size * m.array() / ((v.array() / bias2).sqrt() + epsilon);
}
}  // namespace detail

template <typename Scalar>
void adam_step(BasicNeuronMeasure<Scalar>& net,
               const ParameterGradient<Scalar>& grad,
               AdamState<Scalar>& state) {
  if (state.first_moment.in_weights.rows() != net.width() ||
      state.first_moment.in_weights.cols() != net.input_dim()) {
    state.reset(net.width(), net.input_dim());
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(static_cast<double>(state.beta1), t);
  const double bias2 = 1.0 - std::pow(static_cast<double>(state.beta2), t);
  const double step_size = state.learning_rate / bias1;
  detail::adam_update(net.in_weights(), grad.in_weights,
                      state.first_moment.in_weights,
                      state.second_moment.in_weights, state.beta1,
                      state.beta2, step_size, bias2, state.epsilon);
  detail::adam_update(net.bias(), grad.bias, state.first_moment.bias,
                      state.second_moment.bias, state.beta1, state.beta2,
                      step_size, bias2, state.epsilon);
  detail::adam_update(net.out_weights(), grad.out_weights,
                      state.first_moment.out_weights,
                      state.second_moment.out_weights, state.beta1,
                      state.beta2, step_size, bias2, state.epsilon);
}

// Fictitious-play average: the network whose function is
//   weight_old * old(z) + (1 - weight_old) * fresh(z).
// A degenerate weight (0 or 1) returns that side unchanged. Otherwise
// kExactConcat realizes the mixture exactly with L_old + L_new neurons and
// kResample draws `width` neurons from the mixture measure by systematic
// resampling (one uniform offset, evenly spaced quantiles); `width` = 0 keeps
// the fresh network's width. Each neuron is drawn as often as its mixture
// mass times `width`, rounded up or down, so the draw is unbiased and a
// neuron with mass below 1/width appears at most once.
template <typename Scalar>
BasicNeuronMeasure<Scalar> fp_average(const BasicNeuronMeasure<Scalar>& old,
                                      const BasicNeuronMeasure<Scalar>& fresh,
                                      double weight_old, AveragingMode mode,
                                      std::mt19937_64* rng = nullptr,
                                      Eigen::Index width = 0) {
  if (old.input_dim() != fresh.input_dim()) {
    throw DimensionError("cannot average networks with different inputs");
  }
  if (old.activation() != fresh.activation()) {
    throw DomainError("cannot average networks with different activations");
  }
  if (!(weight_old >= 0.0 && weight_old <= 1.0)) {
    throw DomainError("averaging weight must lie in [0, 1]");
  }
  using Matrix = MatrixX<Scalar>;
  using Vector = VectorX<Scalar>;
  const Eigen::Index d = old.input_dim();

  if (weight_old == 0.0) return fresh;
  if (weight_old == 1.0) return old;
  if (mode == AveragingMode::kExactConcat) {
    const Eigen::Index l_old = old.width();
    const Eigen::Index l_new = fresh.width();
    const Eigen::Index total = l_old + l_new;
    Matrix in_weights(total, d);
    in_weights << old.in_weights(), fresh.in_weights();
    Vector bias(total);
    bias << old.bias(), fresh.bias();
    const auto old_scale = static_cast<Scalar>(
        weight_old * static_cast<double>(total) / static_cast<double>(l_old));
    const auto new_scale =
        static_cast<Scalar>((1.0 - weight_old) * static_cast<double>(total) /
                            static_cast<double>(l_new));
    Vector out_weights(total);
    out_weights << old.out_weights() * old_scale,
        fresh.out_weights() * new_scale;
    return BasicNeuronMeasure<Scalar>(std::move(in_weights), std::move(bias),
                                      std::move(out_weights),
                                      fresh.activation());
  }

  if (rng == nullptr) {
    throw DomainError("resample averaging needs a random generator");
  }
  const Eigen::Index out_width = width > 0 ? width : fresh.width();
  const Eigen::Index l_old = old.width();
  const Eigen::Index l_new = fresh.width();
  const double mass_old = weight_old / static_cast<double>(l_old);
  const double mass_new = (1.0 - weight_old) / static_cast<double>(l_new);
  const double spacing = 1.0 / static_cast<double>(out_width);
  std::uniform_real_distribution<double> offset(0.0, spacing);
  double point = offset(*rng);
  Matrix in_weights(out_width, d);
  Vector bias(out_width);
  Vector out_weights(out_width);
  Eigen::Index l = 0;
  double cumulative = 0.0;
  for (Eigen::Index k = 0; k < l_old + l_new && l < out_width; ++k) {
    const bool from_old = k < l_old;
    const BasicNeuronMeasure<Scalar>& source = from_old ? old : fresh;
    const Eigen::Index i = from_old ? k : k - l_old;
    cumulative += from_old ? mass_old : mass_new;
    if (k == l_old + l_new - 1) cumulative = 1.0;
    for (; l < out_width && point < cumulative; ++l, point += spacing) {
      in_weights.row(l) = source.in_weights().row(i);
      bias[l] = source.bias()[i];
      out_weights[l] = source.out_weights()[i];
    }
  }
  return BasicNeuronMeasure<Scalar>(std::move(in_weights), std::move(bias),
                                    std::move(out_weights),
                                    fresh.activation());
}

template <typename Scalar>
struct GreedyChoice {
  std::size_t index = 0;
  Scalar value{};
};

// Maximizes the network over candidate values of one input feature. Ties
// resolve to the earliest candidate.
template <typename Scalar>
GreedyChoice<Scalar> greedy_choice(const BasicNeuronMeasure<Scalar>& net,
                                   const VectorX<Scalar>& z,
                                   Eigen::Index feature,
                                   std::span<const Scalar> candidates) {
  if (candidates.empty()) throw DomainError("empty action grid");
  const VectorX<Scalar> values = net.evaluate_along(z, feature, candidates);
  GreedyChoice<Scalar> best{0, values[0]};
  for (Eigen::Index k = 1; k < values.size(); ++k) {
    if (values[k] > best.value) {
      best = {static_cast<std::size_t>(k), values[k]};
    }
  }
  return best;
}

}  // namespace bankmfg

#endif  // BANKMFG_QNET_HPP
