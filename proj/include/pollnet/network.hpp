#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <type_traits>

#include "pollnet/errors.hpp"
#include "pollnet/rng.hpp"

namespace pollnet {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// One-hidden-layer dense network with tan-sigmoid activations on both layers.
template <typename Scalar>
struct MlpT {
  MatrixX<Scalar> w_hidden;  // n_hidden x n_inputs
  VectorX<Scalar> b_hidden;  // n_hidden
  MatrixX<Scalar> w_out;     // n_classes x n_hidden
  VectorX<Scalar> b_out;     // n_classes

  Eigen::Index inputs() const { return w_hidden.cols(); }
  Eigen::Index hidden() const { return w_hidden.rows(); }
  Eigen::Index classes() const { return w_out.rows(); }
};

using Mlp = MlpT<double>;

// Loss partials share the model's layout.
template <typename Scalar>
using GradientT = MlpT<Scalar>;
using Gradient = GradientT<double>;

template <typename Scalar>
struct ForwardTraceT {
  VectorX<Scalar> hidden_pre;
  VectorX<Scalar> hidden_act;
  VectorX<Scalar> out_pre;
  VectorX<Scalar> out_act;
};

using ForwardTrace = ForwardTraceT<double>;

// Row-per-sample activations of a whole batch.
template <typename Scalar>
struct BatchTraceT {
  MatrixX<Scalar> hidden_act;
  MatrixX<Scalar> out_act;
};

// tansig(x) = 2/(1 + exp(-2x)) - 1, i.e. the hyperbolic tangent. Saturated
// results are pulled to the nearest representable value inside (-1, 1), so
// the open range holds for every finite input.
template <typename Scalar>
  requires std::is_floating_point_v<Scalar>
inline Scalar tansig(Scalar x) {
  const Scalar y = std::tanh(x);
  constexpr Scalar inside = Scalar(1) - std::numeric_limits<Scalar>::epsilon() / Scalar(2);
  if (y >= Scalar(1)) return inside;
  if (y <= Scalar(-1)) return -inside;
  return y;
}

template <typename Derived>
inline auto tansig(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) { return tansig(v); });
}

namespace detail {

inline void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

}  // namespace detail

// Weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer, biases
// zero. Entries are drawn row by row, so a seed pins the exact matrices.
template <typename Scalar = double>
MlpT<Scalar> init(Eigen::Index n_inputs, Eigen::Index n_hidden, Eigen::Index n_classes,
                  std::uint64_t seed) {
  detail::require(n_inputs >= 1 && n_hidden >= 1 && n_classes >= 1,
                  "init: layer sizes must be positive");
  Rng rng(seed);
  MlpT<Scalar> mlp;
  mlp.w_hidden.resize(n_hidden, n_inputs);
  mlp.w_out.resize(n_classes, n_hidden);
  mlp.b_hidden = VectorX<Scalar>::Zero(n_hidden);
  mlp.b_out = VectorX<Scalar>::Zero(n_classes);

  const double hidden_bound = 1.0 / std::sqrt(static_cast<double>(n_inputs));
  for (Eigen::Index r = 0; r < n_hidden; ++r)
    for (Eigen::Index c = 0; c < n_inputs; ++c)
      mlp.w_hidden(r, c) = static_cast<Scalar>(uniform_real(rng, -hidden_bound, hidden_bound));

  const double out_bound = 1.0 / std::sqrt(static_cast<double>(n_hidden));
  for (Eigen::Index r = 0; r < n_classes; ++r)
    for (Eigen::Index c = 0; c < n_hidden; ++c)
      mlp.w_out(r, c) = static_cast<Scalar>(uniform_real(rng, -out_bound, out_bound));
  return mlp;
}

template <typename Scalar>
ForwardTraceT<Scalar> forward(const MlpT<Scalar>& mlp,
                              const Eigen::Ref<const VectorX<Scalar>>& input) {
  detail::require(input.size() == mlp.inputs(),
                  "forward: input length " + std::to_string(input.size()) +
                      " does not match network inputs " + std::to_string(mlp.inputs()));
  ForwardTraceT<Scalar> trace;
  trace.hidden_pre = mlp.w_hidden * input + mlp.b_hidden;
  trace.hidden_act = tansig(trace.hidden_pre);
  trace.out_pre = mlp.w_out * trace.hidden_act + mlp.b_out;
  trace.out_act = tansig(trace.out_pre);
  return trace;
}

template <typename Scalar>
BatchTraceT<Scalar> forward_batch(const MlpT<Scalar>& mlp,
                                  const Eigen::Ref<const MatrixX<Scalar>>& inputs) {
  detail::require(inputs.cols() == mlp.inputs(),
                  "forward: batch has " + std::to_string(inputs.cols()) +
                      " columns, network expects " + std::to_string(mlp.inputs()));
  BatchTraceT<Scalar> trace;
  trace.hidden_act =
      tansig(((inputs * mlp.w_hidden.transpose()).rowwise() + mlp.b_hidden.transpose()).eval());
  trace.out_act =
      tansig(((trace.hidden_act * mlp.w_out.transpose()).rowwise() + mlp.b_out.transpose()).eval());
  return trace;
}

// Mean over all entries of the squared difference.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar mse(const Eigen::MatrixBase<DerivedA>& outputs,
                              const Eigen::MatrixBase<DerivedB>& targets) {
  detail::require(outputs.rows() == targets.rows() && outputs.cols() == targets.cols(),
                  "mse: output and target shapes differ");
  detail::require(outputs.rows() > 0 && outputs.cols() > 0, "mse: empty input");
  return (outputs - targets).squaredNorm() /
         static_cast<typename DerivedA::Scalar>(outputs.rows() * outputs.cols());
}

// Exact partials of mse(batch outputs, targets) with respect to every weight
// and bias; means over the batch, so duplicating rows leaves them unchanged.
template <typename Scalar>
GradientT<Scalar> backprop(const MlpT<Scalar>& mlp, const Eigen::Ref<const MatrixX<Scalar>>& inputs,
                           const Eigen::Ref<const MatrixX<Scalar>>& targets) {
  detail::require(inputs.rows() == targets.rows(),
                  "backprop: input and target row counts differ");
  detail::require(inputs.rows() > 0, "backprop: empty batch");
  detail::require(inputs.cols() == mlp.inputs() && targets.cols() == mlp.classes(),
                  "backprop: batch shapes do not match the network");

  const BatchTraceT<Scalar> trace = forward_batch<Scalar>(mlp, inputs);
  const Scalar scale =
      Scalar(2) / static_cast<Scalar>(targets.rows() * targets.cols());

  // d mse / d out_pre, via tansig'(a) = 1 - a^2 at each activation a.
  const MatrixX<Scalar> delta_out =
      (((trace.out_act - targets) * scale).array() * (Scalar(1) - trace.out_act.array().square()))
          .matrix();
  const MatrixX<Scalar> delta_hidden =
      ((delta_out * mlp.w_out).array() * (Scalar(1) - trace.hidden_act.array().square())).matrix();

  GradientT<Scalar> grad;
  grad.w_out = delta_out.transpose() * trace.hidden_act;
  grad.b_out = delta_out.colwise().sum();
  grad.w_hidden = delta_hidden.transpose() * inputs;
  grad.b_hidden = delta_hidden.colwise().sum();
  return grad;
}

// First index of the maximum, so exact ties go to the lowest class.
template <typename Derived>
Eigen::Index argmax(const Eigen::MatrixBase<Derived>& v) {
  detail::require(v.size() > 0, "argmax: empty vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return best;
}

template <typename Scalar>
Eigen::Index predict(const MlpT<Scalar>& mlp, const Eigen::Ref<const VectorX<Scalar>>& input) {
  return argmax(forward<Scalar>(mlp, input).out_act);
}

}  // namespace pollnet
