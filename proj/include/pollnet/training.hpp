#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pollnet/dataset.hpp"
#include "pollnet/errors.hpp"
#include "pollnet/network.hpp"

namespace pollnet {

struct TrainConfig {
  double learning_rate = 0.05;
  int max_epochs = 1000;
  int max_fail = 6;
  std::uint64_t seed = 0;    // echoed into run configs; the full-batch loop draws nothing
  double target_mse = 0.0;   // 0 disables the goal check

  void check() const {
    if (!(learning_rate > 0)) throw UsageError("train: learning_rate must be positive");
    if (max_epochs < 1) throw UsageError("train: max_epochs must be at least 1");
    if (max_fail < 1) throw UsageError("train: max_fail must be at least 1");
    if (target_mse < 0) throw UsageError("train: target_mse must be non-negative");
  }
};

enum class StopReason { validation_fail, max_epochs, target_mse };

std::string to_string(StopReason reason);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_mse = 0;
  double validation_mse = 0;
  double test_mse = 0;
};

template <typename Scalar>
struct TrainResultT {
  MlpT<Scalar> model;  // weights as of best_epoch
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  int stop_epoch = 0;
  StopReason stop_reason = StopReason::max_epochs;
};

using TrainResult = TrainResultT<double>;

struct EvalStats {
  double mse = 0;
  double accuracy = 0;
};

// Tracks the running best validation MSE. update() reports, per epoch in
// order, whether the streak of epochs without strict improvement has reached
// max_fail; when it fires at epoch e, e - best_epoch() == max_fail.
class EarlyStopping {
 public:
  explicit EarlyStopping(int max_fail) : max_fail_(max_fail) {}

  bool update(int epoch, double validation_mse) {
    if (validation_mse < best_mse_) {
      best_mse_ = validation_mse;
      best_epoch_ = epoch;
      fail_streak_ = 0;
      return false;
    }
    ++fail_streak_;
    return fail_streak_ >= max_fail_;
  }

  int best_epoch() const { return best_epoch_; }
  double best_mse() const { return best_mse_; }

 private:
  int max_fail_;
  int best_epoch_ = 0;
  double best_mse_ = std::numeric_limits<double>::infinity();
  int fail_streak_ = 0;
};

namespace detail {

template <typename Scalar>
MatrixX<Scalar> take_rows(const MatrixX<Scalar>& m, const std::vector<Eigen::Index>& idx) {
  MatrixX<Scalar> out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out.row(i) = m.row(idx[static_cast<std::size_t>(i)]);
  }
  return out;
}

inline void check_indices(const std::vector<Eigen::Index>& idx, Eigen::Index n,
                          const std::string& name) {
  for (Eigen::Index i : idx) {
    if (i < 0 || i >= n) {
      throw UsageError("train: " + name + " index " + std::to_string(i) + " outside 0.." +
                       std::to_string(n - 1));
    }
  }
}

}  // namespace detail

// MSE and argmax accuracy of the model over the given rows.
template <typename Scalar>
EvalStats evaluate(const MlpT<Scalar>& model, const EncodedDatasetT<Scalar>& data,
                   const std::vector<Eigen::Index>& indices) {
  if (indices.empty()) throw UsageError("evaluate: empty index set");
  detail::check_indices(indices, data.rows(), "evaluate");
  const MatrixX<Scalar> inputs = detail::take_rows(data.inputs, indices);
  const MatrixX<Scalar> targets = detail::take_rows(data.targets, indices);
  const BatchTraceT<Scalar> trace = forward_batch<Scalar>(model, inputs);

  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < trace.out_act.rows(); ++i) {
    if (argmax(trace.out_act.row(i)) == argmax(targets.row(i))) ++correct;
  }
  EvalStats stats;
  stats.mse = static_cast<double>(mse(trace.out_act, targets));
  stats.accuracy = static_cast<double>(correct) / static_cast<double>(indices.size());
  return stats;
}

// Full-batch gradient descent over the training subset. Each epoch applies
// one step (weights -= learning_rate * gradient), then records train,
// validation and test MSE. Stops on max_fail consecutive epochs without
// strict validation improvement, on the epoch cap, or on reaching
// target_mse; the returned model is the best-validation snapshot. Only the
// validation subset ever influences stopping.
template <typename Scalar>
TrainResultT<Scalar> train(const MlpT<Scalar>& initial, const EncodedDatasetT<Scalar>& data,
                           const SplitIndices& split, const TrainConfig& config) {
  config.check();
  if (split.train.empty()) throw UsageError("train: empty training subset");
  if (split.validation.empty()) throw UsageError("train: empty validation subset");
  if (initial.inputs() != data.inputs.cols() || initial.classes() != data.targets.cols()) {
    throw UsageError("train: network shape does not match the encoded dataset");
  }
  detail::check_indices(split.train, data.rows(), "train");
  detail::check_indices(split.validation, data.rows(), "validation");
  detail::check_indices(split.test, data.rows(), "test");

  const MatrixX<Scalar> train_in = detail::take_rows(data.inputs, split.train);
  const MatrixX<Scalar> train_tg = detail::take_rows(data.targets, split.train);
  const MatrixX<Scalar> val_in = detail::take_rows(data.inputs, split.validation);
  const MatrixX<Scalar> val_tg = detail::take_rows(data.targets, split.validation);
  const MatrixX<Scalar> test_in = detail::take_rows(data.inputs, split.test);
  const MatrixX<Scalar> test_tg = detail::take_rows(data.targets, split.test);

  const Scalar rate = static_cast<Scalar>(config.learning_rate);
  MlpT<Scalar> model = initial;
  MlpT<Scalar> best = initial;
  EarlyStopping stopping(config.max_fail);

  TrainResultT<Scalar> result;
  result.history.reserve(static_cast<std::size_t>(config.max_epochs));

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const GradientT<Scalar> grad = backprop<Scalar>(model, train_in, train_tg);
    model.w_hidden -= rate * grad.w_hidden;
    model.b_hidden -= rate * grad.b_hidden;
    model.w_out -= rate * grad.w_out;
    model.b_out -= rate * grad.b_out;

    EpochRecord record;
    record.epoch = epoch;
    record.train_mse = static_cast<double>(mse(forward_batch<Scalar>(model, train_in).out_act, train_tg));
    record.validation_mse =
        static_cast<double>(mse(forward_batch<Scalar>(model, val_in).out_act, val_tg));
    record.test_mse =
        split.test.empty()
            ? std::numeric_limits<double>::quiet_NaN()
            : static_cast<double>(mse(forward_batch<Scalar>(model, test_in).out_act, test_tg));
    if (!std::isfinite(record.train_mse) || !std::isfinite(record.validation_mse)) {
      throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));
    }
    result.history.push_back(record);

    const bool fail_limit = stopping.update(epoch, record.validation_mse);
    if (stopping.best_epoch() == epoch) best = model;

    if (fail_limit) {
      result.stop_reason = StopReason::validation_fail;
      result.stop_epoch = epoch;
      break;
    }
    if (config.target_mse > 0 && record.train_mse <= config.target_mse) {
      result.stop_reason = StopReason::target_mse;
      result.stop_epoch = epoch;
      break;
    }
    if (epoch == config.max_epochs) {
      result.stop_reason = StopReason::max_epochs;
      result.stop_epoch = epoch;
    }
  }

  result.best_epoch = stopping.best_epoch();
  result.model = std::move(best);
  return result;
}

inline std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::validation_fail: return "validation_fail";
    case StopReason::max_epochs: return "max_epochs";
    case StopReason::target_mse: return "target_mse";
  }
  return "unknown";
}

}  // namespace pollnet
