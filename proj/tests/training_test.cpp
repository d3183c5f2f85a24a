#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "pollnet/dataset.hpp"
#include "pollnet/network.hpp"
#include "pollnet/rng.hpp"
#include "pollnet/training.hpp"

using namespace pollnet;

namespace {

Mlp zero_net(Eigen::Index inputs, Eigen::Index hidden, Eigen::Index classes) {
  Mlp mlp;
  mlp.w_hidden = Eigen::MatrixXd::Zero(hidden, inputs);
  mlp.b_hidden = Eigen::VectorXd::Zero(hidden);
  mlp.w_out = Eigen::MatrixXd::Zero(classes, hidden);
  mlp.b_out = Eigen::VectorXd::Zero(classes);
  return mlp;
}

// Encoded dataset whose inputs already are the +-1 pattern of the one-hot
// target, so a diagonal saturating net classifies it perfectly.
EncodedDataset mirrored_dataset(Eigen::Index n, Eigen::Index classes) {
  EncodedDataset data;
  data.class_count = classes;
  data.inputs.resize(n, classes);
  data.targets = Eigen::MatrixXd::Zero(n, classes);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index c = i % classes;
    data.targets(i, c) = 1.0;
    data.inputs.row(i) = Eigen::RowVectorXd::Constant(classes, -1.0);
    data.inputs(i, c) = 1.0;
  }
  return data;
}

Mlp saturating_diagonal_net(Eigen::Index classes, double gain) {
  Mlp mlp;
  mlp.w_hidden = gain * Eigen::MatrixXd::Identity(classes, classes);
  mlp.b_hidden = Eigen::VectorXd::Zero(classes);
  mlp.w_out = gain * Eigen::MatrixXd::Identity(classes, classes);
  mlp.b_out = Eigen::VectorXd::Zero(classes);
  return mlp;
}

EncodedDataset synth_encoded(std::size_t n, std::uint64_t seed, double noise) {
  const auto schema = default_schema();
  return encode(synthesize(schema, n, seed, planted_rule(schema, "clamp4"), noise));
}

SplitIndices contiguous_split(Eigen::Index n_train, Eigen::Index n_val, Eigen::Index n_test) {
  SplitIndices indices;
  for (Eigen::Index i = 0; i < n_train; ++i) indices.train.push_back(i);
  for (Eigen::Index i = 0; i < n_val; ++i) indices.validation.push_back(n_train + i);
  for (Eigen::Index i = 0; i < n_test; ++i) indices.test.push_back(n_train + n_val + i);
  return indices;
}

}  // namespace

TEST_CASE("early stopping reproduces the 9-then-15 trace") {
  // Validation error strictly decreasing through epoch 9, flat afterwards:
  // the streak fills at epoch 9 + 6 = 15.
  EarlyStopping stopping(6);
  int stop_epoch = 0;
  for (int epoch = 1; epoch <= 30 && stop_epoch == 0; ++epoch) {
    const double val = epoch <= 9 ? 1.0 - 0.05 * epoch : 0.56;
    if (stopping.update(epoch, val)) stop_epoch = epoch;
  }
  CHECK(stop_epoch == 15);
  CHECK(stopping.best_epoch() == 9);
}

TEST_CASE("early stopping counts equality as failure") {
  EarlyStopping stopping(3);
  CHECK_FALSE(stopping.update(1, 0.5));
  CHECK_FALSE(stopping.update(2, 0.5));
  CHECK_FALSE(stopping.update(3, 0.5));
  CHECK(stopping.update(4, 0.5));
  CHECK(stopping.best_epoch() == 1);
}

TEST_CASE("early stopping property: trigger epoch minus best epoch equals max_fail") {
  Rng rng(404);
  for (int run = 0; run < 200; ++run) {
    const int max_fail = 1 + static_cast<int>(bounded_uint(rng, 8));
    EarlyStopping stopping(max_fail);
    int stop_epoch = 0;
    for (int epoch = 1; epoch <= 200 && stop_epoch == 0; ++epoch) {
      if (stopping.update(epoch, uniform_real(rng, 0.0, 1.0))) stop_epoch = epoch;
    }
    if (stop_epoch != 0) {
      REQUIRE(stop_epoch - stopping.best_epoch() == max_fail);
    }
  }
}

TEST_CASE("train at a zero-gradient fixed point stops after 1 + max_fail epochs") {
  // Zero weights produce zero outputs; zero targets make that an exact
  // optimum, so validation MSE never strictly improves after epoch 1.
  EncodedDataset data;
  data.class_count = 2;
  data.inputs = Eigen::MatrixXd::Random(3, 2);
  data.targets = Eigen::MatrixXd::Zero(3, 2);
  const SplitIndices indices = contiguous_split(1, 1, 1);
  TrainConfig config;
  config.max_fail = 6;
  const TrainResult result = train(zero_net(2, 2, 2), data, indices, config);
  CHECK(result.stop_reason == StopReason::validation_fail);
  CHECK(result.stop_epoch == 7);
  CHECK(result.best_epoch == 1);
  CHECK(result.history.size() == 7);
  CHECK(result.history[0].train_mse == 0.0);
}

TEST_CASE("train honors max_epochs = 1") {
  const EncodedDataset data = synth_encoded(30, 8, 0.0);
  const SplitIndices indices = split(data.rows(), {0.70, 0.15, 0.15}, 1);
  TrainConfig config;
  config.max_epochs = 1;
  const TrainResult result = train(init(9, 4, 3, 2), data, indices, config);
  CHECK(result.history.size() == 1);
  CHECK(result.stop_epoch == 1);
  CHECK(result.best_epoch == 1);
  CHECK(result.stop_reason == StopReason::max_epochs);
}

TEST_CASE("train stops on target_mse when enabled") {
  const EncodedDataset data = synth_encoded(30, 8, 0.0);
  const SplitIndices indices = split(data.rows(), {0.70, 0.15, 0.15}, 1);
  TrainConfig config;
  config.target_mse = 10.0;  // above any reachable loss, triggers at epoch 1
  const TrainResult result = train(init(9, 4, 3, 2), data, indices, config);
  CHECK(result.stop_epoch == 1);
  CHECK(result.stop_reason == StopReason::target_mse);
}

TEST_CASE("returned model reproduces the best validation MSE") {
  const EncodedDataset data = synth_encoded(80, 12, 0.10);
  const SplitIndices indices = split(data.rows(), {0.70, 0.15, 0.15}, 3);
  TrainConfig config;
  config.max_epochs = 300;
  config.learning_rate = 0.3;
  const TrainResult result = train(init(9, 10, 3, 5), data, indices, config);

  const EvalStats stats = evaluate(result.model, data, indices.validation);
  const double recorded =
      result.history[static_cast<std::size_t>(result.best_epoch - 1)].validation_mse;
  CHECK(std::abs(stats.mse - recorded) <= 1e-12 * std::max(recorded, 1e-300));

  // Best epoch holds the minimum of the whole history.
  for (const auto& record : result.history) {
    CHECK(recorded <= record.validation_mse);
  }
}

TEST_CASE("whenever validation_fail fires, stop - best == max_fail") {
  Rng rng(777);
  int fired = 0;
  for (int run = 0; run < 30; ++run) {
    const EncodedDataset data = synth_encoded(40 + bounded_uint(rng, 30), rng(), 0.2);
    const SplitIndices indices = split(data.rows(), {0.6, 0.2, 0.2}, rng());
    TrainConfig config;
    config.max_fail = 1 + static_cast<int>(bounded_uint(rng, 7));
    config.max_epochs = 150;
    config.learning_rate = uniform_real(rng, 0.05, 1.0);
    const TrainResult result = train(init(9, 5, 3, rng()), data, indices, config);
    REQUIRE(result.history.size() == static_cast<std::size_t>(result.stop_epoch));
    if (result.stop_reason == StopReason::validation_fail) {
      ++fired;
      REQUIRE(result.stop_epoch - result.best_epoch == config.max_fail);
    }
  }
  CHECK(fired > 0);
}

TEST_CASE("train MSE is non-increasing early on a tiny problem") {
  EncodedDataset data;
  data.class_count = 1;
  data.inputs = Eigen::MatrixXd::Constant(3, 1, 0.5);
  data.targets = Eigen::MatrixXd::Constant(3, 1, 0.8);
  const SplitIndices indices = contiguous_split(1, 1, 1);
  TrainConfig config;
  config.learning_rate = 1e-3;
  config.max_epochs = 50;
  config.max_fail = 50;
  const TrainResult result = train(init(1, 1, 1, 9), data, indices, config);
  REQUIRE(result.history.size() == 50);
  for (std::size_t e = 1; e < result.history.size(); ++e) {
    CHECK(result.history[e].train_mse <= result.history[e - 1].train_mse);
  }
}

TEST_CASE("train is deterministic") {
  const EncodedDataset data = synth_encoded(60, 2, 0.05);
  const SplitIndices indices = split(data.rows(), {0.70, 0.15, 0.15}, 7);
  TrainConfig config;
  config.max_epochs = 120;
  const Mlp initial = init(9, 10, 3, 11);
  const TrainResult a = train(initial, data, indices, config);
  const TrainResult b = train(initial, data, indices, config);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t e = 0; e < a.history.size(); ++e) {
    CHECK(a.history[e].train_mse == b.history[e].train_mse);
    CHECK(a.history[e].validation_mse == b.history[e].validation_mse);
    CHECK(a.history[e].test_mse == b.history[e].test_mse);
  }
  CHECK(a.model.w_hidden == b.model.w_hidden);
  CHECK(a.model.w_out == b.model.w_out);
  CHECK(a.best_epoch == b.best_epoch);
  CHECK(a.stop_reason == b.stop_reason);
}

TEST_CASE("history is complete and consecutively numbered") {
  const EncodedDataset data = synth_encoded(50, 4, 0.1);
  const SplitIndices indices = split(data.rows(), {0.70, 0.15, 0.15}, 2);
  TrainConfig config;
  config.max_epochs = 80;
  const TrainResult result = train(init(9, 6, 3, 3), data, indices, config);
  REQUIRE(result.history.size() == static_cast<std::size_t>(result.stop_epoch));
  for (std::size_t e = 0; e < result.history.size(); ++e) {
    CHECK(result.history[e].epoch == static_cast<int>(e) + 1);
  }
  CHECK(result.best_epoch <= result.stop_epoch);
}

TEST_CASE("train rejects empty subsets and non-finite data") {
  const EncodedDataset data = synth_encoded(20, 5, 0.0);
  TrainConfig config;
  SUBCASE("empty training subset") {
    SplitIndices indices = contiguous_split(0, 2, 2);
    CHECK_THROWS_AS(train(init(9, 3, 3, 1), data, indices, config), UsageError);
  }
  SUBCASE("empty validation subset") {
    SplitIndices indices = contiguous_split(5, 0, 2);
    CHECK_THROWS_AS(train(init(9, 3, 3, 1), data, indices, config), UsageError);
  }
  SUBCASE("out-of-range index") {
    SplitIndices indices = contiguous_split(5, 2, 2);
    indices.test.push_back(1000);
    CHECK_THROWS_AS(train(init(9, 3, 3, 1), data, indices, config), UsageError);
  }
  SUBCASE("non-finite loss carries the epoch number") {
    EncodedDataset poisoned = data;
    poisoned.inputs(0, 0) = std::numeric_limits<double>::quiet_NaN();
    const SplitIndices indices = contiguous_split(10, 5, 5);
    try {
      train(init(9, 3, 3, 1), poisoned, indices, config);
      FAIL("expected NumericError");
    } catch (const NumericError& e) {
      CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
    }
  }
}

TEST_CASE("train validates the config") {
  const EncodedDataset data = synth_encoded(20, 5, 0.0);
  const SplitIndices indices = contiguous_split(10, 5, 5);
  TrainConfig config;
  config.learning_rate = 0.0;
  CHECK_THROWS_AS(train(init(9, 3, 3, 1), data, indices, config), UsageError);
}

TEST_CASE("evaluate scores a perfect classifier at exactly 1.0") {
  const EncodedDataset data = mirrored_dataset(30, 3);
  const Mlp net = saturating_diagonal_net(3, 5.0);
  std::vector<Eigen::Index> all;
  for (Eigen::Index i = 0; i < data.rows(); ++i) all.push_back(i);
  const EvalStats stats = evaluate(net, data, all);
  CHECK(stats.accuracy == 1.0);
  // Off-class units sit near -1 against 0 targets, so the MSE stays near 2/3.
  CHECK(stats.mse < 1.0);
}

TEST_CASE("evaluate reports 91 of 100 as 0.91") {
  EncodedDataset data = mirrored_dataset(100, 3);
  // Relabel 9 rows so the saturating net misses exactly those.
  for (Eigen::Index i = 0; i < 9; ++i) {
    const Eigen::Index c = i % 3;
    data.targets.row(i).setZero();
    data.targets(i, (c + 1) % 3) = 1.0;
  }
  std::vector<Eigen::Index> all;
  for (Eigen::Index i = 0; i < data.rows(); ++i) all.push_back(i);
  const EvalStats stats = evaluate(saturating_diagonal_net(3, 5.0), data, all);
  CHECK(stats.accuracy == 0.91);
}

TEST_CASE("evaluate on a singleton is 0 or 1") {
  const EncodedDataset data = mirrored_dataset(10, 3);
  const EvalStats stats = evaluate(saturating_diagonal_net(3, 5.0), data, {0});
  CHECK((stats.accuracy == 0.0 || stats.accuracy == 1.0));
  CHECK_THROWS_AS(evaluate(saturating_diagonal_net(3, 5.0), data, {}), UsageError);
}
