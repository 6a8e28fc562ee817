#include "poster/net.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "poster/storage.hpp"
#include "test_util.hpp"

namespace poster {
namespace {

using test::random_batch;
using test::random_model;
using test::random_targets;

std::vector<double> row(const Eigen::MatrixXd& m, Eigen::Index r) {
  std::vector<double> v(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) v[static_cast<std::size_t>(c)] = m(r, c);
  return v;
}

// Two Gaussian blobs in 2-D, separated by the line x0 + x1 = 0.
void separable_toy(std::mt19937_64& rng, std::size_t n, Eigen::MatrixXd& x, Eigen::VectorXd& y) {
  std::normal_distribution<double> noise(0.0, 0.5);
  x.resize(static_cast<Eigen::Index>(n), 2);
  y.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double s = i % 2 ? 1.0 : -1.0;
    y(i) = i % 2;
    x(i, 0) = 2.0 * s + noise(rng);
    x(i, 1) = 2.0 * s + noise(rng);
  }
}

TEST(ForwardTest, ZeroNetworkGivesHalf) {
  const std::vector<std::size_t> dims = {7, 4, 3, 1};
  const auto model = MLPClassifier::zeros(dims);
  std::mt19937_64 rng(1);
  const auto x = row(random_batch(1, 7, rng), 0);
  EXPECT_EQ(model.forward(x), 0.0);
  EXPECT_EQ(sigmoid(model.forward(x)), 0.5);
}

TEST(ForwardTest, SingleLayerUnitVector) {
  std::mt19937_64 rng(2);
  const auto model = random_model(6, {}, rng);
  for (std::size_t i = 0; i < 6; ++i) {
    std::vector<double> e(6, 0.0);
    e[i] = 1.0;
    EXPECT_DOUBLE_EQ(model.forward(e),
                     model.layers()[0].weights(0, static_cast<Eigen::Index>(i)) + model.layers()[0].bias(0));
  }
}

TEST(ForwardTest, MatchesStraightLineOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t in = 5 + rng() % 40;
    const auto model = random_model(in, {3 + rng() % 10, 2 + rng() % 6}, rng);
    const auto batch = random_batch(8, in, rng);
    const Eigen::VectorXd logits = model.forward(batch);
    for (Eigen::Index r = 0; r < batch.rows(); ++r) {
      const auto x = row(batch, r);
      EXPECT_NEAR(logits(r), test::reference_logit(model, x), 1e-12);
      EXPECT_NEAR(model.forward(x), test::reference_logit(model, x), 1e-12);
    }
  }
}

TEST(ForwardTest, DimensionMismatch) {
  const std::vector<std::size_t> dims = {3, 1};
  const auto model = MLPClassifier::zeros(dims);
  EXPECT_THROW(model.forward(std::vector<double>{1, 2}), DimensionMismatch);
  EXPECT_THROW(model.forward(Eigen::MatrixXd::Zero(2, 4)), DimensionMismatch);
}

TEST(ModelTest, ShapeValidation) {
  std::vector<DenseLayer> bad = {{Eigen::MatrixXd::Zero(4, 3), Eigen::VectorXd::Zero(4)},
                                 {Eigen::MatrixXd::Zero(1, 5), Eigen::VectorXd::Zero(1)}};
  EXPECT_THROW(MLPClassifier{bad}, DimensionMismatch);
  std::vector<DenseLayer> two_out = {{Eigen::MatrixXd::Zero(2, 3), Eigen::VectorXd::Zero(2)}};
  EXPECT_THROW(MLPClassifier{two_out}, DimensionMismatch);
  EXPECT_THROW(default_hidden(2), InvalidArgument);
  EXPECT_EQ(default_hidden(3), (std::vector<std::size_t>{512, 64}));
}

TEST(ModelTest, GlorotBoundsAndDeterminism) {
  const std::vector<std::size_t> hidden = {16, 8};
  const auto a = MLPClassifier::glorot(40, hidden, 99);
  const auto b = MLPClassifier::glorot(40, hidden, 99);
  const auto c = MLPClassifier::glorot(40, hidden, 100);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == c);
  EXPECT_EQ(a.dims(), (std::vector<std::size_t>{40, 16, 8, 1}));
  for (const auto& l : a.layers()) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.in_dim() + l.out_dim()));
    EXPECT_LE(l.weights.cwiseAbs().maxCoeff(), limit);
    EXPECT_EQ(l.bias.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(SigmoidTest, Values) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_TRUE(std::isfinite(sigmoid(-500.0)));
  EXPECT_GT(sigmoid(-500.0), 0.0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> z(-40, 40);
  for (int i = 0; i < 1000; ++i) {
    const double v = z(rng);
    EXPECT_NEAR(sigmoid(v) + sigmoid(-v), 1.0, 1e-15);
  }
}

TEST(BceTest, AnalyticValues) {
  EXPECT_NEAR(bce_loss(0.5, 1), std::log(2.0), 1e-15);
  EXPECT_NEAR(bce_with_logit(0.0, 1), 0.6931471805599453, 1e-15);
  EXPECT_NEAR(bce_with_logit(0.0, 0), std::log(2.0), 1e-15);
  EXPECT_TRUE(std::isfinite(bce_loss(0.0, 1)));
  EXPECT_TRUE(std::isfinite(bce_loss(1.0, 0)));
}

TEST(BceTest, LogitGradientIsPMinusY) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> zd(-20, 20);
  for (int i = 0; i < 500; ++i) {
    const double z = zd(rng);
    const double y = static_cast<double>(rng() % 2);
    const double h = 1e-6;
    const double fd = (bce_with_logit(z + h, y) - bce_with_logit(z - h, y)) / (2 * h);
    EXPECT_NEAR(fd, sigmoid(z) - y, 1e-8);
    // Single-sample backward on a 1x1 identity model gives dL/dz directly.
    std::vector<DenseLayer> layers = {{Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1)}};
    const MLPClassifier id{layers};
    const auto g = backward(id, Eigen::MatrixXd::Constant(1, 1, z), Eigen::VectorXd::Constant(1, y));
    EXPECT_DOUBLE_EQ(g.gradients.layers[0].bias(0), sigmoid(z) - y);
  }
}

TEST(BceTest, FiniteAndMonotoneAtExtremeLogits) {
  double prev = -1.0;
  for (double z = 800.0; z >= -800.0; z -= 10.0) {
    const double l = bce_with_logit(z, 1.0);
    EXPECT_TRUE(std::isfinite(l));
    EXPECT_GE(l, 0.0);
    EXPECT_GE(l, prev);  // non-decreasing; underflows to 0 for large positive logits
    prev = l;
    const double h = 1e-4;
    const double fd = (bce_with_logit(z + h, 1.0) - bce_with_logit(z - h, 1.0)) / (2 * h);
    EXPECT_LE(fd, 1e-12);
  }
  EXPECT_NEAR(bce_with_logit(-800.0, 1.0), 800.0, 1e-9);
}

TEST(BackwardTest, MatchesFiniteDifferences) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t in = 3 + rng() % 20;
    std::vector<std::size_t> hidden;
    if (trial % 2) hidden = {2 + rng() % 8, 2 + rng() % 5};
    const auto model = random_model(in, hidden, rng);
    const std::size_t rows = 1 + rng() % 10;
    const auto res = test::finite_difference_check(model, random_batch(rows, in, rng),
                                                   random_targets(rows, rng));
    EXPECT_LT(res.max_relative_error, 1e-4) << "trial " << trial;
    EXPECT_EQ(res.parameters, model.parameter_count());
  }
}

TEST(BackwardTest, ConvergedNetworkHasNearZeroGradient) {
  std::vector<DenseLayer> layers = {{Eigen::MatrixXd::Constant(1, 2, 40.0), Eigen::VectorXd::Zero(1)}};
  const MLPClassifier model{layers};
  Eigen::MatrixXd x(2, 2);
  x << 1, 1, -1, -1;
  Eigen::VectorXd y(2);
  y << 1, 0;
  const auto g = backward(model, x, y);
  EXPECT_LT(g.loss, 1e-30);
  EXPECT_LT(g.gradients.layers[0].weights.cwiseAbs().maxCoeff(), 1e-30);
}

TEST(BackwardTest, DuplicatedBatchHasSameGradient) {
  std::mt19937_64 rng(7);
  const auto model = random_model(5, {4, 3}, rng);
  const auto x = random_batch(6, 5, rng);
  const auto y = random_targets(6, rng);
  Eigen::MatrixXd x2(12, 5);
  x2 << x, x;
  Eigen::VectorXd y2(12);
  y2 << y, y;
  const auto a = backward(model, x, y);
  const auto b = backward(model, x2, y2);
  EXPECT_NEAR(a.loss, b.loss, 1e-14);
  for (std::size_t l = 0; l < 3; ++l) {
    EXPECT_TRUE(a.gradients.layers[l].weights.isApprox(b.gradients.layers[l].weights, 1e-12));
    EXPECT_TRUE(a.gradients.layers[l].bias.isApprox(b.gradients.layers[l].bias, 1e-12));
  }
  EXPECT_THROW(backward(model, Eigen::MatrixXd(0, 5), Eigen::VectorXd(0)), InvalidArgument);
}

TEST(AdamTest, ZeroGradientIsFixedPoint) {
  std::vector<double> p = {1.0, -2.0, 3.0};
  const std::vector<double> g(3, 0.0);
  AdamState s;
  std::vector<std::span<double>> ps = {p};
  std::vector<std::span<const double>> gs = {g};
  adam_step(ps, gs, s);
  EXPECT_EQ(p, (std::vector<double>{1.0, -2.0, 3.0}));
  EXPECT_EQ(s.step_count, 1u);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  std::vector<double> p = {0.0, 0.0, 0.0};
  const std::vector<double> g = {2.0, -0.5, 1e3};
  AdamState s;
  s.hyper.learning_rate = 0.01;
  std::vector<std::span<double>> ps = {p};
  std::vector<std::span<const double>> gs = {g};
  adam_step(ps, gs, s);
  EXPECT_NEAR(p[0], -0.01, 1e-9);
  EXPECT_NEAR(p[1], 0.01, 1e-9);
  EXPECT_NEAR(p[2], -0.01, 1e-9);
}

TEST(AdamTest, ScalarQuadraticMatchesOracleAndConverges) {
  // Independent scalar Adam recurrence.
  double w_ref = 0.0, m = 0.0, v = 0.0;
  std::vector<double> w = {0.0};
  AdamState s;
  s.hyper.learning_rate = 0.1;
  for (int t = 1; t <= 500; ++t) {
    const double g_ref = 2.0 * (w_ref - 3.0);
    m = 0.9 * m + 0.1 * g_ref;
    v = 0.999 * v + 0.001 * g_ref * g_ref;
    w_ref -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);

    const std::vector<double> g = {2.0 * (w[0] - 3.0)};
    std::vector<std::span<double>> ps = {w};
    std::vector<std::span<const double>> gs = {g};
    adam_step(ps, gs, s);
    ASSERT_NEAR(w[0], w_ref, 1e-12) << "step " << t;
  }
  EXPECT_LT(std::abs(w[0] - 3.0), 1e-3);
}

TEST(AdamTest, ShapeMismatch) {
  std::vector<double> p = {0.0, 0.0};
  const std::vector<double> g = {1.0};
  AdamState s;
  std::vector<std::span<double>> ps = {p};
  std::vector<std::span<const double>> gs = {g};
  EXPECT_THROW(adam_step(ps, gs, s), DimensionMismatch);
}

TEST(TrainTest, SeparableToyReachesFullAccuracy) {
  std::mt19937_64 rng(8);
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  separable_toy(rng, 200, x, y);
  auto model = MLPClassifier::glorot(2, {}, 1);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.batch_size = 16;
  cfg.learning_rate = 0.05;
  cfg.seed = 2;
  const auto res = train(model, x, y, cfg);
  ASSERT_EQ(res.loss_history.size(), 50u);
  const auto pred = predict(model, x);
  for (Eigen::Index i = 0; i < y.size(); ++i) EXPECT_EQ(pred[static_cast<std::size_t>(i)], y(i));
  EXPECT_LT(res.loss_history.back(), res.loss_history.front());
}

TEST(TrainTest, ConstantTargetsCollapse) {
  std::mt19937_64 rng(9);
  const auto x = random_batch(64, 4, rng);
  const Eigen::VectorXd y = Eigen::VectorXd::Zero(64);
  auto model = MLPClassifier::glorot(4, {}, 3);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.batch_size = 16;
  cfg.learning_rate = 0.05;
  train(model, x, y, cfg);
  const Eigen::VectorXd logits = model.forward(x);
  for (Eigen::Index i = 0; i < logits.size(); ++i) EXPECT_LT(sigmoid(logits(i)), 0.01);
}

TEST(TrainTest, SameSeedIsBitIdentical) {
  std::mt19937_64 rng(10);
  const auto x = random_batch(100, 6, rng);
  const auto y = random_targets(100, rng);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 7;
  cfg.seed = 42;
  const std::vector<std::size_t> hidden = {8, 4};
  auto a = MLPClassifier::glorot(6, hidden, 5);
  auto b = MLPClassifier::glorot(6, hidden, 5);
  const auto ra = train(a, x, y, cfg);
  const auto rb = train(b, x, y, cfg);
  EXPECT_EQ(ra.loss_history, rb.loss_history);
  EXPECT_TRUE(a == b);
}

TEST(TrainTest, FullBatchDescentIsMonotoneAtSmallRate) {
  std::mt19937_64 rng(11);
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  separable_toy(rng, 64, x, y);
  auto model = random_model(2, {6, 4}, rng);
  double prev = mean_loss(model, x, y);
  for (int step = 0; step < 64; ++step) {
    const auto g = backward(model, x, y);
    for (std::size_t l = 0; l < model.depth(); ++l) {
      model.layers()[l].weights -= 1e-4 * g.gradients.layers[l].weights;
      model.layers()[l].bias -= 1e-4 * g.gradients.layers[l].bias;
    }
    const double now = mean_loss(model, x, y);
    EXPECT_LE(now, prev);
    prev = now;
  }
}

TEST(TrainTest, RejectsBadConfigAndDiverges) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(4, 2);
  Eigen::VectorXd y(4);
  y << 0, 1, 0, 1;
  auto model = MLPClassifier::glorot(2, {}, 1);
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(train(model, x, y, cfg), InvalidArgument);
  cfg.epochs = 1;
  cfg.learning_rate = 0;
  EXPECT_THROW(train(model, x, y, cfg), InvalidArgument);
  cfg.learning_rate = 1e-3;
  EXPECT_THROW(train(model, Eigen::MatrixXd(0, 2), Eigen::VectorXd(0), cfg), InvalidArgument);

  Eigen::MatrixXd huge = Eigen::MatrixXd::Constant(4, 2, std::numeric_limits<double>::infinity());
  EXPECT_THROW(train(model, huge, y, cfg), TrainingDiverged);
}

TEST(PredictTest, BoundaryConvention) {
  EXPECT_EQ(predict_logit(0.0), 1);
  EXPECT_EQ(predict_logit(-3.0), 0);
  EXPECT_EQ(predict_logit(-0.0), 1);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> z(-10, 10);
  for (int i = 0; i < 1000; ++i) {
    const double v = z(rng);
    EXPECT_EQ(predict_logit(v), sigmoid(v) >= 0.5 ? 1 : 0);
  }
}

TEST(CheckpointTest, RoundTripAndLayout) {
  std::mt19937_64 rng(13);
  const auto model = random_model(5, {4, 3}, rng);
  test::TempDir dir;
  save_checkpoint(model, dir / "m.bin");
  EXPECT_TRUE(load_checkpoint(dir / "m.bin") == model);

  const auto bytes = encode_checkpoint(model);
  EXPECT_EQ(bytes.substr(0, 8), std::string("PFNET1\0\0", 8));
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 3);  // layer count
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 4);  // layer 0 out_dim
  EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 5);  // layer 0 in_dim
  EXPECT_EQ(bytes.size(), 8 + 4 + 3 * 8 + 8 * model.parameter_count());
  // First parameter is weights(0,0), then weights(0,1) (row-major).
  EXPECT_EQ(std::bit_cast<double>(*reinterpret_cast<const std::uint64_t*>(bytes.data() + 36)),
            model.layers()[0].weights(0, 0));
  EXPECT_EQ(std::bit_cast<double>(*reinterpret_cast<const std::uint64_t*>(bytes.data() + 44)),
            model.layers()[0].weights(0, 1));
}

TEST(CheckpointTest, Corruption) {
  const auto model = MLPClassifier::glorot(3, {}, 1);
  auto bytes = encode_checkpoint(model);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 1)), TruncatedFileError);
  bytes[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bytes), BadMagicError);
}

}  // namespace
}  // namespace poster
