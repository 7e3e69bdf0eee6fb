#include "crossfuse/ops.h"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "crossfuse/errors.h"
#include "crossfuse/gradcheck.h"

namespace crossfuse {
namespace {

Parameter RandomParam(const std::string& name, Shape shape, Rng& rng) {
  Parameter p(name, std::move(shape));
  for (double& v : p.value.values()) v = rng.Normal();
  return p;
}

TEST(OpsTest, DenseComputesWTransposeXPlusB) {
  Parameter w("w", {2, 3});
  Parameter b("b", {3});
  w.value = Tensor::Matrix({{1, 2, 3}, {4, 5, 6}});
  b.value = Tensor::Vector({0.5, -1, 0});
  const Tensor y = Dense(Tensor::Vector({1, -1}), w, b);
  EXPECT_EQ(y, Tensor::Vector({-2.5, -4, -3}));
  EXPECT_THROW(Dense(Tensor::Vector({1, 2, 3}), w, b), DimensionError);
}

TEST(OpsTest, ReluSubgradientAtZeroIsZero) {
  const Tensor x = Tensor::Vector({-1, 0, 2});
  EXPECT_EQ(Relu(x), Tensor::Vector({0, 0, 2}));
  EXPECT_EQ(ReluBackward(x, Tensor::Vector({5, 5, 5})),
            Tensor::Vector({0, 0, 5}));
}

TEST(OpsTest, ReluPropagatesNan) {
  const Tensor y = Relu(Tensor::Vector({std::nan(""), -1.0}));
  EXPECT_TRUE(std::isnan(y[0]));
  EXPECT_EQ(y[1], 0.0);
}

TEST(OpsTest, SigmoidIsStableAtExtremes) {
  const Tensor y = Sigmoid(Tensor::Vector({-1000, 0, 1000}));
  EXPECT_EQ(y[0], 0.0);
  EXPECT_EQ(y[1], 0.5);
  EXPECT_EQ(y[2], 1.0);
  EXPECT_TRUE(y.AllFinite());
}

TEST(OpsTest, SoftmaxCrossEntropyValues) {
  // log(e + e^2 + e^3) - 1 and the softmax of (1, 2, 3), from numpy.
  const LossAndGrad lg = SoftmaxCrossEntropy(Tensor::Vector({1, 2, 3}), 0);
  EXPECT_NEAR(lg.loss, 2.40760596444438, 1e-14);
  const double p[] = {0.09003057317038046, 0.24472847105479767,
                      0.6652409557748219};
  EXPECT_NEAR(lg.grad[0], p[0] - 1.0, 1e-15);
  EXPECT_NEAR(lg.grad[1], p[1], 1e-15);
  EXPECT_NEAR(lg.grad[2], p[2], 1e-15);
  const Tensor s = Softmax(Tensor::Vector({1, 2, 3}));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(s[i], p[i], 1e-15);
}

TEST(OpsTest, SoftmaxCrossEntropyShiftInvariantAndFinite) {
  const LossAndGrad a = SoftmaxCrossEntropy(Tensor::Vector({1, 2, 3}), 2);
  const LossAndGrad b = SoftmaxCrossEntropy(Tensor::Vector({1001, 1002, 1003}), 2);
  EXPECT_NEAR(a.loss, b.loss, 1e-12);
  const LossAndGrad c = SoftmaxCrossEntropy(Tensor::Vector({-1e4, 1e4}), 0);
  EXPECT_TRUE(std::isfinite(c.loss));
  EXPECT_NEAR(c.loss, 2e4, 1e-6);
  EXPECT_THROW(SoftmaxCrossEntropy(Tensor::Vector({1, 2}), 2), IndexError);
  EXPECT_THROW(SoftmaxCrossEntropy(Tensor::Vector({1, 2}), -1), IndexError);
}

TEST(OpsTest, CrossEntropyGradientSumsToZero) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor logits({6});
    for (double& v : logits.values()) v = 5 * rng.Normal();
    const LossAndGrad lg = SoftmaxCrossEntropy(logits, trial % 6);
    double s = 0;
    for (double g : lg.grad.values()) s += g;
    EXPECT_NEAR(s, 0.0, 1e-12);
  }
}

TEST(OpsTest, DropoutEvaluationIsIdentity) {
  Rng rng(0);
  const Tensor x = Tensor::Vector({1, 2, 3});
  const DropoutResult r = Dropout(x, 0.5, rng, false);
  EXPECT_EQ(r.output, x);
  EXPECT_EQ(r.mask, Tensor({3}, 1.0));
}

TEST(OpsTest, DropoutMaskValuesAndExpectation) {
  Rng rng(3);
  const std::size_t n = 100000;
  const double rate = 0.3;
  const DropoutResult r = Dropout(Tensor({n}, 1.0), rate, rng, true);
  double sum = 0;
  for (double m : r.mask.values()) {
    ASSERT_TRUE(m == 0.0 || m == 1.0 / (1.0 - rate));
    sum += m;
  }
  EXPECT_NEAR(sum / n, 1.0, 0.01);
  EXPECT_EQ(r.output, r.mask);
  EXPECT_EQ(DropoutBackward(r.mask, Tensor({n}, 2.0))[0], 2.0 * r.mask[0]);
}

TEST(OpsTest, DropoutRejectsBadRate) {
  Rng rng(0);
  EXPECT_THROW(Dropout(Tensor({2}), 1.0, rng, true), ParameterError);
  EXPECT_THROW(Dropout(Tensor({2}), -0.1, rng, true), ParameterError);
  EXPECT_NO_THROW(Dropout(Tensor({2}), 0.0, rng, true));
}

TEST(OpsTest, ConcatSplitRoundTrip) {
  const Tensor a = Tensor::Vector({1, 2});
  const Tensor b = Tensor::Vector({3, 4, 5});
  const Tensor c = Concat(a, b);
  EXPECT_EQ(c, Tensor::Vector({1, 2, 3, 4, 5}));
  auto [x, y] = Split(c, 2);
  EXPECT_EQ(x, a);
  EXPECT_EQ(y, b);
  EXPECT_EQ(Hadamard(a, a), Tensor::Vector({1, 4}));
  EXPECT_EQ(Add(a, a), Tensor::Vector({2, 4}));
  EXPECT_THROW(Add(a, b), DimensionError);
}

TEST(OpsTest, SgdStepUpdatesAndZeroes) {
  Parameter p("p", {2});
  p.value = Tensor::Vector({1, 1});
  p.grad = Tensor::Vector({0.5, -2});
  std::vector<Parameter*> ps = {&p};
  SgdStep(ps, 0.1);
  EXPECT_DOUBLE_EQ(p.value[0], 0.95);
  EXPECT_DOUBLE_EQ(p.value[1], 1.2);
  EXPECT_EQ(p.grad, Tensor({2}, 0.0));
}

TEST(OpsTest, GlorotBound) {
  Rng rng(0);
  Parameter w("w", {30, 70});
  GlorotUniform(w, rng);
  const double a = std::sqrt(6.0 / 100.0);
  double mx = 0;
  for (double v : w.value.values()) mx = std::max(mx, std::abs(v));
  EXPECT_LE(mx, a);
  EXPECT_GT(mx, 0.9 * a);
}

TEST(OpsTest, InitParametersIsNameKeyed) {
  Parameter a1("layer.weight", {4, 3}), b1("layer.bias", {3});
  Parameter other("other.weight", {5, 5});
  Parameter a2("layer.weight", {4, 3}), b2("layer.bias", {3});
  std::vector<Parameter*> first = {&a1, &b1};
  std::vector<Parameter*> second = {&other, &b2, &a2};  // different order
  InitParameters(first, 11);
  InitParameters(second, 11);
  EXPECT_EQ(a1.value, a2.value);
  EXPECT_EQ(b1.value, Tensor({3}, 0.0));
  Parameter a3("layer.weight", {4, 3});
  std::vector<Parameter*> third = {&a3};
  InitParameters(third, 12);
  EXPECT_NE(a1.value, a3.value);
}

// Each op's backward against central differences.
TEST(OpsTest, DenseReluSigmoidGradients) {
  Rng rng(5);
  Parameter x = RandomParam("x", {4}, rng);
  Parameter w = RandomParam("w", {4, 3}, rng);
  Parameter b = RandomParam("b", {3}, rng);
  Parameter v = RandomParam("v", {3}, rng);
  std::vector<Parameter*> params = {&x, &w, &b, &v};
  auto loss = [&] {
    const Tensor h = Sigmoid(Relu(Dense(x.value, w, b)));
    double s = 0;
    for (std::size_t i = 0; i < h.size(); ++i) s += v.value[i] * h[i];
    return s;
  };
  const Tensor pre = Dense(x.value, w, b);
  const Tensor h = Sigmoid(Relu(pre));
  Tensor dh({3});
  for (std::size_t i = 0; i < 3; ++i) {
    dh[i] = v.value[i];
    v.grad[i] = h[i];
  }
  const Tensor dx = DenseBackward(x.value, w, b,
                                  ReluBackward(pre, SigmoidBackward(h, dh)));
  x.grad = dx;
  const auto numeric = FiniteDiffGrad(loss, params, 1e-5);
  EXPECT_TRUE(CompareGradients(params, numeric).Passed(1e-6));
}

TEST(OpsTest, CrossEntropyGradient) {
  Rng rng(6);
  Parameter z = RandomParam("z", {5}, rng);
  std::vector<Parameter*> params = {&z};
  z.grad = SoftmaxCrossEntropy(z.value, 3).grad;
  const auto numeric = FiniteDiffGrad(
      [&] { return SoftmaxCrossEntropy(z.value, 3).loss; }, params, 1e-5);
  EXPECT_TRUE(CompareGradients(params, numeric).Passed(1e-7));
}

}  // namespace
}  // namespace crossfuse
