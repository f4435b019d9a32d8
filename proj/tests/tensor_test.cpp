#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <ostream>
#include <vector>

#include "slotfill/rng.hpp"
#include "slotfill/tape.hpp"
#include "slotfill/tensor.hpp"

namespace slotfill {
namespace {

using Inputs = std::vector<Tensor<double>>;
using Builder = std::function<Var<double>(Tape<double>&, std::vector<Var<double>>&)>;

Tensor<double> random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor<double> t(shape, true);
  for (double& x : t.data()) x = rng.uniform(lo, hi);
  return t;
}

double evaluate(Inputs& inputs, const Builder& build) {
  Tape<double> tape(false);
  std::vector<Var<double>> vars;
  for (const auto& t : inputs) vars.push_back(tape.param(t));
  return build(tape, vars).item();
}

// Max relative error between tape gradients and central differences.
double fd_error(Inputs& inputs, const Builder& build) {
  for (auto& t : inputs) t.zero_grad();
  {
    Tape<double> tape;
    std::vector<Var<double>> vars;
    for (auto& t : inputs) vars.push_back(tape.param(t));
    tape.backward(build(tape, vars));
  }
  double worst = 0.0;
  const double h = 1e-6;
  for (auto& t : inputs) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double saved = t[i];
      t[i] = saved + h;
      const double up = evaluate(inputs, build);
      t[i] = saved - h;
      const double down = evaluate(inputs, build);
      t[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double a = t.grad()[i];
      worst = std::max(worst, std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)}));
    }
  }
  return worst;
}

// Weighted sum so every output element gets a distinct upstream gradient.
Var<double> weighted(Tape<double>& tape, Var<double> x) {
  std::vector<double> w(x.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.3 + 0.7 * static_cast<double>(i);
  return tape.sum(tape.mul(x, tape.constant(x.shape(), w)));
}

TEST(TensorTest, ShapeValidation) {
  EXPECT_THROW(Tensor<double>(Shape{0, 3}), DimensionError);
  EXPECT_THROW(Tensor<double>(Shape{2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
  Tensor<double> s(Shape{});
  EXPECT_EQ(s.size(), 1u);
  EXPECT_EQ(shape_str({3, 4}), "[3x4]");
}

TEST(TensorTest, GradBufferFollowsRequiresGrad) {
  Tensor<float> t(Shape{2, 3});
  EXPECT_FALSE(t.has_grad());
  t.set_requires_grad(true);
  ASSERT_TRUE(t.has_grad());
  EXPECT_EQ(t.grad().size(), 6u);
}

TEST(TapeTest, MatmulValues) {
  Tape<double> tape;
  auto a = tape.constant({2, 3}, {1, 2, 3, 4, 5, 6});
  auto b = tape.constant({3, 2}, {7, 8, 9, 10, 11, 12});
  auto c = tape.matmul(a, b);
  ASSERT_EQ(c.shape(), (Shape{2, 2}));
  const std::vector<double> expect{58, 64, 139, 154};
  EXPECT_EQ(std::vector<double>(c.value().begin(), c.value().end()), expect);
}

TEST(TapeTest, SelfAdditionAccumulatesGradient) {
  Tensor<double> x(Shape{}, std::vector<double>{3.0}, true);
  Tape<double> tape;
  auto v = tape.param(x);
  tape.backward(v + v);
  EXPECT_EQ(x.grad()[0], 2.0);
}

TEST(TapeTest, GradientsAccumulateAcrossBackwardCalls) {
  Tensor<double> x(Shape{}, std::vector<double>{3.0}, true);
  for (int i = 0; i < 2; ++i) {
    Tape<double> tape;
    auto v = tape.param(x);
    tape.backward(v * v);
  }
  EXPECT_EQ(x.grad()[0], 12.0);
}

TEST(TapeTest, SoftmaxLargeLogitsMatchLongDoubleReference) {
  Tape<double> tape;
  auto p = tape.softmax(tape.constant({2}, {1000.0, 1000.5}));
  const long double e = std::exp(0.5L);
  const long double p0 = 1.0L / (1.0L + e);
  EXPECT_NEAR(p.value()[0], static_cast<double>(p0), 1e-15);
  EXPECT_NEAR(p.value()[1], static_cast<double>(1.0L - p0), 1e-15);
}

TEST(TapeTest, MaskedSoftmaxLeadingEntryIsExactlyZero) {
  Tensor<double> x(Shape{4}, std::vector<double>{5.0, 0.1, -0.2, 0.3}, true);
  Tape<double> tape;
  auto p = tape.softmax(tape.param(x), 1);
  EXPECT_EQ(p.value()[0], 0.0);
  EXPECT_NEAR(p.value()[1] + p.value()[2] + p.value()[3], 1.0, 1e-15);
  tape.backward(tape.log(tape.pick(p, 2)));
  EXPECT_EQ(x.grad()[0], 0.0);
}

TEST(TapeTest, SigmoidIsStableAtExtremes) {
  Tape<double> tape;
  auto s = tape.sigmoid(tape.constant({2}, {-1000.0, 1000.0}));
  EXPECT_EQ(s.value()[0], 0.0);
  EXPECT_EQ(s.value()[1], 1.0);
}

TEST(TapeTest, ClampMinBlocksGradientBelowFloor) {
  Tensor<double> x(Shape{2}, std::vector<double>{1e-40, 0.5}, true);
  Tape<double> tape;
  auto c = tape.clamp_min(tape.param(x), 1e-30);
  EXPECT_EQ(c.value()[0], 1e-30);
  tape.backward(tape.sum(c));
  EXPECT_EQ(x.grad()[0], 0.0);
  EXPECT_EQ(x.grad()[1], 1.0);
}

TEST(TapeTest, ErrorsAreTyped) {
  Tape<double> tape;
  auto a = tape.constant({2, 3}, std::vector<double>(6, 1.0));
  auto b = tape.constant({2, 3}, std::vector<double>(6, 1.0));
  EXPECT_THROW(tape.matmul(a, b), DimensionError);
  EXPECT_THROW(tape.add(a, tape.constant({3}, {1, 2, 3})), DimensionError);
  EXPECT_THROW(tape.backward(a), ContractError);
  EXPECT_THROW(tape.softmax(tape.constant({2}, {INFINITY, 0.0})), NumericError);
  EXPECT_THROW(tape.backward(tape.log(tape.scalar(-1.0))), NumericError);
  EXPECT_THROW(tape.row(a, 2), ContractError);

  Tape<double> other;
  EXPECT_THROW(other.add(a, a), ContractError);
  Tape<double> frozen(false);
  EXPECT_THROW(frozen.backward(frozen.scalar(1.0)), ContractError);
}

TEST(TapeTest, ScalarBroadcast) {
  Tape<double> tape;
  auto v = tape.constant({3}, {1, 2, 3});
  auto r = tape.mul(tape.scalar(2.0), v);
  EXPECT_EQ(r.shape(), (Shape{3}));
  EXPECT_EQ(r.value()[2], 6.0);
}

struct OpCase {
  const char* name;
  std::vector<Shape> shapes;
  Builder build;
  double lo = -1.0;
  double hi = 1.0;
};

// keeps discovered ctest names readable
void PrintTo(const OpCase& c, std::ostream* os) { *os << c.name; }

class OpGradientTest : public ::testing::TestWithParam<OpCase> {};

TEST_P(OpGradientTest, MatchesCentralDifferences) {
  const OpCase& c = GetParam();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng = Rng(seed).stream(c.name);
    Inputs inputs;
    for (const Shape& s : c.shapes) inputs.push_back(random_tensor(s, rng, c.lo, c.hi));
    EXPECT_LT(fd_error(inputs, c.build), 1e-7) << c.name << " seed " << seed;
  }
}

using V = std::vector<Var<double>>;

INSTANTIATE_TEST_SUITE_P(
    Ops, OpGradientTest,
    ::testing::Values(
        OpCase{"matmul", {{2, 3}, {3, 4}}, [](Tape<double>& t, V& v) { return weighted(t, t.matmul(v[0], v[1])); }},
        OpCase{"matvec", {{3, 4}, {4}}, [](Tape<double>& t, V& v) { return weighted(t, t.matvec(v[0], v[1])); }},
        OpCase{"dot", {{5}, {5}}, [](Tape<double>& t, V& v) { return t.dot(v[0], v[1]); }},
        OpCase{"add", {{4}, {4}}, [](Tape<double>& t, V& v) { return weighted(t, t.add(v[0], v[1])); }},
        OpCase{"sub_scalar", {{}, {4}}, [](Tape<double>& t, V& v) { return weighted(t, t.sub(v[1], v[0])); }},
        OpCase{"mul", {{4}, {4}}, [](Tape<double>& t, V& v) { return weighted(t, t.mul(v[0], v[1])); }},
        OpCase{"mul_scalar", {{4}, {}}, [](Tape<double>& t, V& v) { return weighted(t, t.mul(v[0], v[1])); }},
        OpCase{"neg", {{3}}, [](Tape<double>& t, V& v) { return weighted(t, t.neg(v[0])); }},
        OpCase{"sigmoid", {{5}}, [](Tape<double>& t, V& v) { return weighted(t, t.sigmoid(v[0])); }, -4.0, 4.0},
        OpCase{"tanh", {{5}}, [](Tape<double>& t, V& v) { return weighted(t, t.tanh(v[0])); }, -3.0, 3.0},
        OpCase{"exp", {{5}}, [](Tape<double>& t, V& v) { return weighted(t, t.exp(v[0])); }},
        OpCase{"log", {{5}}, [](Tape<double>& t, V& v) { return weighted(t, t.log(v[0])); }, 0.5, 2.0},
        OpCase{"clamp_min", {{5}}, [](Tape<double>& t, V& v) { return weighted(t, t.clamp_min(v[0], 0.0)); }, 0.1, 1.0},
        OpCase{"softmax", {{5}}, [](Tape<double>& t, V& v) { return weighted(t, t.softmax(v[0])); }, -2.0, 2.0},
        OpCase{"softmax_masked", {{5}}, [](Tape<double>& t, V& v) { return weighted(t, t.softmax(v[0], 1)); }, -2.0, 2.0},
        OpCase{"concat", {{2}, {3}}, [](Tape<double>& t, V& v) { return weighted(t, t.concat(v[0], v[1])); }},
        OpCase{"stack", {{3}, {3}}, [](Tape<double>& t, V& v) { return weighted(t, t.stack(v)); }},
        OpCase{"reshape_row", {{2, 3}}, [](Tape<double>& t, V& v) { return weighted(t, t.row(t.reshape(v[0], {3, 2}), 1)); }},
        OpCase{"pick", {{4}}, [](Tape<double>& t, V& v) { return t.mul(t.pick(v[0], 2), t.pick(v[0], 2)); }},
        OpCase{"composite", {{3, 3}, {3}},
               [](Tape<double>& t, V& v) {
                 auto h = t.tanh(t.matvec(v[0], v[1]));
                 return t.log(t.pick(t.softmax(t.add(h, t.sigmoid(v[1]))), 0));
               }}),
    [](const ::testing::TestParamInfo<OpCase>& info) { return std::string(info.param.name); });

TEST(RngTest, StreamsAreDeterministicAndIndependent) {
  Rng a(42), b(42);
  EXPECT_EQ(a.stream("init").next_u64(), b.stream("init").next_u64());
  EXPECT_NE(a.stream("init").next_u64(), a.stream("dropout").next_u64());
  EXPECT_NE(a.stream("shuffle", 0).next_u64(), a.stream("shuffle", 1).next_u64());
}

TEST(RngTest, ShuffleIsReproducible) {
  std::vector<int> x(20), y(20);
  for (int i = 0; i < 20; ++i) x[i] = y[i] = i;
  Rng a(7), b(7);
  a.shuffle(x);
  b.shuffle(y);
  EXPECT_EQ(x, y);
  std::vector<int> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 20; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(RngTest, BelowStaysInRange) {
  Rng r(1);
  for (int i = 0; i < 10000; ++i) EXPECT_LT(r.below(7), 7u);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform(-0.2, 0.2);
    EXPECT_GT(u, -0.2);
    EXPECT_LT(u, 0.2);
  }
}

}  // namespace
}  // namespace slotfill
