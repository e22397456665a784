#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "clir/neural/layers.hpp"
#include "support.hpp"

using namespace clir;
using namespace clir::nn;
using clir::testing::relative_error;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(r, c);
  for (auto& x : m.data) x = u(rng);
  return m;
}

void fill(std::vector<double>& v, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& x : v) x = u(rng);
}

// Scalar probe: weighted sum of outputs with fixed random weights.
double probe(const std::vector<double>& out, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * w[i];
  return s;
}

// Central difference of f with respect to x[i].
double numeric(std::vector<double>& x, std::size_t i, const std::function<double()>& f, double h = 1e-4) {
  const double saved = x[i];
  x[i] = saved + h;
  const double up = f();
  x[i] = saved - h;
  const double down = f();
  x[i] = saved;
  return (up - down) / (2.0 * h);
}

}  // namespace

TEST(Conv2d, IdentityKernelCopiesInput) {
  std::mt19937_64 rng(1);
  Matrix in = random_matrix(4, 6, rng);
  Tensor k({1, 3, 3}), b({1});
  k.value[4] = 1.0;
  auto out = conv2d_forward(in, k, b);
  ASSERT_EQ(out.channels, 1u);
  ASSERT_EQ(out.height, 4u);
  ASSERT_EQ(out.width, 6u);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 6; ++j) EXPECT_DOUBLE_EQ(out.at(0, i, j), in(i, j));
  }
}

TEST(Conv2d, OnesKernelInteriorIsNine) {
  Matrix in(3, 3, 1.0);
  Tensor k({1, 3, 3}, 1.0), b({1});
  auto out = conv2d_forward(in, k, b);
  EXPECT_DOUBLE_EQ(out.at(0, 1, 1), 9.0);
  EXPECT_DOUBLE_EQ(out.at(0, 0, 0), 4.0);
  EXPECT_DOUBLE_EQ(out.at(0, 0, 1), 6.0);
}

TEST(Conv2d, EmptyInputIsError) {
  Tensor k({1, 3, 3}), b({1});
  EXPECT_THROW(conv2d_forward(Matrix{}, k, b), Error);
}

TEST(Conv2d, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(2);
  Matrix in = random_matrix(5, 7, rng);
  Tensor k({3, 3, 3}), b({3});
  fill(k.value, rng);
  fill(b.value, rng);
  std::vector<double> w(3 * 5 * 7);
  fill(w, rng);
  auto f = [&] { return probe(conv2d_forward(in, k, b).data, w); };
  FeatureMap g(3, 5, 7);
  g.data = w;
  Matrix grad_in;
  conv2d_backward(in, k, b, g, &grad_in);
  double worst = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) worst = std::max(worst, relative_error(k.grad[i], numeric(k.value, i, f)));
  for (std::size_t i = 0; i < b.size(); ++i) worst = std::max(worst, relative_error(b.grad[i], numeric(b.value, i, f)));
  for (std::size_t i = 0; i < in.data.size(); ++i) {
    worst = std::max(worst, relative_error(grad_in.data[i], numeric(in.data, i, f)));
  }
  EXPECT_LT(worst, 1e-3);
}

TEST(DynamicPool, SingletonGroups) {
  FeatureMap in(1, 5, 1);
  for (std::size_t i = 0; i < 5; ++i) in.at(0, i, 0) = static_cast<double>(i + 1);
  auto out = dynamic_pool_forward(in, 5, 1, 5);
  EXPECT_EQ(out.output.data, (std::vector<double>{1, 2, 3, 4, 5}));
}

TEST(DynamicPool, SingleValidRowRepeats) {
  FeatureMap in(2, 4, 3);
  std::mt19937_64 rng(3);
  fill(in.data, rng);
  auto out = dynamic_pool_forward(in, 5, 1, 1);
  for (std::size_t c = 0; c < 2; ++c) {
    const double row_max = std::max({in.at(c, 0, 0), in.at(c, 0, 1), in.at(c, 0, 2)});
    for (std::size_t r = 0; r < 5; ++r) EXPECT_EQ(out.output.at(c, r, 0), row_max);
  }
}

TEST(DynamicPool, RangesCoverNonEmptyContiguous) {
  for (std::size_t extent = 1; extent <= 23; ++extent) {
    for (std::size_t groups = 1; groups <= 7; ++groups) {
      auto r = pool_ranges(extent, groups);
      ASSERT_EQ(r.size(), groups);
      for (const auto& [b, e] : r) {
        EXPECT_LT(b, e);
        EXPECT_LE(e, extent);
      }
      EXPECT_EQ(r.front().first, 0u);
      EXPECT_EQ(r.back().second, extent);
      if (extent >= groups) {
        for (std::size_t g = 1; g < groups; ++g) EXPECT_EQ(r[g].first, r[g - 1].second);
      }
    }
  }
}

TEST(DynamicPool, TiesGoToFirstAndBackwardRoutes) {
  FeatureMap in(1, 2, 2);
  in.data = {3, 3, 1, 3};
  auto out = dynamic_pool_forward(in, 1, 1, 2);
  EXPECT_EQ(out.argmax[0], 0u);
  FeatureMap g(1, 1, 1);
  g.data = {2.5};
  FeatureMap gin(1, 2, 2);
  dynamic_pool_backward(out, g, gin);
  EXPECT_EQ(gin.data, (std::vector<double>{2.5, 0, 0, 0}));
}

TEST(DynamicPool, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(4);
  FeatureMap in(3, 7, 4);
  fill(in.data, rng);
  std::vector<double> w(3 * 5);
  fill(w, rng);
  auto f = [&] { return probe(dynamic_pool_forward(in, 5, 1, 6).output.data, w); };
  auto pooled = dynamic_pool_forward(in, 5, 1, 6);
  FeatureMap g(3, 5, 1);
  g.data = w;
  FeatureMap gin(3, 7, 4);
  dynamic_pool_backward(pooled, g, gin);
  double worst = 0.0;
  for (std::size_t i = 0; i < in.data.size(); ++i) {
    worst = std::max(worst, relative_error(gin.data[i], numeric(in.data, i, f)));
  }
  EXPECT_LT(worst, 1e-3);
}

TEST(Dense, IdentityWeights) {
  Tensor w({3, 3}), b({3});
  w.value[0] = w.value[4] = w.value[8] = 1.0;
  const std::vector<double> x{0.5, -2.0, 7.0};
  EXPECT_EQ(dense_forward(x, w, b), x);
}

TEST(Dense, DimensionMismatchIsError) {
  Tensor w({2, 3}), b({2});
  const std::vector<double> x{1.0, 2.0};
  EXPECT_THROW(dense_forward(x, w, b), Error);
}

TEST(Dense, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(5);
  Tensor w({4, 6}), b({4});
  fill(w.value, rng);
  fill(b.value, rng);
  std::vector<double> x(6), gy(4);
  fill(x, rng);
  fill(gy, rng);
  auto f = [&] { return probe(dense_forward(x, w, b), gy); };
  std::vector<double> gx(6);
  dense_backward(x, w, b, gy, gx);
  double worst = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) worst = std::max(worst, relative_error(w.grad[i], numeric(w.value, i, f)));
  for (std::size_t i = 0; i < b.size(); ++i) worst = std::max(worst, relative_error(b.grad[i], numeric(b.value, i, f)));
  for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, relative_error(gx[i], numeric(x, i, f)));
  EXPECT_LT(worst, 1e-3);
}

TEST(Activations, TanhAndReluGradients) {
  std::mt19937_64 rng(6);
  std::vector<double> x(12), gy(12);
  fill(x, rng, 2.0);
  fill(gy, rng);
  for (auto& v : x) {
    if (std::abs(v) < 1e-2) v = 0.5;  // keep away from the relu kink
  }
  auto tanh_f = [&] {
    auto y = x;
    tanh_inplace(y);
    return probe(y, gy);
  };
  auto relu_f = [&] {
    auto y = x;
    relu_inplace(y);
    return probe(y, gy);
  };
  auto y = x;
  tanh_inplace(y);
  auto g = gy;
  tanh_backward(y, g);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LT(relative_error(g[i], numeric(x, i, tanh_f)), 1e-3);
  y = x;
  relu_inplace(y);
  g = gy;
  relu_backward(y, g);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LT(relative_error(g[i], numeric(x, i, relu_f)), 1e-3);
}

TEST(Softmax, EqualLogitsUniform) {
  for (std::size_t n = 1; n <= 6; ++n) {
    auto p = softmax(std::vector<double>(n, 0.7));
    for (double v : p) EXPECT_NEAR(v, 1.0 / static_cast<double>(n), 1e-15);
  }
}

TEST(Softmax, MaskedEntriesZeroAndLargeLogitsStable) {
  const std::vector<double> logits{1000.0, 999.0, 5.0};
  auto p = softmax(logits, {true, true, false});
  EXPECT_EQ(p[2], 0.0);
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-15);
  EXPECT_NEAR(p[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
}

TEST(Softmax, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  std::vector<double> x(5), gy(5);
  fill(x, rng, 3.0);
  fill(gy, rng);
  auto f = [&] { return probe(softmax(x), gy); };
  auto gx = softmax_backward(softmax(x), gy);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LT(relative_error(gx[i], numeric(x, i, f)), 1e-3);
}
