#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "lamperti/rng.hpp"
#include "lamperti/samplers.hpp"

using namespace lamperti;

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

template <class Draw>
Moments sample(std::int64_t reps, Draw&& draw) {
  double s = 0.0, ss = 0.0;
  for (std::int64_t i = 0; i < reps; ++i) {
    const double v = static_cast<double>(draw());
    s += v;
    ss += v * v;
  }
  const double mean = s / static_cast<double>(reps);
  return {mean, ss / static_cast<double>(reps) - mean * mean};
}

}  // namespace

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  Xoshiro256 a = Xoshiro256::stream(7, 3);
  Xoshiro256 b = Xoshiro256::stream(7, 3);
  Xoshiro256 c = Xoshiro256::stream(7, 4);
  Xoshiro256 d = Xoshiro256::stream(8, 3);
  std::set<std::uint64_t> firsts;
  for (int i = 0; i < 100; ++i) {
    const auto va = a();
    EXPECT_EQ(va, b());
    firsts.insert(va);
  }
  EXPECT_NE(Xoshiro256::stream(7, 3)(), c());
  EXPECT_NE(Xoshiro256::stream(7, 3)(), d());
  EXPECT_EQ(firsts.size(), 100u);
}

TEST(Rng, UniformOpenAtZero) {
  Xoshiro256 r(11);
  double s = 0.0;
  for (int i = 0; i < 200000; ++i) {
    const double u = r.uniform_open0();
    ASSERT_GT(u, 0.0);
    ASSERT_LE(u, 1.0);
    s += u;
  }
  EXPECT_NEAR(s / 200000.0, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / 200000.0));
}

TEST(Geometric, Moments) {
  for (double b : {0.1, 0.5, 0.9}) {
    Xoshiro256 r(100);
    const std::int64_t reps = 400000;
    const Moments m = sample(reps, [&] { return sample_geometric(r, b); });
    const double mean = b / (1.0 - b);
    const double var = b / ((1.0 - b) * (1.0 - b));
    EXPECT_NEAR(m.mean, mean, 4.0 * std::sqrt(var / reps)) << b;
    EXPECT_NEAR(m.var / var, 1.0, 0.03) << b;
  }
}

TEST(Geometric, PointMasses) {
  Xoshiro256 r(5);
  const double b = 0.6;
  const std::int64_t reps = 400000;
  std::map<std::int64_t, std::int64_t> hist;
  for (std::int64_t i = 0; i < reps; ++i) hist[sample_geometric(r, b)] += 1;
  for (std::int64_t j = 0; j <= 5; ++j) {
    const double pj = std::pow(b, j) * (1.0 - b);
    const double est = static_cast<double>(hist[j]) / reps;
    EXPECT_NEAR(est, pj, 4.0 * std::sqrt(pj * (1.0 - pj) / reps)) << j;
  }
}

TEST(Geometric, Degenerate) {
  Xoshiro256 r(1);
  EXPECT_EQ(sample_geometric(r, 0.0), 0);
  EXPECT_THROW(sample_geometric(r, 1.0), std::invalid_argument);
  EXPECT_THROW(sample_geometric(r, -0.1), std::invalid_argument);
}

TEST(NegativeBinomial, MomentsBothRegimes) {
  for (std::int64_t k : std::vector<std::int64_t>{1, 3, kNegBinSumThreshold, kNegBinSumThreshold + 1, 100, 5000}) {
    for (double b : {0.2, 0.55}) {
      Xoshiro256 r = Xoshiro256::stream(99, static_cast<std::uint64_t>(k));
      const std::int64_t reps = 200000;
      const Moments m = sample(reps, [&] { return sample_negative_binomial(r, k, b); });
      const double mean = static_cast<double>(k) * b / (1.0 - b);
      const double var = mean / (1.0 - b);
      EXPECT_NEAR(m.mean, mean, 4.0 * std::sqrt(var / reps)) << k << "," << b;
      EXPECT_NEAR(m.var / var, 1.0, 0.03) << k << "," << b;
    }
  }
}

TEST(NegativeBinomial, ZeroMassAcrossThreshold) {
  for (std::int64_t k : std::vector<std::int64_t>{kNegBinSumThreshold, kNegBinSumThreshold + 1}) {
    Xoshiro256 r = Xoshiro256::stream(3, static_cast<std::uint64_t>(k));
    const double b = 0.1;
    const std::int64_t reps = 400000;
    std::int64_t zeros = 0;
    for (std::int64_t i = 0; i < reps; ++i) zeros += sample_negative_binomial(r, k, b) == 0 ? 1 : 0;
    const double p0 = std::pow(1.0 - b, static_cast<double>(k));
    EXPECT_NEAR(static_cast<double>(zeros) / reps, p0, 4.0 * std::sqrt(p0 * (1.0 - p0) / reps)) << k;
  }
}

TEST(NegativeBinomial, Degenerate) {
  Xoshiro256 r(2);
  EXPECT_EQ(sample_negative_binomial(r, 0, 0.5), 0);
  EXPECT_EQ(sample_negative_binomial(r, 50, 0.0), 0);
  EXPECT_THROW(sample_negative_binomial(r, -1, 0.5), std::invalid_argument);
}

TEST(NegativeBinomial, Deterministic) {
  Xoshiro256 a(42), b(42);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_negative_binomial(a, 40, 0.4), sample_negative_binomial(b, 40, 0.4));
}
