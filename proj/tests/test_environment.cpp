#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lamperti/environment.hpp"

using namespace lamperti;

namespace {

// D(m,n) summed straight from the definition with harmonic rho_i = (i-1)/(i+1), rho_1 = 1/3.
double oracle_harmonic_partial(std::int64_t m, std::int64_t n) {
  if (n == m) return 0.0;
  long double sum = 1.0L, prod = 1.0L;
  for (std::int64_t i = m + 1; i < n; ++i) {
    prod *= i == 1 ? 1.0L / 3.0L : static_cast<long double>(i - 1) / static_cast<long double>(i + 1);
    sum += prod;
  }
  return static_cast<double>(sum);
}

// D(m) from partial sums at N and 2N; for this family the truncation error is c/N.
double oracle_harmonic_limit(std::int64_t m, std::int64_t big_n) {
  return 2.0 * oracle_harmonic_partial(m, 2 * big_n) - oracle_harmonic_partial(m, big_n);
}

std::filesystem::path write_table(const std::string& name, const std::string& body) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST(Environment, HarmonicProbabilities) {
  Environment env(DriftSpec::harmonic());
  EXPECT_EQ(env.p_at(0), 1.0);
  EXPECT_EQ(env.q_at(0), 0.0);
  EXPECT_DOUBLE_EQ(env.p_at(1), 0.75);
  EXPECT_DOUBLE_EQ(env.p_at(9), 5.0 / 9.0);
  for (std::int64_t n = 1; n < 2000; ++n) {
    EXPECT_EQ(env.p_at(n) + env.q_at(n), 1.0);
    EXPECT_NEAR(env.rho_at(n), env.q_at(n) / env.p_at(n), 4e-16 * env.rho_at(n));
  }
}

TEST(Environment, LogLogThreshold) {
  EXPECT_EQ(Environment(DriftSpec::loglog(1.0)).loglog_threshold(), 4);
  EXPECT_EQ(Environment(DriftSpec::loglog(0.0)).loglog_threshold(), 3);
  for (double beta : {-3.0, -0.5, 0.5, 1.0, 2.0, 6.0}) {
    Environment env(DriftSpec::loglog(beta));
    for (std::int64_t n = 1; n < 5000; ++n) {
      const double r = env.r_at(n);
      ASSERT_GT(r, 0.0) << beta << " " << n;
      ASSERT_LT(r, 0.5) << beta << " " << n;
    }
    const std::int64_t n1 = env.loglog_threshold();
    EXPECT_EQ(env.r_at(1), env.r_at(n1));
  }
}

TEST(Environment, ParseFamily) {
  EXPECT_EQ(parse_family("harmonic").family, Family::harmonic);
  const DriftSpec s = parse_family("loglog:1.5");
  EXPECT_EQ(s.family, Family::loglog_perturbed);
  EXPECT_DOUBLE_EQ(s.beta, 1.5);
  EXPECT_THROW(parse_family("loglog:abc"), std::invalid_argument);
  EXPECT_THROW(parse_family("loglog:"), std::invalid_argument);
  EXPECT_THROW(parse_family("geometric"), std::invalid_argument);
  const auto path = write_table("lamperti_table_ok.txt", "# comment\n0.9\n0.7\n\n0.6\n");
  const DriftSpec t = parse_family("table:" + path.string());
  ASSERT_EQ(t.table.size(), 3u);
  EXPECT_DOUBLE_EQ(t.table[1], 0.7);
  EXPECT_THROW(parse_family("table:/nonexistent/file"), std::invalid_argument);
}

TEST(Environment, CustomTableValidation) {
  EXPECT_THROW(Environment(DriftSpec::custom({0.6, 1.0})), std::invalid_argument);
  EXPECT_THROW(Environment(DriftSpec::custom({})), std::invalid_argument);
  Environment env(DriftSpec::custom({0.9, 0.8, 0.6}));
  EXPECT_DOUBLE_EQ(env.p_at(2), 0.8);
  EXPECT_DOUBLE_EQ(env.p_at(50), 0.6);
}

TEST(Kernel, HarmonicBetweenExamples) {
  PotentialKernel k(Environment(DriftSpec::harmonic()), 100);
  EXPECT_EQ(k.d_between(5, 5), 0.0);
  EXPECT_NEAR(k.d_between(5, 10), oracle_harmonic_partial(5, 10), 1e-14);
  EXPECT_NEAR(k.d_between(5, 10), 3.0, 1e-14);
  EXPECT_NEAR(k.d_between(4, 9), oracle_harmonic_partial(4, 9), 1e-14);
  EXPECT_NEAR(k.d_between(4, 9), 25.0 / 9.0, 1e-14);
  EXPECT_THROW(k.d_between(6, 5), std::invalid_argument);
}

TEST(Kernel, HarmonicLimitExamples) {
  PotentialKernel k(Environment(DriftSpec::harmonic()), 100);
  EXPECT_NEAR(k.d_of(5), oracle_harmonic_limit(5, 5000000), 1e-9);
  EXPECT_DOUBLE_EQ(k.d_of(5), 6.0);
  EXPECT_NEAR(k.d_of(0), oracle_harmonic_limit(0, 5000000), 1e-9);
  EXPECT_DOUBLE_EQ(k.d_of(0), 5.0 / 3.0);
}

TEST(Kernel, BasicInvariants) {
  for (const DriftSpec& spec : {DriftSpec::harmonic(), DriftSpec::loglog(1.0), DriftSpec::custom({0.9, 0.7, 0.6})}) {
    PotentialKernel k(Environment(spec), 400);
    for (std::int64_t m = 0; m < 300; m += 7) {
      EXPECT_EQ(k.d_between(m, m), 0.0);
      EXPECT_EQ(k.d_between(m, m + 1), 1.0);
      double prev = 1.0;
      for (std::int64_t n = m + 2; n < m + 60; ++n) {
        const double v = k.d_between(m, n);
        EXPECT_GT(v, prev);
        EXPECT_LE(v, k.d_of(m) * (1.0 + 1e-14));
        prev = v;
      }
    }
  }
}

TEST(Kernel, RecursionConsistency) {
  for (const DriftSpec& spec : {DriftSpec::loglog(1.0), DriftSpec::loglog(0.5), DriftSpec::loglog(2.0),
                                DriftSpec::custom({0.9, 0.7, 0.6, 0.55})}) {
    PotentialKernel k(Environment(spec), 20000);
    const Environment& env = k.environment();
    for (std::int64_t m = 0; m < 20000; ++m) {
      const double rhs = 1.0 + env.rho_at(m + 1) * k.d_of(m + 1);
      ASSERT_LE(std::abs(k.d_of(m) - rhs) / k.d_of(m), 1e-12) << spec.label() << " m=" << m;
    }
  }
}

TEST(Kernel, ProductIdentity) {
  PotentialKernel k(Environment(DriftSpec::loglog(1.0)), 5000);
  for (auto [m, n] : std::vector<std::pair<std::int64_t, std::int64_t>>{{0, 5}, {3, 40}, {10, 1000}, {250, 4000}}) {
    long double prod = 1.0L;
    for (std::int64_t i = m; i < n; ++i) prod *= 1.0L - 1.0L / k.d_of(i);
    const double rhs = static_cast<double>(1.0L - prod);
    EXPECT_NEAR(k.d_between(m, n) / k.d_of(m), rhs, 1e-10 * rhs) << m << "," << n;
  }
}

TEST(Kernel, SeedLevelAgreement) {
  KernelOptions ten, twenty;
  twenty.seed_factor = 20.0;
  for (double beta : {0.5, 1.0, 2.0}) {
    PotentialKernel a(Environment(DriftSpec::loglog(beta)), 50000, ten);
    PotentialKernel b(Environment(DriftSpec::loglog(beta)), 50000, twenty);
    EXPECT_EQ(a.seed_level(), 500000);
    EXPECT_EQ(b.seed_level(), 1000000);
    double worst = 0.0;
    for (std::int64_t m = 0; m <= 50000; ++m) worst = std::max(worst, std::abs(a.d_of(m) / b.d_of(m) - 1.0));
    EXPECT_LE(worst, 1e-9) << beta;
  }
}

TEST(Kernel, LogLogSeedMatchesDeepRecursion) {
  const Environment env(DriftSpec::loglog(1.0));
  const detail::LogLogTail tail(1.0);
  const std::int64_t m = 2000;
  double deep = tail.seed(400 * m);
  for (std::int64_t i = 400 * m - 1; i >= m; --i) deep = 1.0 + env.rho_at(i + 1) * deep;
  EXPECT_NEAR(tail.seed(m) / deep, 1.0, 1e-11);
}

TEST(Kernel, LogLogAsymptoticApproach) {
  PotentialKernel k(Environment(DriftSpec::loglog(1.0)), 1000000);
  double prev = 1e9;
  for (std::int64_t m : {1000, 10000, 100000, 1000000}) {
    const double ratio = k.d_of(m) / (static_cast<double>(m) * std::log(std::log(static_cast<double>(m))));
    EXPECT_GT(ratio, 1.0);
    EXPECT_LT(ratio, prev);
    prev = ratio;
  }
  const double at_1e5 = k.d_of(100000) / (1e5 * std::log(std::log(1e5)));
  EXPECT_NEAR(at_1e5, 1.0777, 5e-4);
}

TEST(Kernel, BetaZeroIsHarmonic) {
  PotentialKernel k(Environment(DriftSpec::loglog(0.0)), 1000);
  for (std::int64_t m : {3, 10, 100, 1000}) EXPECT_NEAR(k.d_of(m), m + 1.0, 1e-10 * m);
}

TEST(Kernel, HarmonicExactnessAgainstRecursionAndTailSum) {
  const Environment env(DriftSpec::harmonic());
  KernelOptions rec;
  rec.policy = KernelPolicy::backward_recursion;
  KernelOptions tail;
  tail.policy = KernelPolicy::direct_tail_sum;
  PotentialKernel by_rec(env, 10000, rec);
  PotentialKernel by_tail(env, 200, tail);
  for (std::int64_t m = 1; m <= 10000; m += 37) {
    EXPECT_NEAR(by_rec.d_of(m) / (m + 1.0), 1.0, 1e-9) << m;
  }
  for (std::int64_t m = 1; m <= 200; ++m) EXPECT_NEAR(by_tail.d_of(m) / (m + 1.0), 1.0, 1e-9) << m;
  for (auto [m, n] : std::vector<std::pair<std::int64_t, std::int64_t>>{{1, 2}, {7, 300}, {999, 1000000}, {50000, 70001}}) {
    const double exact = (m + 1.0) * static_cast<double>(n - m) / static_cast<double>(n);
    EXPECT_NEAR(by_rec.d_between(m, n) / exact, 1.0, 1e-9) << m << "," << n;
  }
}

TEST(Kernel, HarmonicStabilityBands) {
  PotentialKernel k(Environment(DriftSpec::harmonic()), 10);
  for (std::int64_t x = 101; x < 3000; x += 13) {
    EXPECT_LE(std::abs(k.d_of(x - 1) / k.d_of(x) - 1.0), 0.02);
    for (std::int64_t y = x + 101; y < x + 3000; y += 97) {
      const double r = k.d_between(x, y) / k.d_between(x, y - 1);
      EXPECT_GE(r, 1.0);
      EXPECT_LE(r, 1.02);
    }
  }
}

TEST(Kernel, HarmonicLowerBandAtLargeIndices) {
  PotentialKernel k(Environment(DriftSpec::harmonic()), 10);
  for (std::int64_t i : {1000, 5000, 40000}) {
    for (std::int64_t j : {2 * i + 1, 3 * i, 10 * i, 100 * i}) {
      const double ratio = k.d_between(i, j) / (static_cast<double>(i) * static_cast<double>(j - i) / j);
      EXPECT_GE(ratio, 0.99);
      EXPECT_LE(ratio, 1.01);
    }
  }
}

TEST(Kernel, DirectTailSumRichardson) {
  const Environment env(DriftSpec::harmonic());
  const TailEstimate t = direct_tail_sum(env, 25);
  EXPECT_NEAR(t.value, 26.0, 1e-9);
  EXPECT_LT(t.error_estimate, 1e-8);
}

TEST(Kernel, DivergenceDetected) {
  const Environment flat(DriftSpec::custom({0.5}));
  EXPECT_THROW(direct_tail_sum(flat, 3), DivergentError);
  try {
    PotentialKernel k(Environment(DriftSpec::custom({0.8, 0.45})), 10);
    FAIL() << "expected DivergentError";
  } catch (const DivergentError& e) {
    EXPECT_TRUE(std::isinf(e.partial_value()));
  }
  // rho_n = 1 - 1/n is recurrent: increments stop shrinking.
  std::vector<double> p;
  for (int n = 1; n <= 200000; ++n) p.push_back(1.0 / (2.0 - 1.0 / (n + 1.0)));
  try {
    direct_tail_sum(Environment(DriftSpec::custom(p)), 0, 20000);
    FAIL() << "expected DivergentError";
  } catch (const DivergentError& e) {
    EXPECT_GT(e.partial_value(), 1.0);
  }
}

TEST(Kernel, CustomTableGeometricTail) {
  const DriftSpec spec = DriftSpec::custom({0.9, 0.8, 0.6});
  PotentialKernel k(Environment(spec), 50);
  const double rho = 0.4 / 0.6;
  EXPECT_NEAR(k.d_of(3), 1.0 / (1.0 - rho), 1e-12);
  EXPECT_NEAR(k.d_of(40), 1.0 / (1.0 - rho), 1e-12);
  EXPECT_NEAR(k.d_of(2), 1.0 + rho * k.d_of(3), 1e-12);
}

TEST(Criterion, PartialSums) {
  PotentialKernel h(Environment(DriftSpec::harmonic()), 10);
  EXPECT_DOUBLE_EQ(h.criterion_partial_sum(2), 1.0 / (3.0 * std::log(2.0)));
  long double direct = 0.0L;
  for (std::int64_t n = 2; n <= 1000000; ++n) direct += 1.0L / ((n + 1.0L) * std::log(static_cast<long double>(n)));
  EXPECT_NEAR(h.criterion_partial_sum(1000000), static_cast<double>(direct), 1e-10);
  EXPECT_THROW(h.criterion_partial_sum(1), std::invalid_argument);
  PotentialKernel small(Environment(DriftSpec::loglog(1.0)), 100);
  EXPECT_THROW(small.criterion_partial_sum(101), std::out_of_range);
}

TEST(Criterion, Classification) {
  EXPECT_EQ(classify_finiteness(DriftSpec::loglog(2.0)), Finiteness::almost_surely_finite);
  EXPECT_EQ(classify_finiteness(DriftSpec::loglog(1.5)), Finiteness::almost_surely_finite);
  EXPECT_EQ(classify_finiteness(DriftSpec::loglog(1.0)), Finiteness::almost_surely_infinite);
  EXPECT_EQ(classify_finiteness(DriftSpec::loglog(0.5)), Finiteness::almost_surely_infinite);
  EXPECT_THROW(classify_finiteness(DriftSpec::harmonic()), std::invalid_argument);
}

TEST(ProductReport, StabilizesOnGrid) {
  const Environment env(DriftSpec::loglog(1.0));
  const auto rows = product_asymptotic_report(env, 10000000);
  ASSERT_GE(rows.size(), 13u);
  double prev_step = 1e9;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_GT(rows[i].ratio, 0.0);
    EXPECT_TRUE(std::isfinite(rows[i].ratio));
    if (i == 0) continue;
    const double step = std::abs(std::log(rows[i].ratio) - std::log(rows[i - 1].ratio));
    EXPECT_LT(step, prev_step);
    prev_step = step;
    if (rows[i - 1].n >= 100000) {
      EXPECT_NEAR(rows[i].ratio / rows[i - 1].ratio, 1.0, 0.01);
    }
  }
  EXPECT_THROW(product_asymptotic_report(Environment(DriftSpec::harmonic()), 1000), std::invalid_argument);
}
