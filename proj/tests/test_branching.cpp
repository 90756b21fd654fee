#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lamperti/branching.hpp"

using namespace lamperti;

namespace {

struct Harmonic : ::testing::Test {
  PotentialKernel kernel{Environment(DriftSpec::harmonic()), 20000};
  Analytics an{kernel};
};

// |est - exact| <= 4 sigma for a binomial proportion.
void expect_proportion(std::int64_t hits, std::int64_t total, double exact, const std::string& what) {
  const double est = static_cast<double>(hits) / static_cast<double>(total);
  const double sigma = std::sqrt(exact * (1.0 - exact) / static_cast<double>(total));
  EXPECT_NEAR(est, exact, 4.0 * sigma) << what;
}

double sample_mean(const std::vector<double>& v, double* se) {
  double s = 0.0, ss = 0.0;
  for (double x : v) s += x;
  const double m = s / static_cast<double>(v.size());
  for (double x : v) ss += (x - m) * (x - m);
  *se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  return m;
}

}  // namespace

TEST_F(Harmonic, GeometricParameters) {
  const BranchingSampler s(an, 50);
  EXPECT_NEAR(s.geom_param(9).loop, 0.5, 1e-15);
  EXPECT_NEAR(s.geom_param(0).loop, 0.4, 1e-15);
  EXPECT_EQ(s.max_site(), 50);
  EXPECT_THROW(s.geom_param(51), std::out_of_range);
}

TEST_F(Harmonic, PgfFixedPointAtOne) {
  const PgfIterator it(an);
  for (std::int64_t x : {1, 2, 9, 300}) {
    EXPECT_NEAR(it.f(x, 1.0), 1.0, 1e-13) << x;
    EXPECT_NEAR(it.g(x, 1.0), 1.0, 1e-13) << x;
  }
}

TEST_F(Harmonic, PgfSupportAndWeak) {
  const PgfIterator it(an);
  for (std::int64_t x : {0, 1, 9, 100}) EXPECT_EQ(it.pgf(x, 0.0), 0.0);
  EXPECT_NEAR(it.weak_from_pgf(9), 0.2, 1e-13);
}

TEST_F(Harmonic, PgfIterationMatchesGeometric) {
  const PgfIterator it(an);
  const PgfTable t = it.iterate(500, {0.0, 0.3, 0.7, 0.99});
  EXPECT_EQ(t.marginal.size(), 501u * 4u);
  EXPECT_EQ(t.weak.size(), 500u);
  // closed form of a geometric pgf on {1,2,...} with success 1/D(x), computed here directly
  double worst = 0.0;
  for (const auto& r : t.marginal) {
    const double dx = r.x == 0 ? 5.0 / 3.0 : r.x + 1.0;
    const double direct = r.s / dx / (1.0 - r.s * (1.0 - 1.0 / dx));
    worst = std::max(worst, std::abs(r.iterated - direct));
  }
  EXPECT_LE(worst, 1e-10);
  for (const auto& w : t.weak) {
    const double direct = w.x == 1 ? 0.8 : 2.0 / (w.x + 1.0);
    EXPECT_NEAR(w.iterated, direct, 1e-10) << w.x;
  }
  EXPECT_LE(t.max_deviation, 1e-10);
  EXPECT_THROW(it.iterate(3, {1.0}), std::invalid_argument);
}

TEST_F(Harmonic, SingleUpcrossingMeansNoLoops) {
  const BranchingSampler s(an, 100);
  Xoshiro256 rng(4);
  SiteOccupancy prev;
  prev.x = 20;
  prev.up = 1;
  for (int i = 0; i < 10000; ++i) EXPECT_EQ(s.step(prev, rng).loops_from_loops, 0);
}

TEST_F(Harmonic, NoLoopProbabilityGivenUpcrossings) {
  const BranchingSampler s(an, 100);
  const double b = s.geom_param(30).loop;
  for (std::int64_t k : {1, 3, 20}) {
    Xoshiro256 rng = Xoshiro256::stream(8, static_cast<std::uint64_t>(k));
    SiteOccupancy prev;
    prev.x = 29;
    prev.up = k + 1;
    const std::int64_t reps = 200000;
    std::int64_t zero = 0;
    for (std::int64_t i = 0; i < reps; ++i) zero += s.step(prev, rng).loops_from_loops == 0 ? 1 : 0;
    expect_proportion(zero, reps, std::pow(1.0 - b, static_cast<double>(k)), "k=" + std::to_string(k));
  }
}

TEST_F(Harmonic, SiteLawsAtNine) {
  const BranchingSampler s(an, 9);
  const std::int64_t reps = 300000;
  std::vector<std::int64_t> up(7, 0);
  std::int64_t c11 = 0, c21 = 0, weak = 0;
  for (std::int64_t r = 0; r < reps; ++r) {
    Xoshiro256 rng = Xoshiro256::stream(2024, static_cast<std::uint64_t>(r));
    SiteOccupancy cur = s.initial(rng), prev = cur;
    for (int x = 1; x <= 9; ++x) {
      prev = cur;
      cur = s.step(prev, rng);
    }
    if (cur.up <= 6) up[static_cast<std::size_t>(cur.up)] += 1;
    const std::int64_t lt = local_time(prev, cur);
    c11 += (lt == 1 && cur.up == 1) ? 1 : 0;
    c21 += (lt == 2 && cur.up == 1) ? 1 : 0;
    weak += cur.loops_from_loops == 0 ? 1 : 0;
  }
  for (std::int64_t b = 1; b <= 5; ++b) {
    expect_proportion(up[static_cast<std::size_t>(b)], reps, std::pow(0.9, static_cast<double>(b - 1)) / 10.0,
                      "b=" + std::to_string(b));
  }
  expect_proportion(c11, reps, 1.0 / 18.0, "C(1,1)");
  expect_proportion(c21, reps, 2.0 / 81.0, "C(2,1)");
  expect_proportion(weak, reps, 0.2, "C_w");
}

TEST_F(Harmonic, JointUpcrossingsByMonteCarlo) {
  const BranchingSampler s(an, 30);
  const std::int64_t reps = 1000000;
  std::int64_t hits = 0;
  for (std::int64_t r = 0; r < reps; ++r) {
    Xoshiro256 rng = Xoshiro256::stream(77, static_cast<std::uint64_t>(r));
    SiteOccupancy cur = s.initial(rng);
    std::int64_t at10 = 0;
    for (int x = 1; x <= 30; ++x) {
      cur = s.step(cur, rng);
      if (x == 10) at10 = cur.up;
    }
    hits += (at10 == 1 && cur.up == 2) ? 1 : 0;
  }
  expect_proportion(hits, reps, an.joint_upcross_law(10, 30, 1, 2), "joint (10,30,1,2)");
}

TEST_F(Harmonic, CountsRespectInclusion) {
  const BranchingSampler s(an, 2000);
  const std::vector<SetKind> kinds{SetKind::local_up(3, 2), SetKind::up(2), SetKind::local_up(1, 1), SetKind::up(1),
                                   SetKind::up_set(4, {1, 2}), SetKind::local_up(4, 1), SetKind::local_up(4, 2)};
  const auto runs = s.run_ensemble(2000, kinds, 300, 5);
  for (const auto& r : runs) {
    EXPECT_LE(r.counts[0], r.counts[1]);
    EXPECT_LE(r.counts[2], r.counts[3]);
    EXPECT_EQ(r.counts[4], r.counts[5] + r.counts[6]);
  }
}

TEST_F(Harmonic, DeterministicAcrossWorkers) {
  const BranchingSampler s(an, 1000);
  const std::vector<SetKind> kinds{SetKind::weak(), SetKind::up(1), SetKind::local_up(2, 1)};
  const auto one = s.run_ensemble(1000, kinds, 64, 123, 1);
  const auto three = s.run_ensemble(1000, kinds, 64, 123, 3);
  ASSERT_EQ(one.size(), three.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].counts, three[i].counts);
    EXPECT_EQ(one[i].scaled, three[i].scaled);
  }
  EXPECT_EQ(s.run_replica(1000, kinds, 123, 17).counts, one[17].counts);
  EXPECT_NE(s.run_ensemble(1000, kinds, 64, 124, 1)[0].counts, one[0].counts);
}

TEST_F(Harmonic, ScaledByLambdaLog) {
  const BranchingSampler s(an, 500);
  const auto r = s.run_replica(500, {SetKind::weak(), SetKind::local_up(2, 1)}, 9);
  EXPECT_DOUBLE_EQ(r.scaled[0], r.counts[0] / (2.0 * std::log(500.0)));
  EXPECT_DOUBLE_EQ(r.scaled[1], r.counts[1] / (0.25 * std::log(500.0)));
  EXPECT_EQ(r.count(SetKind::weak()), r.counts[0]);
  EXPECT_THROW(r.count(SetKind::up(7)), std::out_of_range);
}

TEST_F(Harmonic, MeanCountsMatchExpectation) {
  const BranchingSampler s(an, 10000);
  const std::vector<SetKind> kinds{SetKind::weak(), SetKind::up(1)};
  const auto runs = s.run_ensemble(10000, kinds, 2000, 31);
  std::vector<double> cw, c1;
  for (const auto& r : runs) {
    cw.push_back(static_cast<double>(r.counts[0]));
    c1.push_back(static_cast<double>(r.counts[1]));
  }
  double oracle_w = 0.8, oracle_1 = 0.0;
  for (std::int64_t x = 2; x <= 10000; ++x) oracle_w += 2.0 / (x + 1.0);
  for (std::int64_t x = 1; x <= 10000; ++x) oracle_1 += 1.0 / (x + 1.0);
  double se_w = 0.0, se_1 = 0.0;
  const double mw = sample_mean(cw, &se_w);
  const double m1 = sample_mean(c1, &se_1);
  EXPECT_NEAR(mw, oracle_w, 4.0 * se_w);
  EXPECT_NEAR(m1, oracle_1, 4.0 * se_1);
}

TEST_F(Harmonic, RejectsOutOfRange) {
  const BranchingSampler s(an, 10);
  EXPECT_THROW(s.run_replica(11, {SetKind::weak()}, 1), std::invalid_argument);
  EXPECT_THROW(s.run_replica(0, {SetKind::weak()}, 1), std::invalid_argument);
  EXPECT_THROW(BranchingSampler(an, -1), std::invalid_argument);
}
