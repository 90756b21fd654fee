#ifndef LAMPERTI_ORACLE_HPP
#define LAMPERTI_ORACLE_HPP

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "lamperti/analytics.hpp"
#include "lamperti/branching.hpp"
#include "lamperti/combinatorics.hpp"
#include "lamperti/environment.hpp"
#include "lamperti/samplers.hpp"
#include "lamperti/stats.hpp"
#include "lamperti/walker.hpp"

namespace lamperti {

using Rational = boost::multiprecision::cpp_rational;

// h(k) = P_k(hit n before m) for k = m..n from the linear system
// h(m) = 0, h(n) = 1, h(k) = p_k h(k+1) + q_k h(k-1), by Thomas elimination.
inline std::vector<double> tridiag_exit(const Environment& env, std::int64_t m, std::int64_t n) {
  if (m < 0 || n <= m) throw std::invalid_argument("tridiag_exit requires 0 <= m < n");
  if (n - m > 1000000) throw std::invalid_argument("tridiag_exit: n - m > 1e6");
  const std::int64_t inner = n - m - 1;
  std::vector<double> h(static_cast<std::size_t>(n - m + 1), 0.0);
  h.back() = 1.0;
  if (inner == 0) return h;
  // Row k: -q_k h(k-1) + h(k) - p_k h(k+1) = 0.
  std::vector<double> c(static_cast<std::size_t>(inner), 0.0);
  std::vector<double> dvec(static_cast<std::size_t>(inner), 0.0);
  for (std::int64_t j = 0; j < inner; ++j) {
    const std::int64_t k = m + 1 + j;
    const double lower = j == 0 ? 0.0 : -env.q_at(k);
    const double upper = -env.p_at(k);
    const double rhs = k == n - 1 ? env.p_at(k) : 0.0;
    const double denom = 1.0 - lower * (j == 0 ? 0.0 : c[j - 1]);
    if (!(std::abs(denom) > 0.0)) throw std::logic_error("tridiag_exit: singular system");
    c[j] = upper / denom;
    dvec[j] = (rhs - lower * (j == 0 ? 0.0 : dvec[j - 1])) / denom;
  }
  for (std::int64_t j = inner - 1; j >= 0; --j) {
    const double next = j == inner - 1 ? 0.0 : h[static_cast<std::size_t>(j + 2)];
    h[static_cast<std::size_t>(j + 1)] = dvec[j] - c[j] * next;
  }
  return h;
}

// Exact harmonic-family up probability p_n as a rational.
inline Rational harmonic_p_exact(std::int64_t n) {
  if (n == 0) return Rational(1);
  if (n == 1) return Rational(3, 4);
  return Rational(n + 1, 2 * n);
}

enum class PathEvent { first_step_up, exit_up, escape };

struct PathEventQuery {
  PathEvent event = PathEvent::first_step_up;
  std::int64_t start = 0;  // exit_up: starting site k
  std::int64_t low = 0;    // exit_up: lower barrier m
  std::int64_t high = 0;   // exit_up: upper barrier n
};

template <class T>
struct EnumerationResult {
  T probability{};  // mass of paths of length <= max_len realizing the event
  T remaining{};    // mass of paths of length max_len still undecided
  T rejected{};     // mass of paths decided against the event
};

// Sums path probabilities over all paths of length <= max_len, grouping paths
// by their current position (each group carries the summed probability of the
// paths it contains).
template <class T, class ProbUp>
EnumerationResult<T> enumerate_paths(int max_len, const PathEventQuery& query, ProbUp&& p_up) {
  if (max_len < 0 || max_len > 30) throw std::invalid_argument("enumerate_paths requires 0 <= max_len <= 30");
  EnumerationResult<T> r;
  if (query.event == PathEvent::escape) {
    throw std::invalid_argument("escape is not decidable from finite paths");
  }
  if (query.event == PathEvent::first_step_up) {
    if (max_len == 0) {
      r.remaining = T(1);
      return r;
    }
    r.probability = p_up(0);
    r.rejected = T(1) - r.probability;
    return r;
  }
  const std::int64_t m = query.low, n = query.high, k = query.start;
  if (m < 0 || k < m || n < k || n == m) throw std::invalid_argument("exit_up requires 0 <= m <= k <= n, m < n");
  if (k == n) {
    r.probability = T(1);
    return r;
  }
  if (k == m) {
    r.rejected = T(1);
    return r;
  }
  std::map<std::int64_t, T> live{{k, T(1)}};
  for (int step = 0; step < max_len && !live.empty(); ++step) {
    std::map<std::int64_t, T> next;
    for (const auto& [x, w] : live) {
      const T up = p_up(x);
      const T down = T(1) - up;
      if (x + 1 == n) {
        r.probability += w * up;
      } else {
        next[x + 1] += w * up;
      }
      if (x - 1 == m) {
        r.rejected += w * down;
      } else {
        next[x - 1] += w * down;
      }
    }
    live = std::move(next);
  }
  for (const auto& [x, w] : live) r.remaining += w;
  return r;
}

struct Check {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  std::optional<double> sigma;
  bool passed = false;
  std::string provenance;               // analytic | enumerated | monte-carlo (R replicas)
  std::vector<std::string> depends_on;  // formula targets feeding the lhs
};

struct VerificationReport {
  std::vector<Check> checks;
  bool overall = true;

  void add(Check c) {
    overall = overall && c.passed;
    checks.push_back(std::move(c));
  }
  void merge(const VerificationReport& other) {
    for (const auto& c : other.checks) add(c);
  }
  std::vector<std::string> failed_names() const {
    std::vector<std::string> out;
    for (const auto& c : checks) {
      if (!c.passed) out.push_back(c.name);
    }
    return out;
  }
};

inline Check absolute_check(std::string name, double lhs, double rhs, double tol, std::string provenance,
                            std::vector<std::string> depends_on = {}) {
  Check c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.tolerance = tol;
  c.passed = std::abs(lhs - rhs) <= tol;
  c.provenance = std::move(provenance);
  c.depends_on = std::move(depends_on);
  return c;
}

inline Check relative_check(std::string name, double lhs, double rhs, double tol, std::string provenance,
                            std::vector<std::string> depends_on = {}) {
  Check c = absolute_check(std::move(name), lhs, rhs, tol * std::abs(rhs), std::move(provenance),
                           std::move(depends_on));
  return c;
}

// |estimate - exact| <= 4 sigma + bias, sigma from the observed sample.
inline Check mc_check(std::string name, double estimate, double std_error, double exact, double bias,
                      std::int64_t replicas, std::vector<std::string> depends_on = {}) {
  Check c;
  c.name = std::move(name);
  c.lhs = estimate;
  c.rhs = exact;
  c.sigma = std_error;
  c.tolerance = 4.0 * std_error + bias;
  c.passed = std::abs(estimate - exact) <= c.tolerance;
  c.provenance = "monte-carlo (" + std::to_string(replicas) + " replicas)";
  c.depends_on = std::move(depends_on);
  return c;
}

struct SuiteConfig {
  std::string suite = "all";  // all | exit | pgf | walker | branching | samplers | combinatorics
  DriftSpec family = DriftSpec::harmonic();
  std::uint64_t seed = 20240601;
  unsigned workers = 1;
  FormulaPerturbation perturbation{};
  std::int64_t pgf_x_max = 500;
  std::int64_t walker_n = 20;
  double walker_eps = 0.01;
  std::int64_t walker_replicas = 2000;
  std::int64_t branching_replicas = 200000;
  double kernel_tolerance = 1e-8;
};

namespace detail {

inline Check binned_mc(const std::string& name, std::int64_t hits, std::int64_t total, double exact, double bias,
                       std::vector<std::string> deps) {
  const double pr = static_cast<double>(hits) / static_cast<double>(total);
  const double se = std::sqrt(std::max(pr * (1.0 - pr), 1.0 / static_cast<double>(total)) / static_cast<double>(total));
  return mc_check(name, pr, se, exact, bias, total, std::move(deps));
}

inline VerificationReport exit_checks(const Analytics& an) {
  VerificationReport rep;
  const Environment& env = an.kernel().environment();
  const std::vector<std::pair<std::int64_t, std::int64_t>> pairs{{0, 50}, {5, 10}, {100, 5000}};
  for (auto [m, n] : pairs) {
    const auto h = tridiag_exit(env, m, n);
    double worst = 0.0;
    for (std::int64_t k = m; k <= n; ++k) {
      worst = std::max(worst, std::abs(h[static_cast<std::size_t>(k - m)] - an.exit_up(k, m, n)));
    }
    rep.add(absolute_check("exit: tridiagonal vs closed form (" + std::to_string(m) + "," + std::to_string(n) + ")",
                           worst, 0.0, 1e-10, "analytic", {"exit"}));
  }
  return rep;
}

inline VerificationReport pgf_checks(const Analytics& an, std::int64_t x_max) {
  VerificationReport rep;
  const PgfIterator it(an);
  const auto table = it.iterate(x_max, {0.0, 0.3, 0.7, 0.99});
  double marg = 0.0, weak = 0.0;
  for (const auto& r : table.marginal) marg = std::max(marg, std::abs(r.iterated - r.closed_form));
  for (const auto& r : table.weak) weak = std::max(weak, std::abs(r.iterated - r.closed_form));
  rep.add(absolute_check("pgf: iterated vs geometric marginal, x in [0," + std::to_string(x_max) + "]", marg, 0.0, 1e-10,
                         "analytic", {"forward_loop", "upcross_law"}));
  rep.add(absolute_check("pgf: P(Y_x = 0) vs weak_prob, x in [0," + std::to_string(x_max) + "]", weak, 0.0, 1e-10, "analytic",
                         {"forward_loop", "weak_prob"}));
  const double f1 = it.f(std::min<std::int64_t>(9, x_max), 1.0);
  const double g1 = it.g(std::min<std::int64_t>(9, x_max), 1.0);
  rep.add(absolute_check("pgf: f_x(1) = 1", f1, 1.0, 1e-12, "analytic", {"forward_loop"}));
  rep.add(absolute_check("pgf: g_x(1) = 1", g1, 1.0, 1e-12, "analytic", {"forward_loop"}));
  return rep;
}

// P(Y_x = 0, Y_y = 0) by pushing the law of xi(.,up) through the branching
// transitions site by site, upcrossing counts truncated at k_max.
inline double weak_joint_by_transitions(const Analytics& an, std::int64_t x, std::int64_t y, std::int64_t k_max) {
  std::vector<double> dist(static_cast<std::size_t>(k_max) + 1, 0.0);
  for (std::int64_t k = 1; k <= k_max; ++k) dist[k] = an.upcross_law(x - 1, k);
  const double bx = an.forward_loop(x);
  double no_loop = 0.0;
  for (std::int64_t k = 1; k <= k_max; ++k) no_loop += dist[k] * std::pow(1.0 - bx, static_cast<double>(k - 1));
  for (std::int64_t j = 1; j <= k_max; ++j) dist[j] = no_loop * std::pow(bx, static_cast<double>(j - 1)) * (1.0 - bx);
  for (std::int64_t s = x + 1; s < y; ++s) {
    const double b = an.forward_loop(s);
    std::vector<double> next(dist.size(), 0.0);
    for (std::int64_t k = 1; k <= k_max; ++k) {
      if (dist[k] == 0.0) continue;
      // xi(s,up) - 1 is negative binomial with k trials given xi(s-1,up) = k
      double pmf = std::pow(1.0 - b, static_cast<double>(k));
      for (std::int64_t m = 0; m + 1 <= k_max; ++m) {
        next[m + 1] += dist[k] * pmf;
        pmf *= b * static_cast<double>(m + k) / static_cast<double>(m + 1);
      }
    }
    dist = std::move(next);
  }
  const double by = an.forward_loop(y);
  double out = 0.0;
  for (std::int64_t k = 1; k <= k_max; ++k) out += dist[k] * std::pow(1.0 - by, static_cast<double>(k - 1));
  return out;
}

inline VerificationReport identity_checks(const Analytics& an) {
  VerificationReport rep;
  for (auto [x, y] : std::vector<std::pair<std::int64_t, std::int64_t>>{{5, 12}, {9, 10}, {2, 7}}) {
    rep.add(absolute_check("identity: weak_joint(" + std::to_string(x) + "," + std::to_string(y) +
                               ") vs branching transitions",
                           an.weak_joint(x, y), weak_joint_by_transitions(an, x, y, 1000), 1e-12, "analytic",
                           {"weak_joint", "forward_loop", "upcross_law"}));
  }
  for (std::int64_t x : {5, 9, 20}) {
    for (std::int64_t b : {1, 2, 3}) {
      const SeriesValue s = an.site_law_marginal(x, b, 1e-15);
      rep.add(absolute_check("identity: sum_a site_law(" + std::to_string(x) + ",a," + std::to_string(b) +
                                 ") = upcross_law",
                             s.value, an.upcross_law(x, b), 1e-12 + s.truncation_bound, "analytic",
                             {"site_law", "upcross_law"}));
      const SeriesValue j = an.joint_upcross_marginal(x, x + 15, b, 1e-13);
      rep.add(absolute_check("identity: sum_m joint_upcross_law(" + std::to_string(x) + "," + std::to_string(x + 15) +
                                 "," + std::to_string(b) + ",m) = upcross_law",
                             j.value, an.upcross_law(x, b), 1e-10, "analytic", {"upcross_law"}));
    }
    for (std::int64_t a : {1, 2, 4}) {
      for (std::int64_t b = 1; b <= a; ++b) {
        rep.add(relative_check("identity: site_law vs pair form (" + std::to_string(x) + "," + std::to_string(a) + "," +
                                   std::to_string(b) + ")",
                               an.site_law(x, a, b), an.pair_form_prob(x, a, b), 1e-10, "analytic",
                               {"site_law", "forward_loop", "upcross_law"}));
      }
    }
    const EventProbabilities e = an.event_probabilities(x, x + 7);
    rep.add(absolute_check("identity: P(FL_x) + P(F_x) = p_x at x=" + std::to_string(x), e.forward_loop + e.escape,
                           an.p(x), 1e-14, "analytic", {"forward_loop"}));
    rep.add(absolute_check("identity: P(BL_yx) + P(B_yx) = q_y at x=" + std::to_string(x),
                           e.backward_loop_avoid + e.backward_move, an.q(x + 7), 1e-14, "analytic"));
    rep.add(absolute_check("identity: P(x in C(1,1)) = P(F_x) at x=" + std::to_string(x), an.site_law(x, 1, 1),
                           e.escape, 1e-14, "analytic", {"site_law"}));
    rep.add(absolute_check("identity: weak_joint <= weak_prob at x=" + std::to_string(x),
                           std::max(0.0, an.weak_joint(x, x + 10) - an.weak_prob(x)), 0.0, 0.0, "analytic",
                           {"weak_joint", "weak_prob"}));
  }
  return rep;
}

inline VerificationReport kernel_checks(const Analytics& an, double tol) {
  VerificationReport rep;
  const PotentialKernel& k = an.kernel();
  const Environment& env = k.environment();
  const std::int64_t top = std::min<std::int64_t>(k.max_index(), 2000);
  double rec = 0.0;
  for (std::int64_t m = 0; m < top; ++m) {
    rec = std::max(rec, std::abs(k.d_of(m) - (1.0 + env.rho_at(m + 1) * k.d_of(m + 1))) / k.d_of(m));
  }
  rep.add(absolute_check("kernel: recursion D(m) = 1 + rho D(m+1)", rec, 0.0, tol, "analytic"));
  double ident = 0.0;
  for (auto [m, n] : std::vector<std::pair<std::int64_t, std::int64_t>>{{1, 10}, {5, 60}, {30, 900}, {200, 1500}}) {
    if (n > k.max_index()) continue;
    double prod = 1.0;
    for (std::int64_t i = m; i < n; ++i) prod *= 1.0 - 1.0 / k.d_of(i);
    const double lhs = k.d_between(m, n) / k.d_of(m);
    ident = std::max(ident, std::abs(lhs - (1.0 - prod)) / (1.0 - prod));
  }
  rep.add(absolute_check("kernel: D(m,n)/D(m) = 1 - prod(1 - 1/D(i))", ident, 0.0, tol, "analytic"));
  return rep;
}

inline VerificationReport combinatorics_checks() {
  VerificationReport rep;
  bool ok = true;
  // Compositions of a into j positive parts, enumerated via bitmasks of cut positions.
  for (std::int64_t a = 1; a <= 10; ++a) {
    std::vector<std::uint64_t> by_parts(static_cast<std::size_t>(a) + 1, 0);
    for (std::uint64_t mask = 0; mask < (1ULL << (a - 1)); ++mask) {
      by_parts[static_cast<std::size_t>(std::popcount(mask)) + 1] += 1;
    }
    for (std::int64_t j = 1; j <= a; ++j) ok = ok && by_parts[j] == count_strict(a, j);
  }
  rep.add(absolute_check("combinatorics: strict compositions, a <= 10", ok ? 0.0 : 1.0, 0.0, 0.0, "enumerated"));
  ok = true;
  for (std::int64_t a = 1; a <= 9; ++a) {
    for (std::int64_t j = 1; j <= 7; ++j) {
      // nonnegative j-tuples summing to a, last entry >= 1, counted by number of nonzero entries
      std::vector<std::uint64_t> by_nonzero(static_cast<std::size_t>(j) + 1, 0);
      std::vector<std::int64_t> v(static_cast<std::size_t>(j), 0);
      std::function<void(std::int64_t, std::int64_t, std::int64_t)> rec = [&](std::int64_t pos, std::int64_t left,
                                                                              std::int64_t nz) {
        if (pos == j - 1) {
          if (left >= 1) by_nonzero[static_cast<std::size_t>(nz + 1)] += 1;
          return;
        }
        for (std::int64_t val = 0; val <= left; ++val) rec(pos + 1, left - val, nz + (val > 0 ? 1 : 0));
      };
      rec(0, a, 0);
      for (std::int64_t i = 1; i <= j; ++i) {
        const std::uint64_t expected = i <= a ? count_padded(a, j, i) : 0;
        ok = ok && by_nonzero[static_cast<std::size_t>(i)] == expected;
      }
    }
  }
  rep.add(absolute_check("combinatorics: padded compositions, a <= 9, j <= 7", ok ? 0.0 : 1.0, 0.0, 0.0,
                         "enumerated"));
  for (std::int64_t n : {50, 100, 1000}) {
    for (std::int64_t k = 1; k <= 4; ++k) {
      const double v = logsum_kfold(n, k, 1);
      const LogsumBounds b = logsum_bounds(n, k);
      const double excess = std::max(0.0, b.lower - v) + std::max(0.0, v - b.upper);
      rep.add(absolute_check("combinatorics: sandwich n=" + std::to_string(n) + " k=" + std::to_string(k), excess, 0.0,
                             0.0, "analytic"));
    }
  }
  return rep;
}

inline VerificationReport sampler_checks(std::uint64_t seed) {
  VerificationReport rep;
  const std::int64_t reps = 200000;
  for (auto [k, b] : std::vector<std::pair<std::int64_t, double>>{{1, 0.5}, {5, 0.3}, {40, 0.5}, {400, 0.45}}) {
    Xoshiro256 rng = Xoshiro256::stream(seed, static_cast<std::uint64_t>(k));
    std::vector<double> draws;
    draws.reserve(reps);
    for (std::int64_t i = 0; i < reps; ++i) draws.push_back(static_cast<double>(sample_negative_binomial(rng, k, b)));
    const MeanEstimate m = mean_estimate(draws);
    const double mean = static_cast<double>(k) * b / (1.0 - b);
    const double var = mean / (1.0 - b);
    rep.add(mc_check("samplers: negative binomial mean k=" + std::to_string(k), m.mean, m.std_error, mean, 0.0, reps));
    std::vector<double> sq;
    sq.reserve(reps);
    for (double d : draws) sq.push_back((d - mean) * (d - mean));
    const MeanEstimate v = mean_estimate(sq);
    rep.add(mc_check("samplers: negative binomial variance k=" + std::to_string(k), v.mean, v.std_error, var, 0.0,
                     reps));
    std::int64_t zeros = 0;
    for (double d : draws) zeros += d == 0.0 ? 1 : 0;
    rep.add(binned_mc("samplers: P(NB = 0) k=" + std::to_string(k), zeros, reps,
                      std::pow(1.0 - b, static_cast<double>(k)), 0.0, {}));
  }
  return rep;
}

inline VerificationReport branching_checks(const Analytics& an, std::int64_t replicas, std::uint64_t seed,
                                           unsigned workers) {
  VerificationReport rep;
  const std::int64_t x = 9;
  const BranchingSampler sampler(an, x);
  std::vector<std::int64_t> up_hits(6, 0);
  std::int64_t c21 = 0, weak = 0;
  // Per-site laws at x need the states at x-1 and x, so each replica is stepped directly.
  std::vector<std::int64_t> local(static_cast<std::size_t>(replicas) * 3, 0);
  auto body = [&](std::int64_t r) {
    Xoshiro256 rng = Xoshiro256::stream(seed, static_cast<std::uint64_t>(r));
    SiteOccupancy prev = sampler.initial(rng);
    SiteOccupancy cur = prev;
    for (std::int64_t s = 1; s <= x; ++s) {
      prev = cur;
      cur = sampler.step(prev, rng);
    }
    local[static_cast<std::size_t>(r) * 3] = cur.up;
    local[static_cast<std::size_t>(r) * 3 + 1] = site_in_kind(SetKind::local_up(2, 1), prev, cur) ? 1 : 0;
    local[static_cast<std::size_t>(r) * 3 + 2] = cur.loops_from_loops == 0 ? 1 : 0;
  };
  {
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    const unsigned w = std::max(1u, workers);
    for (unsigned t = 0; t < w; ++t) {
      pool.emplace_back([&] {
        for (std::int64_t r = next++; r < replicas; r = next++) body(r);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (std::int64_t r = 0; r < replicas; ++r) {
    const std::int64_t up = local[static_cast<std::size_t>(r) * 3];
    if (up <= 5) up_hits[static_cast<std::size_t>(up)] += 1;
    c21 += local[static_cast<std::size_t>(r) * 3 + 1];
    weak += local[static_cast<std::size_t>(r) * 3 + 2];
  }
  for (std::int64_t b = 1; b <= 5; ++b) {
    rep.add(binned_mc("branching: P(xi(9,up) = " + std::to_string(b) + ")", up_hits[static_cast<std::size_t>(b)],
                      replicas, an.upcross_law(x, b), 0.0, {"upcross_law"}));
  }
  rep.add(binned_mc("branching: P(9 in C(2,1))", c21, replicas, an.site_law(x, 2, 1), 0.0, {"site_law"}));
  rep.add(binned_mc("branching: P(9 in C_w)", weak, replicas, an.weak_prob(x), 0.0, {"weak_prob"}));
  return rep;
}

struct WalkerComparison {
  VerificationReport report;
  std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> walker_hist;
  std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> branching_hist;
};

inline WalkerComparison walker_checks(const Analytics& an, std::int64_t n, double eps, std::int64_t replicas,
                                      std::uint64_t seed, unsigned workers, bool with_branching = true) {
  WalkerComparison out;
  VerificationReport& rep = out.report;
  const Walker walker(an.kernel(), n, eps);
  const std::vector<SetKind> kinds{SetKind::weak(), SetKind::local_up(2, 1)};
  const std::int64_t probe = std::min<std::int64_t>(9, n);
  std::vector<std::int64_t> cw_counts(static_cast<std::size_t>(replicas)), c21_counts(static_cast<std::size_t>(replicas));
  std::vector<std::int64_t> probe_up(static_cast<std::size_t>(replicas)), probe_weak(static_cast<std::size_t>(replicas));
  std::vector<std::int64_t> probe_xi(static_cast<std::size_t>(replicas));
  std::vector<char> identity_ok(static_cast<std::size_t>(replicas), 1);
  walker.run_ensemble(replicas, seed, workers, [&](std::int64_t r, const PathStats& st) {
    const auto c = walker_counts(st, kinds);
    const auto i = static_cast<std::size_t>(r);
    cw_counts[i] = c[0];
    c21_counts[i] = c[1];
    probe_up[i] = st.xi_up[probe];
    probe_xi[i] = st.xi[probe];
    probe_weak[i] = weak_cut_indicator(st, probe) ? 1 : 0;
    for (std::int64_t x = 1; x <= n; ++x) {
      if (st.xi[x] != st.xi_up[x] + st.xi_up[x - 1] - 1) identity_ok[i] = 0;
      if (st.xi_down[x] != st.xi_up[x - 1] - 1) identity_ok[i] = 0;
    }
  });
  const std::string tag = "walker (n=" + std::to_string(n) + ", eps=" + std::to_string(eps) + ")";
  std::int64_t bad = 0;
  for (char ok : identity_ok) bad += ok ? 0 : 1;
  rep.add(absolute_check(tag + ": xi = xi_up(x) + xi_up(x-1) - 1 on every path", static_cast<double>(bad), 0.0, 0.0,
                         "monte-carlo (" + std::to_string(replicas) + " replicas)"));
  for (std::int64_t b = 1; b <= 3; ++b) {
    std::int64_t hits = 0;
    for (auto v : probe_up) hits += v == b ? 1 : 0;
    rep.add(binned_mc(tag + ": P(xi(" + std::to_string(probe) + ",up) = " + std::to_string(b) + ")", hits, replicas,
                      an.upcross_law(probe, b), eps, {"upcross_law"}));
  }
  for (auto [a, b] : std::vector<std::pair<std::int64_t, std::int64_t>>{{1, 1}, {2, 1}, {2, 2}, {3, 2}}) {
    std::int64_t hits = 0;
    for (std::size_t i = 0; i < probe_up.size(); ++i) hits += (probe_xi[i] == a && probe_up[i] == b) ? 1 : 0;
    rep.add(binned_mc(tag + ": P(xi(" + std::to_string(probe) + ") = " + std::to_string(a) + ", xi(" +
                          std::to_string(probe) + ",up) = " + std::to_string(b) + ")",
                      hits, replicas, an.site_law(probe, a, b), eps, {"site_law"}));
  }
  {
    std::int64_t hits = 0;
    for (auto v : probe_weak) hits += v;
    rep.add(binned_mc(tag + ": P(" + std::to_string(probe) + " in C_w)", hits, replicas, an.weak_prob(probe), eps,
                      {"weak_prob"}));
  }
  if (!with_branching) return out;

  const BranchingSampler sampler(an, n);
  const auto runs = sampler.run_ensemble(n, kinds, replicas, seed ^ 0x5bd1e995ULL, workers);
  std::vector<double> wcw, wc21, bcw, bc21;
  for (std::int64_t r = 0; r < replicas; ++r) {
    const auto i = static_cast<std::size_t>(r);
    wcw.push_back(static_cast<double>(cw_counts[i]));
    wc21.push_back(static_cast<double>(c21_counts[i]));
    bcw.push_back(static_cast<double>(runs[i].counts[0]));
    bc21.push_back(static_cast<double>(runs[i].counts[1]));
    out.walker_hist[{cw_counts[i], c21_counts[i]}] += 1;
    out.branching_hist[{runs[i].counts[0], runs[i].counts[1]}] += 1;
  }
  const double bias = eps * static_cast<double>(n);
  auto diff_check = [&](const std::string& name, const std::vector<double>& a, const std::vector<double>& b) {
    const MeanEstimate ma = mean_estimate(a);
    const MeanEstimate mb = mean_estimate(b);
    const double se = std::sqrt(ma.std_error * ma.std_error + mb.std_error * mb.std_error);
    rep.add(mc_check(name, ma.mean - mb.mean, se, 0.0, bias, replicas));
  };
  diff_check(tag + " vs branching: mean |C_w cap [1,n]|", wcw, bcw);
  diff_check(tag + " vs branching: mean |C(2,1) cap [1,n]|", wc21, bc21);
  const ChiSquareResult chi = chi_square_homogeneity(out.walker_hist, out.branching_hist);
  Check c;
  c.name = tag + " vs branching: joint histogram chi-square p-value";
  c.lhs = chi.p_value;
  c.rhs = 0.001;
  c.tolerance = 0.0;
  c.passed = chi.p_value > 0.001;
  c.provenance = "monte-carlo (" + std::to_string(replicas) + " replicas each)";
  rep.add(c);
  return out;
}

}  // namespace detail

inline bool suite_known(const std::string& s) {
  return s == "all" || s == "exit" || s == "pgf" || s == "walker" || s == "branching" || s == "samplers" ||
         s == "combinatorics";
}

inline VerificationReport cross_check_suite(const SuiteConfig& cfg) {
  if (!suite_known(cfg.suite)) throw std::invalid_argument("unknown suite: " + cfg.suite);
  const auto want = [&](const char* s) { return cfg.suite == "all" || cfg.suite == s; };
  const std::int64_t kernel_top = std::max<std::int64_t>({cfg.pgf_x_max, cfg.walker_n, 5000, 2000});
  const PotentialKernel kernel(Environment(cfg.family), kernel_top);
  const Analytics an(kernel, cfg.perturbation);
  VerificationReport rep;
  if (want("exit")) {
    rep.merge(detail::exit_checks(an));
    if (cfg.family.family != Family::harmonic) rep.merge(detail::kernel_checks(an, cfg.kernel_tolerance));
  }
  if (want("pgf")) rep.merge(detail::pgf_checks(an, cfg.pgf_x_max));
  if (cfg.suite == "all") rep.merge(detail::identity_checks(an));
  if (want("combinatorics")) rep.merge(detail::combinatorics_checks());
  if (want("samplers")) rep.merge(detail::sampler_checks(cfg.seed));
  if (want("branching")) rep.merge(detail::branching_checks(an, cfg.branching_replicas, cfg.seed, cfg.workers));
  if (want("walker")) {
    rep.merge(detail::walker_checks(an, cfg.walker_n, cfg.walker_eps, cfg.walker_replicas, cfg.seed, cfg.workers)
                  .report);
  }
  return rep;
}

}  // namespace lamperti

#endif  // LAMPERTI_ORACLE_HPP
