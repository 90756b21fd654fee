#ifndef LAMPERTI_WALKER_HPP
#define LAMPERTI_WALKER_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "lamperti/detail/numeric.hpp"
#include "lamperti/environment.hpp"
#include "lamperti/rng.hpp"
#include "lamperti/set_kind.hpp"

namespace lamperti {

class StepBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-site tallies of one path, stopped when it first reaches the horizon.
struct PathStats {
  std::int64_t n = 0;
  std::int64_t horizon = 0;
  std::vector<std::int64_t> first_hit;   // x = 0..n+1, -1 if never
  std::vector<std::int64_t> last_visit;  // x = 0..n
  std::vector<std::int64_t> xi;          // x = 0..n
  std::vector<std::int64_t> xi_up;       // x = 0..n
  std::vector<std::int64_t> xi_down;     // x = 0..n
  double truncation_eps = 0.0;
  std::int64_t steps = 0;
};

// Smallest H > n with 1 - D(n,H)/D(n) <= eps, i.e. the chance of returning
// to n after reaching H is at most eps.
inline std::int64_t horizon_for(const PotentialKernel& kernel, std::int64_t n, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("horizon_for requires eps in (0,1)");
  if (n < 0) throw std::invalid_argument("horizon_for requires n >= 0");
  const Environment& env = kernel.environment();
  const double dn = kernel.d_of(n);
  const double target = (1.0 - eps * (1.0 + 1e-12)) * dn;
  detail::CompensatedSum dnh;
  dnh += 1.0;  // D(n, n+1)
  double prod = 1.0;
  for (std::int64_t h = n + 1;; ++h) {
    if (dnh.value() >= target) return h;
    prod *= env.rho_at(h);
    dnh += prod;  // D(n, h+1)
    if (h > 4000000000LL) throw std::runtime_error("horizon_for: no horizon below 4e9");
  }
}

// Runs the walk from 0 until it first reaches the horizon. go_up(x) decides
// each step away from x >= 1 (site 0 always steps up); observe(t, x) is called
// for every visited position.
template <class GoUp, class Observe>
PathStats walk_until(std::int64_t n, std::int64_t horizon, double eps, GoUp&& go_up, Observe&& observe) {
  if (n < 1 || horizon <= n) throw std::invalid_argument("walk_until requires 1 <= n < horizon");
  PathStats st;
  st.n = n;
  st.horizon = horizon;
  st.truncation_eps = eps;
  const auto sz = static_cast<std::size_t>(n) + 1;
  st.first_hit.assign(sz + 1, -1);
  st.last_visit.assign(sz, -1);
  st.xi.assign(sz, 0);
  st.xi_up.assign(sz, 0);
  st.xi_down.assign(sz, 0);
  const long double hh = static_cast<long double>(horizon);
  const std::int64_t budget = static_cast<std::int64_t>(std::min<long double>(100.0L * hh * hh, 9.0e18L));

  std::int64_t x = 0;
  std::int64_t t = 0;
  st.first_hit[0] = 0;
  while (true) {
    observe(t, x);
    if (x <= n) {
      st.xi[x] += 1;
      st.last_visit[x] = t;
    }
    if (x == horizon) break;
    if (t >= budget) throw StepBudgetExceeded("walker step budget exceeded");
    const bool up = x == 0 || go_up(x);
    if (up) {
      if (x <= n) st.xi_up[x] += 1;
      ++x;
      if (x <= n + 1 && st.first_hit[x] < 0) st.first_hit[x] = t + 1;
    } else {
      if (x <= n) st.xi_down[x] += 1;
      --x;
    }
    ++t;
  }
  st.steps = t;
  return st;
}

class Walker {
 public:
  Walker(const PotentialKernel& kernel, std::int64_t n, double eps)
      : n_(n), eps_(eps), horizon_(horizon_for(kernel, n, eps)) {
    const Environment& env = kernel.environment();
    threshold_.resize(static_cast<std::size_t>(horizon_) + 1);
    for (std::int64_t x = 0; x <= horizon_; ++x) {
      const long double pu = env.p_at(x);
      threshold_[x] = pu >= 1.0L ? UINT64_MAX : static_cast<std::uint64_t>(std::ldexp(pu, 64));
    }
  }

  std::int64_t n() const { return n_; }
  std::int64_t horizon() const { return horizon_; }
  double eps() const { return eps_; }

  PathStats run(Xoshiro256& rng) const {
    return walk_until(n_, horizon_, eps_, [&](std::int64_t x) { return rng() < threshold_[x]; },
                      [](std::int64_t, std::int64_t) {});
  }

  PathStats run_replica(std::uint64_t seed, std::uint64_t replica) const {
    Xoshiro256 rng = Xoshiro256::stream(seed, replica);
    return run(rng);
  }

  template <class F>
  void run_ensemble(std::int64_t replicas, std::uint64_t seed, unsigned workers, F&& consume) const {
    workers = std::max(1u, workers);
    std::atomic<std::int64_t> next{0};
    auto work = [&] {
      for (std::int64_t r = next++; r < replicas; r = next++) {
        consume(r, run_replica(seed, static_cast<std::uint64_t>(r)));
      }
    };
    if (workers == 1) {
      work();
      return;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

 private:
  std::int64_t n_;
  double eps_;
  std::int64_t horizon_;
  std::vector<std::uint64_t> threshold_;
};

// x is a weak cutpoint iff the last visit to x-1 precedes the first visit to x+1.
inline bool weak_cut_indicator(const PathStats& st, std::int64_t x) {
  if (x < 1 || x > st.n) throw std::invalid_argument("weak_cut_indicator requires 1 <= x <= n");
  return st.last_visit[x - 1] < st.first_hit[x + 1];
}

inline bool walker_in_kind(const PathStats& st, std::int64_t x, const SetKind& kind) {
  const std::int64_t xi = st.xi[x];
  const std::int64_t up = st.xi_up[x];
  switch (kind.tag) {
    case SetKind::Tag::cw:
      return weak_cut_indicator(st, x);
    case SetKind::Tag::cab:
      return xi == kind.a && up == kind.b;
    case SetKind::Tag::cstar:
      return up == kind.a;
    case SetKind::Tag::cAa:
      return up == kind.a && std::binary_search(kind.set.begin(), kind.set.end(), xi);
    case SetKind::Tag::caB:
      return xi == kind.a && std::binary_search(kind.set.begin(), kind.set.end(), up);
  }
  return false;
}

// |C cap [1, n]| for each kind on one path.
inline std::vector<std::int64_t> walker_counts(const PathStats& st, const std::vector<SetKind>& kinds) {
  std::vector<std::int64_t> out(kinds.size(), 0);
  for (std::int64_t x = 1; x <= st.n; ++x) {
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      if (walker_in_kind(st, x, kinds[i])) ++out[i];
    }
  }
  return out;
}

}  // namespace lamperti

#endif  // LAMPERTI_WALKER_HPP
