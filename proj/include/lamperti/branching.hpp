#ifndef LAMPERTI_BRANCHING_HPP
#define LAMPERTI_BRANCHING_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "lamperti/analytics.hpp"
#include "lamperti/rng.hpp"
#include "lamperti/samplers.hpp"
#include "lamperti/set_kind.hpp"

namespace lamperti {

struct SiteOccupancy {
  std::int64_t x = 0;
  std::int64_t up = 1;                 // xi(x,up)
  std::int64_t loops_from_loops = 0;   // Y_x
  std::int64_t loops_from_escape = 0;  // zeta(x)
};

// Local time at x given the occupancies at x-1 and x.
inline std::int64_t local_time(const SiteOccupancy& prev, const SiteOccupancy& cur) {
  return prev.up + cur.up - 1;
}

struct GeometricParam {
  std::int64_t x = 0;
  double loop = 0.0;  // B = p_x (1 - 1/D(x))
};

struct CountSummary {
  std::int64_t n = 0;
  std::vector<SetKind> kinds;
  std::vector<std::int64_t> counts;
  std::vector<double> scaled;

  std::int64_t count(const SetKind& kind) const {
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      if (kinds[i] == kind) return counts[i];
    }
    throw std::out_of_range("kind not tracked: " + kind.label());
  }
};

inline bool site_in_kind(const SetKind& kind, const SiteOccupancy& prev, const SiteOccupancy& cur) {
  switch (kind.tag) {
    case SetKind::Tag::cw:
      return cur.loops_from_loops == 0;
    case SetKind::Tag::cab:
      return cur.up == kind.b && prev.up == kind.a - kind.b + 1;
    case SetKind::Tag::cstar:
      return cur.up == kind.a;
    case SetKind::Tag::cAa:
      return cur.up == kind.a &&
             std::binary_search(kind.set.begin(), kind.set.end(), local_time(prev, cur));
    case SetKind::Tag::caB:
      return local_time(prev, cur) == kind.a && std::binary_search(kind.set.begin(), kind.set.end(), cur.up);
  }
  return false;
}

// Samples the upcrossing counts site by site via the branching process with
// immigration: each of the xi(x-1,up)-1 returning excursions over x-1 spawns a
// geometric number of loops at x, and the final escape spawns another.
class BranchingSampler {
 public:
  BranchingSampler(const Analytics& analytics, std::int64_t max_site)
      : loop_(static_cast<std::size_t>(max_site) + 1) {
    if (max_site < 0) throw std::invalid_argument("max_site must be >= 0");
    for (std::int64_t x = 0; x <= max_site; ++x) loop_[x] = analytics.forward_loop(x);
  }

  std::int64_t max_site() const { return static_cast<std::int64_t>(loop_.size()) - 1; }

  GeometricParam geom_param(std::int64_t x) const {
    if (x < 0 || x > max_site()) throw std::out_of_range("geom_param outside sampler range");
    return {x, loop_[x]};
  }

  SiteOccupancy initial(Xoshiro256& rng) const {
    const std::int64_t z = sample_geometric(rng, loop_[0]);
    return {0, z + 1, 0, z};
  }

  SiteOccupancy step(const SiteOccupancy& prev, Xoshiro256& rng) const {
    const std::int64_t x = prev.x + 1;
    if (x > max_site()) throw std::out_of_range("step beyond sampler range");
    const double b = loop_[x];
    SiteOccupancy cur;
    cur.x = x;
    cur.loops_from_loops = sample_negative_binomial(rng, prev.up - 1, b);
    cur.loops_from_escape = sample_geometric(rng, b);
    cur.up = cur.loops_from_loops + cur.loops_from_escape + 1;
    return cur;
  }

  CountSummary run_replica(std::int64_t n, const std::vector<SetKind>& kinds, std::uint64_t seed,
                           std::uint64_t replica = 0) const {
    if (n < 1 || n > max_site()) throw std::invalid_argument("run_replica: n outside [1, max_site]");
    Xoshiro256 rng = Xoshiro256::stream(seed, replica);
    CountSummary out;
    out.n = n;
    out.kinds = kinds;
    out.counts.assign(kinds.size(), 0);
    SiteOccupancy prev = initial(rng);
    for (std::int64_t x = 1; x <= n; ++x) {
      const SiteOccupancy cur = step(prev, rng);
      for (std::size_t i = 0; i < kinds.size(); ++i) {
        if (site_in_kind(kinds[i], prev, cur)) ++out.counts[i];
      }
      prev = cur;
    }
    const double ln = std::log(static_cast<double>(n));
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      const double denom = Analytics::lambda_const(kinds[i]) * ln;
      out.scaled.push_back(denom > 0.0 ? static_cast<double>(out.counts[i]) / denom : 0.0);
    }
    return out;
  }

  // Replica r always uses stream (seed, r), so the result does not depend on workers.
  std::vector<CountSummary> run_ensemble(std::int64_t n, const std::vector<SetKind>& kinds, std::int64_t replicas,
                                         std::uint64_t seed, unsigned workers = 1) const {
    if (replicas < 0) throw std::invalid_argument("replicas must be >= 0");
    std::vector<CountSummary> out(static_cast<std::size_t>(replicas));
    parallel_for(replicas, workers, [&](std::int64_t r) {
      out[static_cast<std::size_t>(r)] = run_replica(n, kinds, seed, static_cast<std::uint64_t>(r));
    });
    return out;
  }

 private:
  template <class F>
  static void parallel_for(std::int64_t count, unsigned workers, F&& body) {
    workers = std::max(1u, workers);
    if (workers == 1 || count < 2) {
      for (std::int64_t i = 0; i < count; ++i) body(i);
      return;
    }
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::int64_t i = next++; i < count; i = next++) body(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::vector<double> loop_;
};

struct PgfRow {
  std::int64_t x = 0;
  double s = 0.0;
  double iterated = 0.0;
  double closed_form = 0.0;
};

struct PgfWeakRow {
  std::int64_t x = 0;
  double iterated = 0.0;   // G_{x-1}(1 - B_x) / (1 - B_x)
  double closed_form = 0.0;  // weak_prob(x)
};

struct PgfTable {
  std::vector<PgfRow> marginal;
  std::vector<PgfWeakRow> weak;
  double max_deviation = 0.0;
};

// Generating functions of xi(x,up) obtained by composing the one-step maps
//   G_0(s) = s (1/D(0)) / (1 - s (1 - 1/D(0))),
//   G_x(s) = s g_x(s) G_{x-1}(f_x(s)) / f_x(s).
class PgfIterator {
 public:
  explicit PgfIterator(const Analytics& analytics) : an_(&analytics) {}

  double f(std::int64_t x, double s) const {
    return an_->q(x) / ((1.0 - 1.0 / an_->d(x - 1)) * (1.0 - s * an_->forward_loop(x)));
  }

  double g(std::int64_t x, double s) const {
    return (an_->p(x) / an_->d(x)) / ((1.0 / an_->d(x - 1)) * (1.0 - s * an_->forward_loop(x)));
  }

  double pgf(std::int64_t x, double s) const {
    if (x == 0) {
      const double d0 = an_->d(0);
      return s * (1.0 / d0) / (1.0 - s * (1.0 - 1.0 / d0));
    }
    const double fs = f(x, s);
    return s * g(x, s) * pgf(x - 1, fs) / fs;
  }

  static double closed_form(double d, double s) { return (s / d) / (1.0 - s * (1.0 - 1.0 / d)); }

  double weak_from_pgf(std::int64_t x) const {
    const double one_minus_b = 1.0 - an_->forward_loop(x);
    return pgf(x - 1, one_minus_b) / one_minus_b;
  }

  PgfTable iterate(std::int64_t x_max, const std::vector<double>& s_grid) const {
    PgfTable t;
    for (std::int64_t x = 0; x <= x_max; ++x) {
      for (double s : s_grid) {
        if (!(s >= 0.0 && s < 1.0)) throw std::invalid_argument("pgf argument outside [0,1)");
        PgfRow row{x, s, pgf(x, s), closed_form(1.0 / an_->upcross_law(x, 1), s)};
        t.max_deviation = std::max(t.max_deviation, std::abs(row.iterated - row.closed_form));
        t.marginal.push_back(row);
      }
      if (x >= 1) {
        PgfWeakRow w{x, weak_from_pgf(x), an_->weak_prob(x)};
        t.max_deviation = std::max(t.max_deviation, std::abs(w.iterated - w.closed_form));
        t.weak.push_back(w);
      }
    }
    return t;
  }

 private:
  const Analytics* an_;
};

}  // namespace lamperti

#endif  // LAMPERTI_BRANCHING_HPP
