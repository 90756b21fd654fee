#ifndef LAMPERTI_STATS_HPP
#define LAMPERTI_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "lamperti/analytics.hpp"
#include "lamperti/branching.hpp"
#include "lamperti/detail/numeric.hpp"
#include "lamperti/set_kind.hpp"

namespace lamperti {

struct ReplicaEnsemble {
  std::int64_t n = 0;
  SetKind kind;
  std::uint64_t seed = 0;
  std::vector<double> scaled_values;

  std::size_t replicas() const { return scaled_values.size(); }
};

// Extracts the scaled values of one kind from a batch of replica summaries.
inline ReplicaEnsemble make_ensemble(const std::vector<CountSummary>& runs, const SetKind& kind, std::uint64_t seed) {
  ReplicaEnsemble e;
  e.kind = kind;
  e.seed = seed;
  if (!runs.empty()) e.n = runs.front().n;
  for (const auto& r : runs) {
    for (std::size_t i = 0; i < r.kinds.size(); ++i) {
      if (r.kinds[i] == kind) e.scaled_values.push_back(r.scaled[i]);
    }
  }
  if (e.scaled_values.size() != runs.size()) throw std::invalid_argument("kind missing from some replicas");
  return e;
}

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double variance = 0.0;
};

inline MeanEstimate mean_estimate(const std::vector<double>& v) {
  if (v.empty()) return {};
  detail::CompensatedSum s;
  for (double x : v) s += x;
  const double mean = s.value() / static_cast<double>(v.size());
  detail::CompensatedSum ss;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double var = v.size() > 1 ? ss.value() / static_cast<double>(v.size() - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(v.size())), var};
}

struct MomentEstimate {
  std::vector<double> moments;     // E[X^k], k = 1..k_max
  std::vector<double> std_errors;
};

inline MomentEstimate sample_moments(const std::vector<double>& values, int k_max) {
  if (k_max < 1 || k_max > 4) throw std::invalid_argument("sample_moments supports 1 <= k_max <= 4");
  MomentEstimate out;
  for (int k = 1; k <= k_max; ++k) {
    std::vector<double> powk;
    powk.reserve(values.size());
    for (double x : values) powk.push_back(std::pow(x, k));
    const MeanEstimate m = mean_estimate(powk);
    out.moments.push_back(m.mean);
    out.std_errors.push_back(m.std_error);
  }
  return out;
}

inline MomentEstimate sample_moments(const ReplicaEnsemble& e, int k_max) {
  return sample_moments(e.scaled_values, k_max);
}

// sup_t |F_n(t) - (1 - e^{-t})|
inline double ks_exp1(std::vector<double> values) {
  if (values.size() < 100) throw std::invalid_argument("ks_exp1 needs at least 100 values");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double t = values[i];
    const double cdf = t > 0.0 ? -std::expm1(-t) : 0.0;
    // Empirical CDF jumps at t; compare both sides, but only at the last of a tied run.
    if (i + 1 < values.size() && values[i + 1] == t) {
      d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
      continue;
    }
    d = std::max({d, std::abs(static_cast<double>(i + 1) / n - cdf), std::abs(cdf - static_cast<double>(i) / n)});
  }
  return d;
}

inline double ks_exp1(const ReplicaEnsemble& e) { return ks_exp1(e.scaled_values); }

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// Two-sample homogeneity test on categorical data. Cells whose pooled count is
// below min_pooled are merged into one residual cell.
template <class Key>
ChiSquareResult chi_square_homogeneity(const std::map<Key, std::int64_t>& a, const std::map<Key, std::int64_t>& b,
                                       std::int64_t min_pooled = 10) {
  std::map<Key, std::pair<double, double>> cells;
  for (const auto& [k, v] : a) cells[k].first += static_cast<double>(v);
  for (const auto& [k, v] : b) cells[k].second += static_cast<double>(v);
  std::vector<std::pair<double, double>> merged;
  std::pair<double, double> rest{0.0, 0.0};
  for (const auto& [k, c] : cells) {
    if (c.first + c.second >= static_cast<double>(min_pooled)) {
      merged.push_back(c);
    } else {
      rest.first += c.first;
      rest.second += c.second;
    }
  }
  if (rest.first + rest.second > 0.0) merged.push_back(rest);
  double na = 0.0, nb = 0.0;
  for (const auto& c : merged) {
    na += c.first;
    nb += c.second;
  }
  ChiSquareResult r;
  if (merged.size() < 2 || na == 0.0 || nb == 0.0) return r;
  const double total = na + nb;
  for (const auto& c : merged) {
    const double pooled = c.first + c.second;
    const double ea = pooled * na / total;
    const double eb = pooled * nb / total;
    r.statistic += (c.first - ea) * (c.first - ea) / ea + (c.second - eb) * (c.second - eb) / eb;
  }
  r.dof = static_cast<int>(merged.size()) - 1;
  boost::math::chi_squared dist(r.dof);
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

struct LimitLawRow {
  std::int64_t n = 0;
  std::string kind;
  std::int64_t replicas = 0;
  double moment1 = 0.0;
  double moment1_se = 0.0;
  double moment2 = 0.0;
  double moment2_se = 0.0;
  double ks = 0.0;
  double exact_mean = 0.0;  // E|C cap [1,n]| / (lambda log n)
};

// Runs the branching sampler for every n and reports the scaled statistics of each kind.
inline std::vector<LimitLawRow> limit_law_report(const Analytics& analytics, const std::vector<std::int64_t>& n_list,
                                                 const std::vector<SetKind>& kinds, std::int64_t replicas,
                                                 std::uint64_t seed, unsigned workers = 1) {
  if (n_list.empty()) return {};
  const std::int64_t n_max = *std::max_element(n_list.begin(), n_list.end());
  const BranchingSampler sampler(analytics, n_max);
  std::vector<LimitLawRow> rows;
  for (auto n : n_list) {
    const auto runs = sampler.run_ensemble(n, kinds, replicas, seed, workers);
    for (const auto& kind : kinds) {
      const ReplicaEnsemble e = make_ensemble(runs, kind, seed);
      const MomentEstimate m = sample_moments(e, 2);
      LimitLawRow row;
      row.n = n;
      row.kind = kind.label();
      row.replicas = replicas;
      row.moment1 = m.moments[0];
      row.moment1_se = m.std_errors[0];
      row.moment2 = m.moments[1];
      row.moment2_se = m.std_errors[1];
      row.ks = e.replicas() >= 100 ? ks_exp1(e) : std::nan("");
      row.exact_mean = analytics.expected_count(n, kind) /
                       (Analytics::lambda_const(kind) * std::log(static_cast<double>(n)));
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace lamperti

#endif  // LAMPERTI_STATS_HPP
