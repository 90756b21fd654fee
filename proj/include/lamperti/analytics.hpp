#ifndef LAMPERTI_ANALYTICS_HPP
#define LAMPERTI_ANALYTICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "lamperti/combinatorics.hpp"
#include "lamperti/detail/numeric.hpp"
#include "lamperti/environment.hpp"
#include "lamperti/set_kind.hpp"

namespace lamperti {

struct EventProbabilities {
  double forward_loop = 0.0;          // FL_x
  double forward_loop_avoid = 0.0;    // FL_xy
  double forward_move = 0.0;          // F_xy
  double escape = 0.0;                // F_x
  double backward_loop = 0.0;         // BL_x
  double backward_loop_avoid = 0.0;   // BL_yx
  double backward_move = 0.0;         // B_yx
};

struct SeriesValue {
  double value = 0.0;
  double truncation_bound = 0.0;
  std::int64_t terms = 0;
};

// Deliberate multiplicative error injected into one formula; used to check that
// the verification harness notices broken formulas.
struct FormulaPerturbation {
  enum class Target { none, exit, forward_loop, site_law, upcross_law, weak_prob, weak_joint };
  Target target = Target::none;
  double relative = 0.0;

  double apply(Target t, double v) const { return t == target ? v * (1.0 + relative) : v; }
};

struct LimitRatioRow {
  std::int64_t x = 0;
  std::int64_t y = 0;
  double d_times_prob = 0.0;      // D(x) P(x in C)
  double pair_ratio = 0.0;        // D(x,y)/D(x) P(x,y in C) / (P(x in C) P(y in C))
  double conditional_scaled = 0.0;  // P(y in C | x in C) D(x,y) D(y) / D(x)
  double lambda = 0.0;
};

namespace detail {

inline double log_binomial(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace detail

class Analytics {
 public:
  explicit Analytics(const PotentialKernel& kernel, FormulaPerturbation perturbation = {})
      : kernel_(&kernel), env_(&kernel.environment()), perturb_(perturbation) {}

  const PotentialKernel& kernel() const { return *kernel_; }
  double d(std::int64_t m) const { return kernel_->d_of(m); }
  double d(std::int64_t m, std::int64_t n) const { return kernel_->d_between(m, n); }
  double p(std::int64_t n) const { return env_->p_at(n); }
  double q(std::int64_t n) const { return env_->q_at(n); }

  // Probability that the walk started at k hits m before n.
  double exit_down(std::int64_t k, std::int64_t m, std::int64_t n) const {
    if (m < 0 || k < m || n < k || n == m) throw std::invalid_argument("exit requires 0 <= m <= k <= n, m < n");
    return perturb_.apply(FormulaPerturbation::Target::exit, 1.0 - d(m, k) / d(m, n));
  }
  double exit_up(std::int64_t k, std::int64_t m, std::int64_t n) const {
    return 1.0 - exit_down(k, m, n);
  }

  double forward_loop(std::int64_t x) const {
    return perturb_.apply(FormulaPerturbation::Target::forward_loop, p(x) * (1.0 - 1.0 / d(x)));
  }

  EventProbabilities event_probabilities(std::int64_t x, std::int64_t y) const {
    if (x < 0 || y <= x) throw std::invalid_argument("event_probabilities requires 0 <= x < y");
    const double dxy = d(x, y);
    const double ratio = d(x, y - 1) / dxy;
    EventProbabilities e;
    e.forward_loop = forward_loop(x);
    e.forward_loop_avoid = p(x) * (1.0 - 1.0 / dxy);
    e.forward_move = p(x) / dxy;
    e.escape = p(x) / d(x);
    e.backward_loop = q(x);
    e.backward_loop_avoid = q(y) * ratio;
    e.backward_move = q(y) * (1.0 - ratio);
    return e;
  }

  // P(xi(x) = a, xi(x,up) = b)
  double site_law(std::int64_t x, std::int64_t a, std::int64_t b) const {
    if (x < 1) throw std::invalid_argument("site_law requires x >= 1");
    if (b < 1 || a < b) throw std::invalid_argument("site_law requires a >= b >= 1");
    const double dx = d(x);
    double v;
    if (a <= 60) {
      v = detail::binomial_real(a - 1, b - 1) * detail::ipow(p(x), b) * detail::ipow(q(x), a - b) *
          detail::ipow(1.0 - 1.0 / dx, b - 1) / dx;
    } else {
      const double lv = detail::log_binomial(a - 1, b - 1) + static_cast<double>(b) * std::log(p(x)) +
                        static_cast<double>(a - b) * std::log(q(x)) +
                        static_cast<double>(b - 1) * std::log1p(-1.0 / dx) - std::log(dx);
      v = std::exp(lv);
    }
    return perturb_.apply(FormulaPerturbation::Target::site_law, v);
  }

  // P(xi(x,up) = b)
  double upcross_law(std::int64_t x, std::int64_t b) const {
    if (x < 0 || b < 1) throw std::invalid_argument("upcross_law requires x >= 0, b >= 1");
    const double dx = d(x);
    return perturb_.apply(FormulaPerturbation::Target::upcross_law,
                          std::exp(static_cast<double>(b - 1) * std::log1p(-1.0 / dx)) / dx);
  }

  // P(x in C_w)
  double weak_prob(std::int64_t x) const {
    if (x < 1) throw std::invalid_argument("weak_prob requires x >= 1");
    return perturb_.apply(FormulaPerturbation::Target::weak_prob, 1.0 / (p(x) * d(x - 1)));
  }

  // P(x in C_w, y in C_w)
  double weak_joint(std::int64_t x, std::int64_t y) const {
    if (x < 1 || y <= x) throw std::invalid_argument("weak_joint requires 1 <= x < y");
    const double dxy = d(x - 1, y);
    const double v = 1.0 / (p(x) * dxy) / (1.0 - q(y) * d(x - 1, y - 1) / dxy) / d(y - 1);
    return perturb_.apply(FormulaPerturbation::Target::weak_joint, v);
  }

  // P(xi(x) = a, xi(x,up) = b, xi(y) = n, xi(y,up) = m)
  double joint_site_law(std::int64_t x, std::int64_t y, std::int64_t a, std::int64_t b, std::int64_t n,
                        std::int64_t m) const {
    if (x < 1 || y <= x) throw std::invalid_argument("joint_site_law requires 1 <= x < y");
    if (b < 1 || a < b || m < 1 || n < m) throw std::invalid_argument("joint_site_law requires a >= b >= 1, n >= m >= 1");
    const double dxy = d(x, y);
    const double dy = d(y);
    const double ratio = d(x, y - 1) / dxy;
    const double px = p(x), qx = q(x), py = p(y), qy = q(y);
    const double common = detail::binomial_real(a - 1, b - 1) * detail::ipow(qx, a - b) * (py / dy) *
                          detail::ipow(py * (1.0 - 1.0 / dy), m - 1);
    detail::CompensatedSum sum;
    const std::int64_t top = std::min(b, n - m + 1);
    for (std::int64_t i = 1; i <= top; ++i) {
      const double comb = detail::binomial_real(b - 1, i - 1) * detail::binomial_real(n - i, m - 1) *
                          detail::binomial_real(n - 1, i - 1);
      sum += comb * detail::ipow(px * (1.0 - 1.0 / dxy), b - i) * detail::ipow(px / dxy, i) *
             detail::ipow(qy * ratio, n - m - i + 1) * detail::ipow(qy * (1.0 - ratio), i - 1);
    }
    return common * sum.value();
  }

  // P(xi(x,up) = b, xi(y,up) = m)
  double joint_upcross_law(std::int64_t x, std::int64_t y, std::int64_t b, std::int64_t m) const {
    if (x < 1 || y <= x) throw std::invalid_argument("joint_upcross_law requires 1 <= x < y");
    if (b < 1 || m < 1) throw std::invalid_argument("joint_upcross_law requires b, m >= 1");
    const JointParts jp = joint_parts(x, y);
    detail::CompensatedSum sum;
    for (std::int64_t i = 1; i <= b; ++i) sum += joint_term(jp, b, m, i);
    return sum.value();
  }

  // sum_{m>=1} P(xi(x,up) = b, xi(y,up) = m), truncated once the certified tail is below tol.
  SeriesValue joint_upcross_marginal(std::int64_t x, std::int64_t y, std::int64_t b, double tol = 1e-14) const {
    if (x < 1 || y <= x || b < 1) throw std::invalid_argument("joint_upcross_marginal: bad indices");
    const JointParts jp = joint_parts(x, y);
    detail::CompensatedSum sum;
    for (std::int64_t m = 1;; ++m) {
      for (std::int64_t i = 1; i <= b; ++i) sum += joint_term(jp, b, m, i);
      // For m' > m the ratio of consecutive terms is (m'+i-2)/(m'-1) * theta <= (m+i-1)/m * theta.
      double bound = 0.0;
      bool certified = true;
      for (std::int64_t i = 1; i <= b; ++i) {
        const double r = static_cast<double>(m + i - 1) / static_cast<double>(m) * jp.theta;
        if (r >= 1.0) {
          certified = false;
          break;
        }
        bound += joint_term(jp, b, m + 1, i) / (1.0 - r);
      }
      if (certified && bound < tol) return {sum.value(), bound, m};
      if (m > 100000000) throw std::runtime_error("joint_upcross_marginal did not converge");
    }
  }

  // sum_{a>=b} P(xi(x) = a, xi(x,up) = b), truncated once the certified tail is below tol.
  SeriesValue site_law_marginal(std::int64_t x, std::int64_t b, double tol = 1e-14) const {
    detail::CompensatedSum sum;
    const double qx = q(x);
    for (std::int64_t a = b;; ++a) {
      sum += site_law(x, a, b);
      // Terms for a' > a shrink by a'/(a'-b+1) * q_x <= (a+1)/(a-b+2) * q_x.
      const double r = static_cast<double>(a + 1) / static_cast<double>(a - b + 2) * qx;
      if (r < 1.0) {
        const double bound = site_law(x, a + 1, b) / (1.0 - r);
        if (bound < tol) return {sum.value(), bound, a - b + 1};
      }
      if (a - b > 100000000) throw std::runtime_error("site_law_marginal did not converge");
    }
  }

  static double lambda_const(const SetKind& kind) {
    switch (kind.tag) {
      case SetKind::Tag::cw:
        return 2.0;
      case SetKind::Tag::cstar:
        return 1.0;
      default: {
        double s = 0.0;
        for (auto [a, b] : kind.components()) {
          s += detail::binomial_real(a - 1, b - 1) * std::ldexp(1.0, -static_cast<int>(a));
        }
        return s;
      }
    }
  }

  // P(x in C), with the single-site local time law for the (a,b) kinds.
  double membership_prob(std::int64_t x, const SetKind& kind) const {
    switch (kind.tag) {
      case SetKind::Tag::cw:
        return weak_prob(x);
      case SetKind::Tag::cstar:
        return upcross_law(x, kind.a);
      default: {
        double s = 0.0;
        for (auto [a, b] : kind.components()) s += site_law(x, a, b);
        return s;
      }
    }
  }

  // P(xi(x-1,up) = a-b+1, xi(x,up) = b): the same probability read off the
  // branching transition between consecutive sites.
  double pair_form_prob(std::int64_t x, std::int64_t a, std::int64_t b) const {
    if (x < 1 || b < 1 || a < b) throw std::invalid_argument("pair_form_prob requires x >= 1, a >= b >= 1");
    const std::int64_t k = a - b;
    const double big_b = forward_loop(x);
    const double lt = detail::log_binomial(b - 1 + k, k) + static_cast<double>(k + 1) * std::log1p(-big_b) +
                      static_cast<double>(b - 1) * std::log(big_b);
    return upcross_law(x - 1, k + 1) * std::exp(lt);
  }

  double membership_prob_pair(std::int64_t x, const SetKind& kind) const {
    switch (kind.tag) {
      case SetKind::Tag::cw:
      case SetKind::Tag::cstar:
        return membership_prob(x, kind);
      default: {
        double s = 0.0;
        for (auto [a, b] : kind.components()) s += pair_form_prob(x, a, b);
        return s;
      }
    }
  }

  // E |C intersect [1, n]|
  double expected_count(std::int64_t n, const SetKind& kind) const {
    if (n < 1) throw std::invalid_argument("expected_count requires n >= 1");
    detail::CompensatedSum s;
    for (std::int64_t x = 1; x <= n; ++x) s += membership_prob_pair(x, kind);
    return s.value();
  }

  // P(x in C, y in C)
  double pair_prob(std::int64_t x, std::int64_t y, const SetKind& kind) const {
    switch (kind.tag) {
      case SetKind::Tag::cw:
        return weak_joint(x, y);
      case SetKind::Tag::cstar:
        return joint_upcross_law(x, y, kind.a, kind.a);
      default: {
        const auto comps = kind.components();
        double s = 0.0;
        for (auto [a1, b1] : comps) {
          for (auto [a2, b2] : comps) s += joint_site_law(x, y, a1, b1, a2, b2);
        }
        return s;
      }
    }
  }

  std::vector<LimitRatioRow> limit_ratio_report(const SetKind& kind, const std::vector<std::int64_t>& x_grid,
                                                const std::vector<std::int64_t>& gap_grid) const {
    std::vector<LimitRatioRow> rows;
    const double lambda = lambda_const(kind);
    for (auto x : x_grid) {
      const double px = membership_prob(x, kind);
      for (auto gap : gap_grid) {
        const std::int64_t y = x + gap;
        const double py = membership_prob(y, kind);
        const double pxy = pair_prob(x, y, kind);
        LimitRatioRow row;
        row.x = x;
        row.y = y;
        row.d_times_prob = d(x) * px;
        row.pair_ratio = d(x, y) / d(x) * pxy / (px * py);
        row.conditional_scaled = pxy / px * d(x, y) * d(y) / d(x);
        row.lambda = lambda;
        rows.push_back(row);
      }
    }
    return rows;
  }

 private:
  struct JointParts {
    double stay = 0.0;   // 1 - 1/D(x,y)
    double move = 0.0;   // 1/D(x,y)
    double theta = 0.0;  // p_y (1 - 1/D(y)) / den
    double kappa = 0.0;  // q_y (1 - D(x,y-1)/D(x,y)) / den
    double tail = 0.0;   // p_y / D(y) / den
  };

  JointParts joint_parts(std::int64_t x, std::int64_t y) const {
    const double dxy = d(x, y);
    const double dy = d(y);
    const double ratio = d(x, y - 1) / dxy;
    const double den = 1.0 - q(y) * ratio;
    return {1.0 - 1.0 / dxy, 1.0 / dxy, p(y) * (1.0 - 1.0 / dy) / den, q(y) * (1.0 - ratio) / den,
            p(y) / dy / den};
  }

  static double joint_term(const JointParts& jp, std::int64_t b, std::int64_t m, std::int64_t i) {
    const double lc = detail::log_binomial(b - 1, i - 1) + detail::log_binomial(m + i - 2, i - 1);
    const double lp = static_cast<double>(b - i) * std::log(jp.stay) + static_cast<double>(i) * std::log(jp.move) +
                      static_cast<double>(m - 1) * std::log(jp.theta) +
                      static_cast<double>(i - 1) * std::log(jp.kappa);
    if (b - i == 0 && jp.stay == 0.0) {
      // 0^0 with D(x,y) = 1
      const double lp0 = static_cast<double>(i) * std::log(jp.move) + static_cast<double>(m - 1) * std::log(jp.theta) +
                         static_cast<double>(i - 1) * std::log(jp.kappa);
      return std::exp(lc + lp0) * jp.tail;
    }
    return std::exp(lc + lp) * jp.tail;
  }

  const PotentialKernel* kernel_;
  const Environment* env_;
  FormulaPerturbation perturb_;
};

}  // namespace lamperti

#endif  // LAMPERTI_ANALYTICS_HPP
