#ifndef LAMPERTI_DETAIL_LOGLOG_TAIL_HPP
#define LAMPERTI_DETAIL_LOGLOG_TAIL_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

namespace lamperti::detail {

// Tail of the potential kernel for the log-log perturbed drift,
//   D(M) = sum_{k>=M} rho_{M+1} ... rho_k,
// evaluated for a seed level M inside the formula regime. The discrete product
// and the outer sum are both replaced by their Euler-Maclaurin integrals; with
// x = e^u the remaining integrand is smooth and decays like
// exp(-int (log t)^-beta dt), which is integrated as an ODE in w = log u.
class LogLogTail {
 public:
  explicit LogLogTail(double beta) : beta_(beta) {}

  // log rho at x = e^u, i.e. -2 atanh(2 r(x)).
  double log_rho(double u) const { return -2.0 * std::atanh(two_r(u)); }

  // d/dx log rho at x = e^u.
  double log_rho_derivative(double u) const {
    const double lu = std::log(u);
    const double big_l = std::pow(lu, -beta_);
    const double r_prime =
        -0.25 * std::exp(-2.0 * u) * ((1.0 + big_l) + beta_ * std::pow(lu, -beta_ - 1.0) / u);
    const double tr = two_r(u);
    return -4.0 * r_prime / (1.0 - tr * tr);
  }

  // phi(t) - 1 where phi(t) = -e^t log rho(e^t).
  double excess_rate(double t) const {
    const double big_l = std::pow(std::log(t), -beta_);
    const double s = 0.5 * std::exp(-t) * (1.0 + big_l);
    double atanh_ratio_minus_one;
    if (s < 1e-4) {
      const double s2 = s * s;
      atanh_ratio_minus_one = s2 / 3.0 + s2 * s2 / 5.0;
    } else {
      atanh_ratio_minus_one = std::atanh(s) / s - 1.0;
    }
    return big_l + (1.0 + big_l) * atanh_ratio_minus_one;
  }

  double seed(std::int64_t level) const {
    if (level < 16) throw std::invalid_argument("LogLogTail: seed level must be >= 16");
    const double m = static_cast<double>(level);
    const double u0 = std::log(m);
    const double ell0 = log_rho(u0);
    const double dell0 = log_rho_derivative(u0);

    // state: {Psi, J}; independent variable w = log u.
    using State = std::array<double, 2>;
    auto rhs = [&](const State& y, State& dy, double w) {
      const double u = std::exp(w);
      const double corr = 0.5 * (log_rho(u) - ell0) + (log_rho_derivative(u) - dell0) / 12.0;
      dy[0] = u * excess_rate(u);
      dy[1] = u * std::exp(-y[0] + corr);
    };

    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_controlled(1e-14, 1e-14, ode::runge_kutta_dopri5<State>());
    State y{0.0, 0.0};
    double w = std::log(u0);
    double dw = 1e-3;
    const double chunk = 0.25;
    for (int iter = 0; iter < 4000; ++iter) {
      ode::integrate_adaptive(stepper, rhs, y, w, w + chunk, dw);
      w += chunk;
      const double u = std::exp(w);
      const double slow = std::pow(std::log(u), beta_ > 0.0 ? beta_ : 0.0);
      if (y[1] > 0.0 && 10.0 * slow * std::exp(-y[0]) < 1e-17 * y[1]) break;
      if (iter == 3999) throw std::runtime_error("LogLogTail: tail integral did not converge");
    }
    const double h_prime = ell0 + 0.5 * dell0;
    return m * y[1] + 0.5 - h_prime / 12.0;
  }

 private:
  double two_r(double u) const {
    return 0.5 * std::exp(-u) * (1.0 + std::pow(std::log(u), -beta_));
  }

  double beta_;
};

}  // namespace lamperti::detail

#endif  // LAMPERTI_DETAIL_LOGLOG_TAIL_HPP
