#ifndef LAMPERTI_ENVIRONMENT_HPP
#define LAMPERTI_ENVIRONMENT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lamperti/detail/loglog_tail.hpp"
#include "lamperti/detail/numeric.hpp"

namespace lamperti {

enum class Family { harmonic, loglog_perturbed, custom_table };

// Raised when the potential series is detected to be non-summable.
class DivergentError : public std::runtime_error {
 public:
  DivergentError(const std::string& what, double partial)
      : std::runtime_error(what), partial_(partial) {}
  double partial_value() const noexcept { return partial_; }

 private:
  double partial_;
};

struct DriftSpec {
  Family family = Family::harmonic;
  double beta = 0.0;
  std::vector<double> table;  // p_1, p_2, ... for custom_table

  static DriftSpec harmonic() { return {}; }
  static DriftSpec loglog(double beta) { return {Family::loglog_perturbed, beta, {}}; }
  static DriftSpec custom(std::vector<double> p) {
    return {Family::custom_table, 0.0, std::move(p)};
  }

  std::string label() const {
    switch (family) {
      case Family::harmonic:
        return "harmonic";
      case Family::loglog_perturbed: {
        std::ostringstream os;
        os << "loglog:" << beta;
        return os.str();
      }
      case Family::custom_table:
        return "table:" + std::to_string(table.size());
    }
    return "unknown";
  }
};

// One probability per line; blank lines and lines starting with '#' are skipped.
inline std::vector<double> read_probability_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open probability table: " + path.string());
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(line.substr(first), &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed probability table line: " + line);
    }
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("probability table is empty");
  return out;
}

// harmonic | loglog:BETA | table:PATH
inline DriftSpec parse_family(std::string_view text) {
  if (text == "harmonic") return DriftSpec::harmonic();
  if (text.rfind("loglog:", 0) == 0) {
    const std::string num(text.substr(7));
    std::size_t used = 0;
    double beta = 0.0;
    try {
      beta = std::stod(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != num.size() || !std::isfinite(beta)) {
      throw std::invalid_argument("bad loglog exponent: " + num);
    }
    return DriftSpec::loglog(beta);
  }
  if (text.rfind("table:", 0) == 0) {
    return DriftSpec::custom(read_probability_table(std::string(text.substr(6))));
  }
  throw std::invalid_argument("unknown family: " + std::string(text));
}

class Environment {
 public:
  explicit Environment(DriftSpec spec) : spec_(std::move(spec)) {
    switch (spec_.family) {
      case Family::harmonic:
        break;
      case Family::loglog_perturbed:
        n1_ = find_threshold();
        r_below_n1_ = loglog_formula(n1_);
        break;
      case Family::custom_table:
        if (spec_.table.empty()) throw std::invalid_argument("custom table is empty");
        for (double p : spec_.table) {
          if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("table probability outside (0,1)");
        }
        break;
    }
  }

  const DriftSpec& spec() const { return spec_; }
  Family family() const { return spec_.family; }
  std::int64_t loglog_threshold() const { return n1_; }

  // Perturbation r_n = p_n - 1/2 for n >= 1.
  double r_at(std::int64_t n) const {
    check_site(n);
    switch (spec_.family) {
      case Family::harmonic:
        return n == 1 ? 0.25 : 0.5 / static_cast<double>(n);
      case Family::loglog_perturbed:
        return n < n1_ ? r_below_n1_ : loglog_formula(n);
      case Family::custom_table:
        return table_p(n) - 0.5;
    }
    return 0.0;
  }

  double p_at(std::int64_t n) const {
    if (n == 0) return 1.0;
    if (spec_.family == Family::custom_table) {
      check_site(n);
      return table_p(n);
    }
    return 0.5 + r_at(n);
  }

  double q_at(std::int64_t n) const { return 1.0 - p_at(n); }

  double rho_at(std::int64_t n) const {
    if (n == 0) return 0.0;
    switch (spec_.family) {
      case Family::harmonic:
        if (n == 1) return 1.0 / 3.0;
        return static_cast<double>(n - 1) / static_cast<double>(n + 1);
      case Family::loglog_perturbed: {
        const double r = r_at(n);
        return (0.5 - r) / (0.5 + r);
      }
      case Family::custom_table:
        return q_at(n) / p_at(n);
    }
    return 0.0;
  }

  double log_rho_at(std::int64_t n) const {
    if (spec_.family == Family::custom_table) return std::log(rho_at(n));
    return -2.0 * std::atanh(2.0 * r_at(n));
  }

 private:
  static void check_site(std::int64_t n) {
    if (n < 0) throw std::out_of_range("negative site index");
  }

  double table_p(std::int64_t n) const {
    const auto idx = static_cast<std::size_t>(n - 1);
    return idx < spec_.table.size() ? spec_.table[idx] : spec_.table.back();
  }

  double loglog_formula(std::int64_t n) const {
    const double x = static_cast<double>(n);
    return 0.25 * (1.0 / x + 1.0 / (x * std::pow(std::log(std::log(x)), spec_.beta)));
  }

  bool formula_valid(std::int64_t n) const {
    const double r = loglog_formula(n);
    return std::isfinite(r) && r > 0.0 && r < 0.5;
  }

  std::int64_t find_threshold() const {
    // For beta >= 0 the formula decreases from n = 3. For beta < 0 the term
    // (log log n)^|beta| / n decreases once log n * log log n >= |beta|.
    std::int64_t stop = 3;
    if (spec_.beta < 0.0) {
      while (std::log(static_cast<double>(stop)) * std::log(std::log(static_cast<double>(stop))) <
             -spec_.beta) {
        ++stop;
      }
    }
    std::int64_t last_bad = 2;
    for (std::int64_t n = 3; n <= stop; ++n) {
      if (!formula_valid(n)) last_bad = n;
    }
    std::int64_t n = last_bad + 1;
    while (!formula_valid(n)) ++n;
    return n;
  }

  DriftSpec spec_;
  std::int64_t n1_ = 0;
  double r_below_n1_ = 0.0;
};

// Computes D(m,n) = 1 + sum_{j=1}^{n-m-1} rho_{m+1}...rho_{m+j} directly.
inline double direct_partial_d(const Environment& env, std::int64_t m, std::int64_t n) {
  if (m < 0 || n < m) throw std::invalid_argument("d_between requires 0 <= m <= n");
  if (n == m) return 0.0;
  detail::CompensatedSum sum;
  sum += 1.0;
  double prod = 1.0;
  for (std::int64_t i = m + 1; i < n; ++i) {
    prod *= env.rho_at(i);
    if (prod < 1e-300) break;
    sum += prod;
  }
  return sum.value();
}

struct TailEstimate {
  double value = 0.0;
  double error_estimate = 0.0;
  std::int64_t last_index = 0;
};

// D(m) from partial sums D(m, n_j), n_j = n0 * 2^j (j = 0..3), extrapolated
// in 1/n by a Richardson table.
inline TailEstimate direct_tail_sum(const Environment& env, std::int64_t m, std::int64_t n0 = 0) {
  if (m < 0) throw std::invalid_argument("direct_tail_sum requires m >= 0");
  if (n0 <= 0) n0 = std::max<std::int64_t>(4 * (m + 1), 4096);
  n0 = std::max(n0, m + 2);
  std::vector<double> partial;
  detail::CompensatedSum sum;
  sum += 1.0;
  double prod = 1.0;
  std::int64_t next = n0;
  const std::int64_t last = 8 * n0;
  for (std::int64_t i = m + 1; i < last; ++i) {
    prod *= env.rho_at(i);
    sum += prod;
    if (i + 1 == next) {
      partial.push_back(sum.value());
      next *= 2;
    }
  }
  const double d1 = partial[1] - partial[0];
  const double d2 = partial[3] - partial[2];
  if (d1 > 0.0 && d2 / d1 >= 0.99) {
    throw DivergentError("potential series does not converge", partial.back());
  }
  std::vector<double> row = partial;
  double prev_best = row.back();
  double factor = 2.0;
  for (int level = 1; level < 4; ++level) {
    std::vector<double> next_row;
    for (std::size_t j = 0; j + 1 < row.size(); ++j) {
      next_row.push_back((factor * row[j + 1] - row[j]) / (factor - 1.0));
    }
    prev_best = row.back();
    row = std::move(next_row);
    factor *= 2.0;
  }
  return {row.back(), std::abs(row.back() - prev_best), last};
}

enum class KernelPolicy { automatic, closed_form_harmonic, backward_recursion, direct_tail_sum };

struct KernelOptions {
  KernelPolicy policy = KernelPolicy::automatic;
  double seed_factor = 10.0;
};

// D(m) for 0 <= m <= max_index, plus D(m,n) on demand.
class PotentialKernel {
 public:
  PotentialKernel(Environment env, std::int64_t max_index, KernelOptions options = {})
      : env_(std::move(env)), max_index_(max_index), options_(options) {
    if (max_index_ < 0) throw std::invalid_argument("kernel max_index must be >= 0");
    if (options_.policy == KernelPolicy::automatic) {
      options_.policy = env_.family() == Family::harmonic ? KernelPolicy::closed_form_harmonic
                                                         : KernelPolicy::backward_recursion;
    }
    if (options_.policy == KernelPolicy::closed_form_harmonic && env_.family() != Family::harmonic) {
      throw std::invalid_argument("closed form is only available for the harmonic family");
    }
    build();
  }

  const Environment& environment() const { return env_; }
  std::int64_t max_index() const { return max_index_; }
  KernelPolicy policy() const { return options_.policy; }
  std::int64_t seed_level() const { return seed_level_; }
  const std::vector<double>& table() const { return table_; }

  double d_of(std::int64_t m) const {
    if (m < 0) throw std::invalid_argument("d_of requires m >= 0");
    if (options_.policy == KernelPolicy::closed_form_harmonic) return harmonic_d(m);
    if (m > max_index_) throw std::out_of_range("d_of beyond kernel table");
    return table_[static_cast<std::size_t>(m)];
  }

  double d_between(std::int64_t m, std::int64_t n) const {
    if (m < 0 || n < m) throw std::invalid_argument("d_between requires 0 <= m <= n");
    if (n == m) return 0.0;
    if (n == m + 1) return 1.0;
    if (options_.policy == KernelPolicy::closed_form_harmonic) {
      const double nn = static_cast<double>(n);
      if (m == 0) return 1.0 + (2.0 / 3.0) * (nn - 1.0) / nn;
      const double mm = static_cast<double>(m);
      return (mm + 1.0) * (nn - mm) / nn;
    }
    return direct_partial_d(env_, m, n);
  }

  // sum_{n=2}^{N} 1 / (D(n) log n)
  double criterion_partial_sum(std::int64_t big_n) const {
    if (big_n < 2) throw std::invalid_argument("criterion_partial_sum requires N >= 2");
    if (options_.policy != KernelPolicy::closed_form_harmonic && big_n > max_index_) {
      throw std::out_of_range("criterion_partial_sum beyond kernel table");
    }
    detail::CompensatedSum sum;
    for (std::int64_t n = 2; n <= big_n; ++n) {
      sum += 1.0 / (d_of(n) * std::log(static_cast<double>(n)));
    }
    return sum.value();
  }

 private:
  static double harmonic_d(std::int64_t m) {
    return m == 0 ? 5.0 / 3.0 : static_cast<double>(m) + 1.0;
  }

  double seed_value(std::int64_t level) const {
    switch (env_.family()) {
      case Family::loglog_perturbed:
        if (level >= std::max<std::int64_t>(env_.loglog_threshold(), 16)) {
          return detail::LogLogTail(env_.spec().beta).seed(level);
        }
        return direct_tail_sum(env_, level).value;
      case Family::custom_table: {
        const double rho = env_.rho_at(level);
        if (rho >= 1.0) throw DivergentError("constant tail with rho >= 1 is recurrent", INFINITY);
        return 1.0 / (1.0 - rho);
      }
      case Family::harmonic:
        return direct_tail_sum(env_, level).value;
    }
    return 0.0;
  }

  void build() {
    table_.assign(static_cast<std::size_t>(max_index_) + 1, 0.0);
    switch (options_.policy) {
      case KernelPolicy::closed_form_harmonic:
        for (std::int64_t m = 0; m <= max_index_; ++m) table_[m] = harmonic_d(m);
        return;
      case KernelPolicy::direct_tail_sum:
        for (std::int64_t m = 0; m <= max_index_; ++m) table_[m] = direct_tail_sum(env_, m).value;
        return;
      default:
        break;
    }
    std::int64_t level = static_cast<std::int64_t>(
        std::ceil(options_.seed_factor * static_cast<double>(std::max<std::int64_t>(max_index_, 1))));
    level = std::max<std::int64_t>(level, 64);
    if (env_.family() == Family::custom_table) {
      level = std::max<std::int64_t>(level, static_cast<std::int64_t>(env_.spec().table.size()));
    }
    seed_level_ = level;
    double d = seed_value(level);
    for (std::int64_t m = level - 1; m >= 0; --m) {
      d = 1.0 + env_.rho_at(m + 1) * d;
      if (m <= max_index_) table_[static_cast<std::size_t>(m)] = d;
    }
  }

  Environment env_;
  std::int64_t max_index_;
  KernelOptions options_;
  std::int64_t seed_level_ = 0;
  std::vector<double> table_;
};

enum class Finiteness { almost_surely_finite, almost_surely_infinite };

inline Finiteness classify_finiteness(const DriftSpec& spec) {
  if (spec.family != Family::loglog_perturbed) {
    throw std::invalid_argument("classify_finiteness requires a loglog-perturbed spec");
  }
  return spec.beta > 1.0 ? Finiteness::almost_surely_finite : Finiteness::almost_surely_infinite;
}

struct ProductAsymptoticRow {
  std::int64_t n = 0;
  double log_product = 0.0;
  double log_integral = 0.0;  // int_3^n f(x) dx
  double ratio = 0.0;
};

// rho_1...rho_n / exp(-int_3^n f) on the grid n = 1000 * 2^j <= N.
inline std::vector<ProductAsymptoticRow> product_asymptotic_report(const Environment& env,
                                                                   std::int64_t big_n) {
  if (env.family() != Family::loglog_perturbed) {
    throw std::invalid_argument("product_asymptotic_report requires a loglog-perturbed spec");
  }
  const double beta = env.spec().beta;
  auto slow = [beta](double u) { return std::pow(std::log(u), -beta); };
  std::vector<ProductAsymptoticRow> rows;
  detail::CompensatedSum log_prod;
  double integral = 0.0;
  double prev_u = std::log(3.0);
  std::int64_t i = 1;
  for (std::int64_t n = 1000; n <= big_n; n *= 2) {
    for (; i <= n; ++i) log_prod += env.log_rho_at(i);
    const double u = std::log(static_cast<double>(n));
    integral += (u - prev_u) +
                boost::math::quadrature::gauss_kronrod<double, 31>::integrate(slow, prev_u, u, 10, 1e-14);
    prev_u = u;
    rows.push_back({n, log_prod.value(), integral, std::exp(log_prod.value() + integral)});
  }
  return rows;
}

}  // namespace lamperti

#endif  // LAMPERTI_ENVIRONMENT_HPP
