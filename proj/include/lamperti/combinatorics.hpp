#ifndef LAMPERTI_COMBINATORICS_HPP
#define LAMPERTI_COMBINATORICS_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lamperti/detail/numeric.hpp"

namespace lamperti {

// Exact C(n, k) for n <= 62.
inline std::uint64_t binomial_exact(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0 || k > n) return 0;
  if (n > 62) throw std::overflow_error("binomial_exact: n > 62");
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    // r * (n-k+i) is divisible by i, and stays below 2^64 for n <= 62.
    r = r / static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n - k + i) +
        r % static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n - k + i) /
            static_cast<std::uint64_t>(i);
  }
  return r;
}

// Number of compositions of a into j positive parts.
inline std::uint64_t count_strict(std::int64_t a, std::int64_t j) {
  if (j < 1 || a < j) throw std::invalid_argument("count_strict requires a >= j >= 1");
  return binomial_exact(a - 1, j - 1);
}

// Number of j-tuples of nonnegative integers summing to a with last entry >= 1
// and exactly i nonzero entries.
inline std::uint64_t count_padded(std::int64_t a, std::int64_t j, std::int64_t i) {
  if (i < 1 || j < i || a < i) throw std::invalid_argument("count_padded requires a >= i, j >= i >= 1");
  return binomial_exact(j - 1, i - 1) * binomial_exact(a - 1, i - 1);
}

// Sum over 0 < j_1 < ... < j_k <= n with consecutive gaps >= gap of
// 1 / (j_1 (j_2 - j_1) ... (j_k - j_{k-1})).
inline double logsum_kfold(std::int64_t n, std::int64_t k, std::int64_t gap = 1) {
  if (k < 1 || n < k) throw std::invalid_argument("logsum_kfold requires n >= k >= 1");
  if (gap < 1) throw std::invalid_argument("logsum_kfold requires gap >= 1");
  if (k >= 2 && n > 100000) throw std::invalid_argument("logsum_kfold: n > 1e5 with k >= 2");
  const auto size = static_cast<std::size_t>(n) + 1;
  std::vector<double> g(size, 0.0);
  for (std::int64_t j = 1; j <= n; ++j) g[j] = 1.0 / static_cast<double>(j);
  std::vector<double> inv(size, 0.0);
  for (std::int64_t d = 1; d <= n; ++d) inv[d] = 1.0 / static_cast<double>(d);
  for (std::int64_t t = 2; t <= k; ++t) {
    std::vector<double> next(size, 0.0);
    for (std::int64_t j = 1; j <= n; ++j) {
      detail::CompensatedSum s;
      for (std::int64_t l = 1; l + gap <= j; ++l) {
        if (g[l] != 0.0) s += g[l] * inv[j - l];
      }
      next[j] = s.value();
    }
    g = std::move(next);
  }
  detail::CompensatedSum total;
  for (std::int64_t j = 1; j <= n; ++j) total += g[j];
  return total.value();
}

struct LogsumBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// (log n - log k)^k <= logsum_kfold(n, k, 1) <= (k + log n)^k
inline LogsumBounds logsum_bounds(std::int64_t n, std::int64_t k) {
  const double ln = std::log(static_cast<double>(n));
  const double kk = static_cast<double>(k);
  return {std::pow(ln - std::log(kk), kk), std::pow(kk + ln, kk)};
}

}  // namespace lamperti

#endif  // LAMPERTI_COMBINATORICS_HPP
