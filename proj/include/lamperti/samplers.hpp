#ifndef LAMPERTI_SAMPLERS_HPP
#define LAMPERTI_SAMPLERS_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include "lamperti/rng.hpp"

namespace lamperti {

// Number of failures before the first success, P(G = j) = loop^j (1 - loop).
inline std::int64_t sample_geometric(Xoshiro256& rng, double loop) {
  if (!(loop >= 0.0 && loop < 1.0)) throw std::invalid_argument("geometric parameter outside [0,1)");
  if (loop == 0.0) return 0;
  const double u = rng.uniform_open0();
  return static_cast<std::int64_t>(std::floor(std::log(u) / std::log(loop)));
}

inline constexpr std::int64_t kNegBinSumThreshold = 16;

// Sum of k independent geometrics with parameter loop. Small k sums the
// geometrics directly; larger k uses the gamma-Poisson mixture.
inline std::int64_t sample_negative_binomial(Xoshiro256& rng, std::int64_t k, double loop) {
  if (k < 0) throw std::invalid_argument("negative binomial with k < 0");
  if (k == 0 || loop == 0.0) return 0;
  if (k <= kNegBinSumThreshold) {
    std::int64_t s = 0;
    for (std::int64_t i = 0; i < k; ++i) s += sample_geometric(rng, loop);
    return s;
  }
  boost::random::gamma_distribution<double> gamma(static_cast<double>(k), loop / (1.0 - loop));
  const double mean = gamma(rng);
  if (mean <= 0.0) return 0;
  boost::random::poisson_distribution<std::int64_t, double> poisson(mean);
  return poisson(rng);
}

}  // namespace lamperti

#endif  // LAMPERTI_SAMPLERS_HPP
