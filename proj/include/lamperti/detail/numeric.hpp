#ifndef LAMPERTI_DETAIL_NUMERIC_HPP
#define LAMPERTI_DETAIL_NUMERIC_HPP

#include <cmath>
#include <cstdint>

namespace lamperti::detail {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double v) {
    add(v);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Binomial coefficient as a double via multiplicative accumulation.
inline double binomial_real(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  double r = 1.0;
  for (std::int64_t i = 1; i <= k; ++i) {
    r *= static_cast<double>(n - k + i);
    r /= static_cast<double>(i);
  }
  return r < 9.0e15 ? std::round(r) : r;
}

// x^k with the convention 0^0 = 1 and exact handling of nonnegative integer k.
inline double ipow(double x, std::int64_t k) {
  if (k == 0) return 1.0;
  return std::pow(x, static_cast<double>(k));
}

}  // namespace lamperti::detail

#endif  // LAMPERTI_DETAIL_NUMERIC_HPP
