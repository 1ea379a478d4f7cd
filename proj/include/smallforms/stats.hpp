#pragma once

#include <cmath>
#include <limits>

#include "smallforms/errors.hpp"

namespace smallforms {

// Neumaier-compensated accumulator; add() in ascending term order.
class CompensatedSum {
  public:
    void add(double x) {
        double t = s_ + x;
        if (std::abs(s_) >= std::abs(x))
            c_ += (s_ - t) + x;
        else
            c_ += (x - t) + s_;
        s_ = t;
        if (!std::isfinite(s_)) throw OverflowError("accumulator overflow");
    }
    double value() const { return s_ + c_; }

  private:
    double s_ = 0.0, c_ = 0.0;
};

struct ConfidenceInterval {
    double lo = 0.0, hi = 0.0;
};

// Wilson score interval at 95% for `hits` successes out of `n` trials.
inline ConfidenceInterval wilson95(long long hits, long long n) {
    if (n <= 0) return {0.0, 1.0};
    const double z = 1.959963984540054;  // 97.5% normal quantile
    double p = double(hits) / double(n);
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (p + z2 / (2.0 * n)) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    double lo = center - half, hi = center + half;
    if (lo < 0 || hits == 0) lo = 0;
    if (hi > 1 || hits == n) hi = 1;
    return {lo, hi};
}

}  // namespace smallforms
