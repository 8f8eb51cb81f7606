#include "dtn/lambert.hpp"

#include <cmath>
#include <limits>

namespace dtn {

namespace {

// Halley iteration for w*exp(w) = x from a given start value.
double halley(double x, double w) {
  for (int i = 0; i < 100; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
    const double step = f / denom;
    const double next = w - step;
    if (!std::isfinite(next)) break;
    if (std::abs(next - w) <= 1e-15 * (1.0 + std::abs(next))) return next;
    w = next;
  }
  return w;
}

}  // namespace

double lambert_w0(double x) {
  constexpr double inv_e = 0.36787944117144233;
  if (x < -inv_e - 1e-15) return std::numeric_limits<double>::quiet_NaN();
  if (x <= -inv_e) return -1.0;
  double w;
  if (x < 1.0) {
    // Series-ish start near 0 / branch point.
    const double p = std::sqrt(2.0 * (std::exp(1.0) * x + 1.0));
    w = (x > -0.25) ? x * std::exp(-x) : (-1.0 + p - p * p / 3.0);
    if (x >= 0.0) w = x / (1.0 + x);  // smooth start for x >= 0
  } else {
    const double l1 = std::log(x), l2 = std::log(std::log(x));
    w = l1 - l2 + l2 / l1;
  }
  return halley(x, w);
}

double lambert_wm1(double x) {
  constexpr double inv_e = 0.36787944117144233;
  if (x < -inv_e - 1e-15 || x >= 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (x <= -inv_e) return -1.0;
  const double l1 = std::log(-x), l2 = std::log(-std::log(-x));
  double w = l1 - l2;  // asymptotic start; valid as x -> 0-
  if (x > -0.27) {
    w = l1 - l2 + l2 / l1;
  } else {
    const double p = -std::sqrt(2.0 * (std::exp(1.0) * x + 1.0));
    w = -1.0 + p - p * p / 3.0;
  }
  return halley(x, w);
}

}  // namespace dtn
