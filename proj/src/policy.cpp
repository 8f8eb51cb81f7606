#include "dtn/policy.hpp"

#include <algorithm>
#include <cmath>

namespace dtn {

ArrivalSchedule::ArrivalSchedule(std::vector<double> t, double horizon)
    : times(std::move(t)), tau(horizon) {
  if (times.empty()) throw std::invalid_argument("ArrivalSchedule: need K >= 1 arrival times");
  if (!std::is_sorted(times.begin(), times.end()))
    throw std::invalid_argument("ArrivalSchedule: arrival times must be nondecreasing");
  if (times.front() < 0.0)
    throw std::invalid_argument("ArrivalSchedule: arrival times must be nonnegative");
  if (times.front() > tau)
    throw std::invalid_argument("ArrivalSchedule: t_1 must not exceed tau");
}

PiecewisePolicy::PiecewisePolicy(std::vector<double> bps, std::vector<std::vector<double>> segs)
    : breakpoints(std::move(bps)), segments(std::move(segs)) {
  validate();
}

void PiecewisePolicy::validate() const {
  if (breakpoints.empty() || breakpoints.size() != segments.size())
    throw std::invalid_argument("PiecewisePolicy: need one segment per breakpoint");
  if (!std::is_sorted(breakpoints.begin(), breakpoints.end()))
    throw std::invalid_argument("PiecewisePolicy: breakpoints must be sorted");
  const std::size_t k = segments[0].size();
  for (const auto& seg : segments) {
    if (seg.size() != k)
      throw std::invalid_argument("PiecewisePolicy: inconsistent frame counts");
    double sum = 0.0;
    for (double u : seg) {
      if (u < -1e-12 || u > 1.0 + 1e-12)
        throw std::invalid_argument("PiecewisePolicy: rate outside [0,1]");
      sum += u;
    }
    if (sum > 1.0 + 1e-9)
      throw std::invalid_argument("PiecewisePolicy: total rate exceeds 1");
  }
}

std::size_t PiecewisePolicy::segment_at(double t) const {
  // upper_bound gives the first breakpoint strictly greater than t.
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  if (it == breakpoints.begin()) return 0;
  return static_cast<std::size_t>(std::distance(breakpoints.begin(), it)) - 1;
}

double PiecewisePolicy::total_rate(std::size_t seg) const {
  double s = 0.0;
  for (double u : segments[seg]) s += u;
  return s;
}

bool PiecewisePolicy::work_conserving(double from, double to, double tol) const {
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const double a = breakpoints[s];
    const double b = (s + 1 < breakpoints.size()) ? breakpoints[s + 1]
                                                  : std::max(to, a);
    if (b <= from || a >= to) continue;
    if (std::abs(total_rate(s) - 1.0) > tol) return false;
  }
  return true;
}

PiecewisePolicy PiecewisePolicy::constant(std::vector<double> u) {
  return PiecewisePolicy({0.0}, {std::move(u)});
}

}  // namespace dtn
