#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace dtn {

// Frame arrival times t_1 <= ... <= t_K at the source, plus the deadline tau.
struct ArrivalSchedule {
  std::vector<double> times;
  double tau = 0.0;

  ArrivalSchedule() = default;
  ArrivalSchedule(std::vector<double> t, double horizon);

  std::size_t frame_count() const { return times.size(); }
  double t1() const { return times.front(); }
  double tK() const { return times.back(); }
};

// Piecewise-constant forwarding control t -> (u_1(t), ..., u_K(t)).
// breakpoints[0] is the policy origin (usually 0); the final segment
// extends to +infinity. segments[s][i] is the probability of forwarding
// frame i while t is in [breakpoints[s], breakpoints[s+1]).
struct PiecewisePolicy {
  std::vector<double> breakpoints;
  std::vector<std::vector<double>> segments;

  PiecewisePolicy() = default;
  PiecewisePolicy(std::vector<double> bps, std::vector<std::vector<double>> segs);

  std::size_t frame_count() const { return segments.empty() ? 0 : segments[0].size(); }
  std::size_t segment_count() const { return segments.size(); }

  // Index of the segment containing t (final segment extends).
  std::size_t segment_at(double t) const;
  const std::vector<double>& rates_at(double t) const { return segments[segment_at(t)]; }
  double total_rate(std::size_t seg) const;

  // True when sum_i u_i(t) == 1 on [from, to) up to tol.
  bool work_conserving(double from, double to, double tol = 1e-9) const;

  void validate() const;

  // Constant policy u on [0, inf).
  static PiecewisePolicy constant(std::vector<double> u);
};

}  // namespace dtn
