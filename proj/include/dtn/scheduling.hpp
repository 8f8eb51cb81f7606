#pragma once

#include <vector>

#include "dtn/policy.hpp"

namespace dtn::sched {

// Per-interval stop times s_i in [t_i, t_{i+1}] (t_{K+1} = tau). The source
// transmits on [t_i, s_i) and idles on [s_i, t_{i+1}).
struct ThresholdPlan {
  std::vector<double> s;
};

// Work-conserving CCI-equalizing policy (Algorithm A). On each inter-arrival
// window the argmin-CCI group is lifted toward the next level with a uniform
// split over the group; switch times solve the closed-form per-segment
// equalization equations. The output is work conserving on [t_1, tau] and
// the final segment extends past tau.
PiecewisePolicy algorithm_a(const ArrivalSchedule& arr, double lambda);

// Same frame-selection rule modulated by the total-rate profile u_t of the
// plan: u_t = 1 on [t_i, s_i), 0 on [s_i, t_{i+1}), 1 after t_K up to s_K.
PiecewisePolicy algorithm_b(const ArrivalSchedule& arr, double lambda,
                            const ThresholdPlan& plan);

// Pre-t_K part of Algorithm C: equalizes the K-1 information frames using
// only the window [t_1, t_K); the policy is zero after t_K (the coded stream
// is handled by the coding scheme / simulator).
PiecewisePolicy algorithm_c(const ArrivalSchedule& arr, double lambda);

struct TeqResult {
  bool exists = false;
  double value = 0.0;             // bisection root (authoritative)
  double lambert_value = 0.0;     // corrected Lambert-W closed form
  bool lambert_matches = false;   // |lambert_value - value| <= 1e-9
  double paper_form_value = 0.0;  // printed formula, best real branch (NaN if none)
  bool paper_form_matches = false;
};

// Horizon tau at which the K=2 work-conserving policy (frame 1 until t2,
// frame 2 afterwards) equalizes Z_1(tau) = Z_2(tau). Exists iff
// lambda*t2 < ln 2. t1 = 0.
TeqResult compute_t_eq(double lambda, double t2);

// Closed forms for the K=2 threshold family u(s) (t1 = 0): frame 1 on [0,s),
// idle on [s,t2), frame 2 on [t2,tau).
double k2_z1(double lambda, double s, double tau);
double k2_z2(double lambda, double s, double t2, double tau);
double k2_success(double lambda, double s, double t2, double tau);

struct ThresholdK2Result {
  double s_opt = 0.0;
  double p_opt = 0.0;
  bool work_conserving = false;  // tau >= t_eq: s_opt = t2 with a notice
  double teq = 0.0;              // +inf when no equalization horizon exists
  double s_thm6_printed = 0.0;   // (1/lambda) log(1 - e^{-lambda(tau-t2)})
  double s_appendix_c = 0.0;     // -(1/lambda) log(1 - e^{-lambda(tau-t2)})
};

ThresholdK2Result optimal_threshold_k2(double lambda, double t2, double tau,
                                       double grid_step = 1e-4);

// s with X(s) = z + x under full-rate transmission.
double energy_constrained_threshold(double x, double z, double lambda);

// True iff d1 is majorized by d2 (sorted-descending partial sums of d1 are
// <= those of d2; totals equal within tol).
bool majorizes(const std::vector<double>& d1, const std::vector<double>& d2,
               double tol = 1e-9);

struct GeneralThresholdResult {
  ThresholdPlan plan;
  double p_opt = 0.0;
  double p_work_conserving = 0.0;
  long evaluations = 0;
};

// Coordinate descent with deterministic multi-start over the Thm 7 threshold
// structure; the work-conserving plan is always a candidate.
GeneralThresholdResult optimize_general_thresholds(const ArrivalSchedule& arr,
                                                   double lambda, double tau);

}  // namespace dtn::sched
