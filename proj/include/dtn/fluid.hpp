#pragma once

#include <optional>
#include <vector>

#include "dtn/policy.hpp"

namespace dtn {

struct EnergyModel {
  double epsilon = 1.0;  // energy per forwarding
  double x = 1.0;        // maximum copy fraction in [0, 1-z]
};

// Closed-form fluid trajectories of X(t) = 1 + (z-1)exp(-lambda*int u),
// the per-frame fractions X_i(t) and cumulative contact intensities
// Z_i(t) = int_0^t X_i. Everything is exact per policy segment.
class FluidTrajectory {
 public:
  FluidTrajectory(PiecewisePolicy policy, double lambda, double z = 0.0,
                  std::vector<double> x0 = {});

  const PiecewisePolicy& policy() const { return policy_; }
  double lambda() const { return lambda_; }
  double z() const { return z_; }
  std::size_t frame_count() const { return policy_.frame_count(); }

  double total(double t) const;                 // X(t)
  double frame(std::size_t i, double t) const;  // X_i(t), i is 0-based
  double cci(std::size_t i, double t) const;    // Z_i(t)
  std::vector<double> cci_vector(double t) const;

  double energy_used(const EnergyModel& em, double t) const {
    return em.epsilon * (total(t) - total(0.0));
  }

 private:
  struct SegState {
    double a;                 // segment start time
    double U;                 // int_0^a u(r) dr
    double X;                 // X(a)
    std::vector<double> Xi;   // X_i(a)
    std::vector<double> Zi;   // Z_i(a)
  };

  void eval_in_segment(std::size_t s, double t, double* X, std::vector<double>* Xi,
                       std::vector<double>* Zi) const;

  PiecewisePolicy policy_;
  double lambda_;
  double z_;
  std::vector<SegState> state_;  // one per policy segment
};

// zeta(h) = 1 - exp(-lambda*h), the per-frame delivery probability.
double zeta(double h, double lambda);

// P_s = prod_i zeta(Z_i). Z entries must be nonnegative.
double success_prob(const std::vector<double>& Z, double lambda);
std::vector<double> per_frame_delivery(const std::vector<double>& Z, double lambda);

struct DeliveryTimeResult {
  bool finite = false;
  double value = 0.0;  // meaningful only when finite
};

// E[D] = int_0^inf (1 - P_s(tau)) dtau, adaptive quadrature with an
// analytic exponential tail bound; flags divergence instead of crashing.
DeliveryTimeResult expected_delivery_time(const FluidTrajectory& traj,
                                          double rel_tol = 1e-9);

// Lemma 2 time change: v_i(t) = u_i(t) for t < from,
// v_i(t) = u_i(from + (t-from)/p)/p afterwards. Requires sum u <= p after `from`.
PiecewisePolicy accelerate(const PiecewisePolicy& policy, double p, double from);

// Lemma 3 policy improvement on [a,b,c] with saturation level p.
PiecewisePolicy improve_policy(const PiecewisePolicy& policy, double a, double b,
                               double c, double p);

}  // namespace dtn
