#include "dtn/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dtn {

FluidTrajectory::FluidTrajectory(PiecewisePolicy policy, double lambda, double z,
                                 std::vector<double> x0)
    : policy_(std::move(policy)), lambda_(lambda), z_(z) {
  if (lambda_ < 0.0) throw std::invalid_argument("FluidTrajectory: lambda must be >= 0");
  if (z_ < 0.0 || z_ >= 1.0 + 1e-15)
    throw std::invalid_argument("FluidTrajectory: z must be in [0,1]");
  const std::size_t k = policy_.frame_count();
  if (x0.empty()) {
    // Initial copies (if any) are untracked by frame index; X_i(0) = 0.
    x0.assign(k, 0.0);
  } else if (x0.size() != k) {
    throw std::invalid_argument("FluidTrajectory: x0 size mismatch");
  }

  SegState st;
  st.a = policy_.breakpoints.front();
  st.U = 0.0;
  st.X = z_;
  st.Xi = x0;
  st.Zi.assign(k, 0.0);
  state_.push_back(st);
  for (std::size_t s = 0; s + 1 < policy_.segment_count(); ++s) {
    const double b = policy_.breakpoints[s + 1];
    SegState nxt = state_.back();
    eval_in_segment(s, b, &nxt.X, &nxt.Xi, &nxt.Zi);
    nxt.a = b;
    nxt.U = state_.back().U + policy_.total_rate(s) * (b - state_.back().a);
    state_.push_back(nxt);
  }
}

void FluidTrajectory::eval_in_segment(std::size_t s, double t, double* X,
                                      std::vector<double>* Xi,
                                      std::vector<double>* Zi) const {
  const SegState& st = state_[s];
  const auto& u = policy_.segments[s];
  const double utot = policy_.total_rate(s);
  const double dt = t - st.a;
  const std::size_t k = u.size();

  if (lambda_ == 0.0 || utot <= 0.0 || z_ >= 1.0) {
    // No spreading: X and X_i frozen, Z_i grows linearly.
    if (X) *X = st.X;
    if (Xi) *Xi = st.Xi;
    if (Zi) {
      Zi->resize(k);
      for (std::size_t i = 0; i < k; ++i) (*Zi)[i] = st.Zi[i] + st.Xi[i] * dt;
    }
    return;
  }

  const double Ea = std::exp(-lambda_ * st.U);
  const double Et = std::exp(-lambda_ * (st.U + utot * dt));
  const double Xt = 1.0 + (z_ - 1.0) * Et;
  // int_a^t X = dt + (z-1)(Ea - Et)/(lambda*utot)
  const double IX = dt + (z_ - 1.0) * (Ea - Et) / (lambda_ * utot);
  if (X) *X = Xt;
  const double dX = Xt - st.X;
  if (Xi) {
    Xi->resize(k);
    for (std::size_t i = 0; i < k; ++i) (*Xi)[i] = st.Xi[i] + (u[i] / utot) * dX;
  }
  if (Zi) {
    Zi->resize(k);
    for (std::size_t i = 0; i < k; ++i)
      (*Zi)[i] = st.Zi[i] + st.Xi[i] * dt + (u[i] / utot) * (IX - st.X * dt);
  }
}

double FluidTrajectory::total(double t) const {
  if (t <= state_.front().a) return z_;
  const std::size_t s = policy_.segment_at(t);
  double X;
  eval_in_segment(s, t, &X, nullptr, nullptr);
  return X;
}

double FluidTrajectory::frame(std::size_t i, double t) const {
  if (i >= frame_count()) throw std::out_of_range("frame index out of range");
  if (t <= state_.front().a) return state_.front().Xi[i];
  const std::size_t s = policy_.segment_at(t);
  std::vector<double> Xi;
  eval_in_segment(s, t, nullptr, &Xi, nullptr);
  return Xi[i];
}

double FluidTrajectory::cci(std::size_t i, double t) const {
  if (i >= frame_count()) throw std::out_of_range("frame index out of range");
  return cci_vector(t)[i];
}

std::vector<double> FluidTrajectory::cci_vector(double t) const {
  const std::size_t k = frame_count();
  if (t <= state_.front().a) return std::vector<double>(k, 0.0);
  const std::size_t s = policy_.segment_at(t);
  std::vector<double> Zi;
  eval_in_segment(s, t, nullptr, nullptr, &Zi);
  return Zi;
}

double zeta(double h, double lambda) {
  if (h < 0.0) throw std::invalid_argument("zeta: negative CCI");
  return -std::expm1(-lambda * h);
}

double success_prob(const std::vector<double>& Z, double lambda) {
  double p = 1.0;
  for (double h : Z) p *= zeta(h, lambda);
  return p;
}

std::vector<double> per_frame_delivery(const std::vector<double>& Z, double lambda) {
  std::vector<double> d(Z.size());
  for (std::size_t i = 0; i < Z.size(); ++i) d[i] = zeta(Z[i], lambda);
  return d;
}

namespace {

// Adaptive Simpson on [a,b] for f, with absolute tolerance.
template <class F>
double simpson_step(const F& f, double a, double fa, double b, double fb, double fm,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_step(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
  if (b <= a) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, fa, b, fb, fm, whole, tol, 40);
}

}  // namespace

DeliveryTimeResult expected_delivery_time(const FluidTrajectory& traj, double rel_tol) {
  const double lambda = traj.lambda();
  const std::size_t k = traj.frame_count();
  DeliveryTimeResult res;
  if (lambda <= 0.0) return res;  // zeta == 0 forever

  // Divergence test: every X_i must eventually be positive.
  const auto& pol = traj.policy();
  const std::size_t last = pol.segment_count() - 1;
  const double Tend = pol.breakpoints.back();
  const double ulast = pol.total_rate(last);
  const double Xend = traj.total(Tend);
  for (std::size_t i = 0; i < k; ++i) {
    double limit = traj.frame(i, Tend);
    if (ulast > 0.0)
      limit += (pol.segments[last][i] / ulast) * (1.0 - Xend);
    if (limit <= 0.0) return res;  // Z_i stays bounded => P_s bounded away from 1
  }

  const auto integrand = [&](double t) {
    return 1.0 - success_prob(traj.cci_vector(t), lambda);
  };

  // Integrate segment by segment up to the last breakpoint.
  double total = 0.0;
  for (std::size_t s = 0; s < pol.segment_count(); ++s) {
    const double a = pol.breakpoints[s];
    const double b = (s + 1 < pol.segment_count()) ? pol.breakpoints[s + 1] : a;
    if (b > a) total += adaptive_simpson(integrand, a, b, rel_tol * std::max(1.0, b - a));
  }

  // Tail: extend in doubling windows until the analytic bound is negligible.
  double T = Tend;
  double W = std::max(1.0, 1.0 / lambda);
  for (int iter = 0; iter < 200; ++iter) {
    total += adaptive_simpson(integrand, T, T + W, rel_tol * std::max(1.0, total));
    T += W;
    // 1 - P_s(t) <= sum_i exp(-lambda Z_i(t)); Z_i grows with slope >= X_i(T)
    // (X_i nondecreasing), so the remaining tail is bounded by
    // sum_i exp(-lambda Z_i(T)) / (lambda X_i(T)).
    double tail = 0.0;
    bool ok = true;
    const auto Z = traj.cci_vector(T);
    for (std::size_t i = 0; i < k; ++i) {
      const double xi = traj.frame(i, T);
      if (xi <= 0.0) { ok = false; break; }
      tail += std::exp(-lambda * Z[i]) / (lambda * xi);
    }
    if (ok && tail <= rel_tol * std::max(total, 1e-300)) {
      total += tail * 0.5;  // within [0, tail]; take midpoint, error below tolerance
      res.finite = true;
      res.value = total;
      return res;
    }
    W *= 2.0;
  }
  return res;  // did not certify convergence
}

namespace {

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end(),
                      [](double x, double y) { return std::abs(x - y) < 1e-15; }),
          v.end());
  return v;
}

}  // namespace

PiecewisePolicy accelerate(const PiecewisePolicy& policy, double p, double from) {
  if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("accelerate: p must be in (0,1]");
  for (std::size_t s = 0; s < policy.segment_count(); ++s) {
    const double b = (s + 1 < policy.segment_count())
                         ? policy.breakpoints[s + 1]
                         : std::numeric_limits<double>::infinity();
    if (b > from && policy.total_rate(s) > p + 1e-12)
      throw std::invalid_argument("accelerate: total rate exceeds p after 'from'");
  }
  if (p == 1.0) return policy;

  const std::size_t k = policy.frame_count();
  std::vector<double> bps;
  for (double b : policy.breakpoints) {
    if (b < from) bps.push_back(b);
    else bps.push_back(from + (b - from) * p);
  }
  bps.push_back(policy.breakpoints.front());
  bps.push_back(from);
  bps = sorted_unique(bps);

  std::vector<std::vector<double>> segs;
  for (std::size_t s = 0; s < bps.size(); ++s) {
    // Sample at the segment midpoint: immune to round-off at the boundaries.
    const double t =
        (s + 1 < bps.size()) ? 0.5 * (bps[s] + bps[s + 1]) : bps[s] + 0.5;
    std::vector<double> u(k);
    if (t < from) {
      u = policy.rates_at(t);
    } else {
      const auto& src = policy.rates_at(from + (t - from) / p);
      for (std::size_t i = 0; i < k; ++i) u[i] = src[i] / p;
    }
    segs.push_back(std::move(u));
  }
  return PiecewisePolicy(std::move(bps), std::move(segs));
}

PiecewisePolicy improve_policy(const PiecewisePolicy& policy, double a, double b,
                               double c, double p) {
  if (!(p > 0.0) || p > 1.0)
    throw std::invalid_argument("improve_policy: p must be in (0,1]");
  if (!(a < b && b <= c))
    throw std::invalid_argument("improve_policy: need a < b <= c");
  const std::size_t k = policy.frame_count();
  double mass_bc = 0.0;
  for (std::size_t s = 0; s < policy.segment_count(); ++s) {
    const double sa = policy.breakpoints[s];
    const double sb = (s + 1 < policy.segment_count())
                          ? policy.breakpoints[s + 1]
                          : std::max(c, sa);
    const double lo = std::max(sa, a), hi = std::min(sb, b);
    if (hi > lo && policy.total_rate(s) > p + 1e-12)
      throw std::invalid_argument("improve_policy: total rate exceeds p on [a,b]");
    const double lo2 = std::max(sa, b), hi2 = std::min(sb, c);
    if (hi2 > lo2) mass_bc += policy.total_rate(s) * (hi2 - lo2);
  }
  if (mass_bc <= 0.0)
    throw std::invalid_argument("improve_policy: policy must transmit on [b,c]");

  const double d = a + p * (b - a);          // end of accelerated block
  const double e = c - (1.0 - p) * (b - a);  // end of shifted block

  const auto w_at = [&](double t) -> std::vector<double> {
    std::vector<double> u(k, 0.0);
    if (t < a) {
      u = policy.rates_at(t);
    } else if (t < d) {
      const auto& src = policy.rates_at(a + (t - a) / p);
      for (std::size_t i = 0; i < k; ++i) u[i] = src[i] / p;
    } else if (t < e) {
      u = policy.rates_at(t + b - d);
    } else if (t < c) {
      // idle: the saved time
    } else {
      u = policy.rates_at(t);
    }
    return u;
  };

  std::vector<double> bps{policy.breakpoints.front(), a, d, e, c};
  for (double t : policy.breakpoints) {
    if (t < a) bps.push_back(t);
    else if (t <= b) bps.push_back(a + (t - a) * p);
    else if (t <= c) bps.push_back(t - (b - d));
    else bps.push_back(t);
  }
  bps = sorted_unique(bps);
  bps.erase(std::remove_if(bps.begin(), bps.end(),
                           [&](double t) { return t < policy.breakpoints.front(); }),
            bps.end());

  std::vector<std::vector<double>> segs;
  segs.reserve(bps.size());
  for (std::size_t s = 0; s < bps.size(); ++s) {
    const double t =
        (s + 1 < bps.size()) ? 0.5 * (bps[s] + bps[s + 1]) : bps[s] + 0.5;
    segs.push_back(w_at(t));
  }
  return PiecewisePolicy(std::move(bps), std::move(segs));
}

}  // namespace dtn
