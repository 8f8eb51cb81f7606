#include "dtn/scheduling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dtn/fluid.hpp"
#include "dtn/lambert.hpp"

namespace dtn::sched {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Activity timeline of the total rate (u_t in {0,1}) together with the
// tau-weighted service mass
//   mass(x, y) = int_{[x,y] cap active} lambda e^{-lambda U(s)} (tau - s) ds,
// which is exactly the contribution to Z_i(tau) of service granted on [x,y]
// (z = 0). U(s) = int_0^s u_t.
class MassClock {
 public:
  MassClock(double lambda, double tau) : lambda_(lambda), tau_(tau) {}

  void add_active(double a, double b) {
    if (b <= a) return;
    double U = segs_.empty() ? 0.0 : segs_.back().U + (segs_.back().b - segs_.back().a);
    segs_.push_back({a, b, U});
  }

  bool active_at(double t) const {
    for (const auto& s : segs_)
      if (t >= s.a && t < s.b) return true;
    return false;
  }

  const std::vector<double> boundaries() const {
    std::vector<double> v;
    for (const auto& s : segs_) {
      v.push_back(s.a);
      v.push_back(s.b);
    }
    return v;
  }

  double mass(double x, double y) const {
    if (y <= x) return 0.0;
    double m = 0.0;
    for (const auto& s : segs_) {
      const double lo = std::max(x, s.a), hi = std::min(y, s.b);
      if (hi > lo) m += F(s, hi) - F(s, lo);
    }
    return m;
  }

  // Smallest y with mass(x, y) = mu (clamped to the end of activity).
  double invert(double x, double mu) const {
    for (const auto& s : segs_) {
      const double lo = std::max(x, s.a);
      if (lo >= s.b) continue;
      const double seg_mass = F(s, s.b) - F(s, lo);
      if (seg_mass < mu - 1e-18) {
        mu -= seg_mass;
        continue;
      }
      // Solve F(s,y) - F(s,lo) = mu inside [lo, s.b]: monotone increasing.
      const double target = F(s, lo) + mu;
      double a = lo, b = s.b;
      double y = 0.5 * (a + b);
      for (int it = 0; it < 200; ++it) {
        const double g = F(s, y) - target;
        const double dg = density(s, y);
        double step = (dg > 0.0) ? g / dg : 0.0;
        double next = y - step;
        if (!(next > a && next < b)) next = 0.5 * (a + b);  // bisection fallback
        if (F(s, next) - target > 0.0) b = next; else a = next;
        if (std::abs(next - y) <= 1e-15 * std::max(1.0, std::abs(next)) && it > 3)
          return next;
        y = next;
      }
      return y;
    }
    return segs_.empty() ? x : segs_.back().b;
  }

 private:
  struct Seg {
    double a, b, U;  // U = int_0^a u_t
  };

  double density(const Seg& s, double t) const {
    return lambda_ * std::exp(-lambda_ * (s.U + (t - s.a))) * (tau_ - t);
  }

  // Antiderivative of the density: F'(t) = lambda E(t)(tau - t) with
  // E(t) = exp(-lambda(U + t - a)); F(t) = -E(t)(tau - t) + E(t)/lambda.
  double F(const Seg& s, double t) const {
    const double E = std::exp(-lambda_ * (s.U + (t - s.a)));
    return -E * (tau_ - t) + E / lambda_;
  }

  double lambda_, tau_;
  std::vector<Seg> segs_;
};

// Max-min fair quotas under suffix constraints sum_{i>=j} q_i <= M[j]
// (M[j] = service mass available after t_j), total = M[0]. Equal quotas are
// exactly the CCI-equalizing split since quota_i == Z_i(tau).
std::vector<double> levelling(const std::vector<double>& M) {
  const std::size_t K = M.size();
  std::vector<double> q(K, 0.0);
  std::vector<bool> fixed(K, false);
  std::size_t left = K;
  while (left > 0) {
    double best_level = kInf;
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < K; ++j) {
      double avail = M[j];
      std::size_t n = 0;
      for (std::size_t i = j; i < K; ++i) {
        if (fixed[i]) avail -= q[i];
        else ++n;
      }
      if (n == 0) continue;
      const double level = avail / static_cast<double>(n);
      if (level < best_level) {
        best_level = level;
        best_j = j;
      }
    }
    for (std::size_t i = best_j; i < K; ++i) {
      if (!fixed[i]) {
        q[i] = std::max(best_level, 0.0);
        fixed[i] = true;
        --left;
      }
    }
  }
  return q;
}

struct ServiceRecord {
  double a, b;
  std::vector<std::size_t> group;  // frames served with weight 1/|group|
};

// Event-driven water-filling of the remaining-quota vector, window by window.
std::vector<ServiceRecord> water_fill(const std::vector<double>& ts, double end,
                                      const MassClock& clock,
                                      std::vector<double> rem) {
  const std::size_t K = ts.size();
  const double M0 = clock.mass(ts[0], end);
  const double eps_m = 1e-13 * std::max(M0, 1e-300);
  const double tie = 1e-12 * std::max(M0, 1e-300);
  std::vector<ServiceRecord> recs;

  for (std::size_t w = 0; w < K; ++w) {
    double x = ts[w];
    const double wend = (w + 1 < K) ? ts[w + 1] : end;
    double wmass = clock.mass(x, wend);
    int guard = 0;
    while (wmass > eps_m && ++guard < 10000) {
      double r1 = -kInf;
      for (std::size_t i = 0; i <= w; ++i) r1 = std::max(r1, rem[i]);
      if (r1 <= eps_m) break;
      std::vector<std::size_t> T;
      double r2 = 0.0;
      for (std::size_t i = 0; i <= w; ++i) {
        if (rem[i] >= r1 - tie) T.push_back(i);
        else r2 = std::max(r2, rem[i]);
      }
      double mu = static_cast<double>(T.size()) * (r1 - r2);
      if (mu <= eps_m) mu = wmass;  // ties all around: drain the window
      mu = std::min(mu, wmass);
      double y = std::min(clock.invert(x, mu), wend);
      if (y <= x) y = wend;
      recs.push_back({x, y, T});
      const double share = mu / static_cast<double>(T.size());
      for (std::size_t i : T) rem[i] -= share;
      wmass -= mu;
      x = y;
    }
  }
  return recs;
}

PiecewisePolicy assemble_policy(std::size_t nframes, const std::vector<double>& ts,
                                double end, const MassClock& clock,
                                const std::vector<ServiceRecord>& recs,
                                bool extend_last) {
  std::vector<double> bounds{0.0, end};
  for (double t : ts) bounds.push_back(t);
  for (const auto& r : recs) {
    bounds.push_back(r.a);
    bounds.push_back(r.b);
  }
  for (double t : clock.boundaries()) bounds.push_back(t);
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-14; }),
               bounds.end());

  std::vector<double> bps;
  std::vector<std::vector<double>> segs;
  for (std::size_t p = 0; p + 1 < bounds.size(); ++p) {
    const double mid = 0.5 * (bounds[p] + bounds[p + 1]);
    std::vector<double> u(nframes, 0.0);
    if (clock.active_at(mid)) {
      for (const auto& r : recs) {
        if (mid >= r.a && mid < r.b) {
          const double share = 1.0 / static_cast<double>(r.group.size());
          for (std::size_t i : r.group) u[i] = share;
          break;
        }
      }
    }
    if (!segs.empty() && segs.back() == u) continue;  // merge equal neighbours
    bps.push_back(bounds[p]);
    segs.push_back(std::move(u));
  }
  if (bps.empty()) {
    bps.push_back(0.0);
    segs.emplace_back(nframes, 0.0);
  }
  if (extend_last) {
    // Drop a trailing all-zero segment so the last active rates persist
    // beyond the horizon (used by E[D]).
    while (segs.size() > 1 &&
           std::all_of(segs.back().begin(), segs.back().end(),
                       [](double v) { return v == 0.0; })) {
      segs.pop_back();
      bps.pop_back();
    }
  } else if (std::any_of(segs.back().begin(), segs.back().end(),
                         [](double v) { return v != 0.0; })) {
    // The schedule ends at `end`: make the policy explicitly idle afterwards,
    // otherwise the last active segment would extend past the horizon.
    bps.push_back(end);
    segs.emplace_back(nframes, 0.0);
  }
  return PiecewisePolicy(std::move(bps), std::move(segs));
}

PiecewisePolicy build_equalizer(const std::vector<double>& ts, double end,
                                const MassClock& clock, std::size_t nframes,
                                bool extend_last) {
  std::vector<double> M(ts.size());
  for (std::size_t j = 0; j < ts.size(); ++j) M[j] = clock.mass(ts[j], end);
  const std::vector<double> quotas = levelling(M);
  const auto recs = water_fill(ts, end, clock, quotas);
  return assemble_policy(nframes, ts, end, clock, recs, extend_last);
}

}  // namespace

PiecewisePolicy algorithm_a(const ArrivalSchedule& arr, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("algorithm_a: lambda must be > 0");
  MassClock clock(lambda, arr.tau);
  clock.add_active(arr.t1(), arr.tau);
  return build_equalizer(arr.times, arr.tau, clock, arr.frame_count(), true);
}

PiecewisePolicy algorithm_b(const ArrivalSchedule& arr, double lambda,
                            const ThresholdPlan& plan) {
  if (lambda <= 0.0) throw std::invalid_argument("algorithm_b: lambda must be > 0");
  const std::size_t K = arr.frame_count();
  if (plan.s.size() != K)
    throw std::invalid_argument("algorithm_b: plan size must equal K");
  MassClock clock(lambda, arr.tau);
  for (std::size_t i = 0; i < K; ++i) {
    const double lo = arr.times[i];
    const double hi = (i + 1 < K) ? arr.times[i + 1] : arr.tau;
    const double s = plan.s[i];
    if (s < lo - 1e-12 || s > hi + 1e-12)
      throw std::invalid_argument("algorithm_b: threshold outside [t_i, t_{i+1}]");
    clock.add_active(lo, std::min(s, hi));
  }
  return build_equalizer(arr.times, arr.tau, clock, K, true);
}

PiecewisePolicy algorithm_c(const ArrivalSchedule& arr, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("algorithm_c: lambda must be > 0");
  const std::size_t K = arr.frame_count();
  if (K < 2) throw std::invalid_argument("algorithm_c: need K >= 2");
  const double tK = arr.tK();
  std::vector<double> ts(arr.times.begin(), arr.times.end() - 1);
  MassClock clock(lambda, arr.tau);  // weights still use the real horizon tau
  clock.add_active(ts.front(), tK);
  return build_equalizer(ts, tK, clock, K - 1, false);
}

namespace {

// Closed-form CCI gap of the K=2 work-conserving policy of the paper
// (frame 1 until t2, frame 2 afterwards), t1 = 0:
//   Z1(tau) = (lambda t2 + a - 1)/lambda + (tau - t2)(1 - a)
//   Z2(tau) = a (tau - t2) + (e^{-lambda tau} - a)/lambda,  a = e^{-lambda t2}
double teq_gap(double lambda, double t2, double tau) {
  const double a = std::exp(-lambda * t2);
  const double z1 = (lambda * t2 + a - 1.0) / lambda + (tau - t2) * (1.0 - a);
  const double z2 = a * (tau - t2) + (std::exp(-lambda * tau) - a) / lambda;
  return z1 - z2;
}

}  // namespace

TeqResult compute_t_eq(double lambda, double t2) {
  if (lambda <= 0.0 || t2 < 0.0)
    throw std::invalid_argument("compute_t_eq: need lambda > 0, t2 >= 0");
  TeqResult res;
  res.value = std::numeric_limits<double>::quiet_NaN();
  res.lambert_value = std::numeric_limits<double>::quiet_NaN();
  res.paper_form_value = std::numeric_limits<double>::quiet_NaN();
  if (t2 == 0.0) {
    // Symmetric frames equalize immediately under (1/2, 1/2).
    res.exists = true;
    res.value = res.lambert_value = 0.0;
    res.lambert_matches = true;
    return res;
  }
  const double a = std::exp(-lambda * t2);
  if (1.0 - 2.0 * a >= 0.0) return res;  // gap grows forever: no root >= t2

  // Bisection on the closed-form gap (authoritative).
  double lo = t2, hi = t2 + 1.0 / lambda;
  while (teq_gap(lambda, t2, hi) > 0.0) hi += (hi - t2);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (teq_gap(lambda, t2, mid) > 0.0) lo = mid; else hi = mid;
    if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
  }
  res.exists = true;
  res.value = 0.5 * (lo + hi);

  // Corrected Lambert-W closed form: with d = 1-2a, c = 1 - lambda t2 - 2a,
  // theta = lambda(t_eq - t2) solves theta d - c = a e^{-theta}, i.e.
  // theta = c/d + W((a/d) e^{-c/d}).
  {
    const double d = 1.0 - 2.0 * a;
    const double c = 1.0 - lambda * t2 - 2.0 * a;
    const double arg = (a / d) * std::exp(-c / d);
    for (double w : {lambert_w0(arg), lambert_wm1(arg)}) {
      if (!std::isfinite(w)) continue;
      const double cand = t2 + (c / d + w) / lambda;
      if (cand >= t2 - 1e-12 &&
          (!std::isfinite(res.lambert_value) ||
           std::abs(cand - res.value) < std::abs(res.lambert_value - res.value)))
        res.lambert_value = cand;
    }
    res.lambert_matches = std::isfinite(res.lambert_value) &&
                          std::abs(res.lambert_value - res.value) <= 1e-9;
  }

  // The paper's printed form, evaluated on both real branches.
  {
    const double denom = 1.0 - 2.0 * a;
    const double xi = (-1.0 + 2.0 * a + 2.0 * lambda * t2 * a) / denom;
    const double arg = -std::exp(xi) / denom;
    for (double w : {lambert_w0(arg), lambert_wm1(arg)}) {
      if (!std::isfinite(w)) continue;
      const double cand = (w + xi) / lambda;
      if (!std::isfinite(res.paper_form_value) ||
          std::abs(cand - res.value) < std::abs(res.paper_form_value - res.value))
        res.paper_form_value = cand;
    }
    res.paper_form_matches = std::isfinite(res.paper_form_value) &&
                             std::abs(res.paper_form_value - res.value) <= 1e-9;
  }
  return res;
}

double k2_z1(double lambda, double s, double tau) {
  const double es = std::exp(-lambda * s);
  return (-1.0 + lambda * s + es) / lambda + (tau - s) * (1.0 - es);
}

double k2_z2(double lambda, double s, double t2, double tau) {
  const double es = std::exp(-lambda * s);
  const double dt = tau - t2;
  return es * (lambda * dt - 1.0 + std::exp(-lambda * dt)) / lambda;
}

double k2_success(double lambda, double s, double t2, double tau) {
  return zeta(k2_z1(lambda, s, tau), lambda) * zeta(k2_z2(lambda, s, t2, tau), lambda);
}

namespace {

template <class F>
double golden_max(const F& f, double a, double b, double tol) {
  const double gr = 0.6180339887498949;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d; d = c; fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

ThresholdK2Result optimal_threshold_k2(double lambda, double t2, double tau,
                                       double grid_step) {
  if (lambda <= 0.0 || t2 < 0.0 || tau < t2)
    throw std::invalid_argument("optimal_threshold_k2: invalid parameters");
  ThresholdK2Result res;
  const TeqResult teq = compute_t_eq(lambda, t2);
  res.teq = teq.exists ? teq.value : kInf;
  {
    const double inner = 1.0 - std::exp(-lambda * (tau - t2));
    const double l = (inner > 0.0) ? std::log(inner)
                                   : -std::numeric_limits<double>::infinity();
    res.s_thm6_printed = l / lambda;
    res.s_appendix_c = -l / lambda;
  }
  const auto obj = [&](double s) { return k2_success(lambda, s, t2, tau); };
  if (teq.exists && tau >= teq.value) {
    res.work_conserving = true;
    res.s_opt = t2;
    res.p_opt = obj(t2);
    return res;
  }
  // Coarse grid then golden refinement around the best cell.
  const double step = std::max(grid_step, t2 / 2e6);
  double best_s = t2, best_p = obj(t2);
  for (double s = 0.0; s < t2; s += step) {
    const double p = obj(s);
    if (p > best_p) { best_p = p; best_s = s; }
  }
  const double lo = std::max(0.0, best_s - step), hi = std::min(t2, best_s + step);
  const double s_ref = golden_max(obj, lo, hi, 1e-12 * std::max(t2, 1.0));
  if (obj(s_ref) >= best_p) { best_s = s_ref; best_p = obj(s_ref); }
  res.s_opt = best_s;
  res.p_opt = best_p;
  return res;
}

double energy_constrained_threshold(double x, double z, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("energy threshold: lambda must be > 0");
  if (x < 0.0 || z < 0.0 || z >= 1.0 || x >= 1.0 - z)
    throw std::invalid_argument("energy threshold: need 0 <= x < 1 - z");
  return -std::log1p(-x / (1.0 - z)) / lambda;
}

bool majorizes(const std::vector<double>& d1, const std::vector<double>& d2,
               double tol) {
  if (d1.size() != d2.size())
    throw std::invalid_argument("majorizes: length mismatch");
  std::vector<double> a = d1, b = d2;
  std::sort(a.rbegin(), a.rend());
  std::sort(b.rbegin(), b.rend());
  double sa = 0.0, sb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sa += a[k];
    sb += b[k];
    if (k + 1 < a.size() && sa > sb + tol) return false;
  }
  return std::abs(sa - sb) <= tol;
}

GeneralThresholdResult optimize_general_thresholds(const ArrivalSchedule& arr,
                                                   double lambda, double tau) {
  const std::size_t K = arr.frame_count();
  if (K < 2) throw std::invalid_argument("optimize_general_thresholds: need K >= 2");
  GeneralThresholdResult res;
  long evals = 0;
  const auto upper = [&](std::size_t i) {
    return (i + 1 < K) ? arr.times[i + 1] : tau;
  };
  const auto evaluate = [&](const ThresholdPlan& plan) {
    ++evals;
    FluidTrajectory traj(algorithm_b(arr, lambda, plan), lambda);
    return success_prob(traj.cci_vector(tau), lambda);
  };

  ThresholdPlan wc;
  for (std::size_t i = 0; i < K; ++i) wc.s.push_back(upper(i));
  res.p_work_conserving = evaluate(wc);
  res.plan = wc;
  res.p_opt = res.p_work_conserving;

  for (int start = 0; start < 8; ++start) {
    ThresholdPlan plan;
    const double frac = (start == 0) ? 1.0 : static_cast<double>(start - 1) / 6.0;
    for (std::size_t i = 0; i < K; ++i)
      plan.s.push_back(arr.times[i] + frac * (upper(i) - arr.times[i]));
    plan.s[K - 1] = tau;  // always transmit after t_K (Thm 7(iii))
    double p = evaluate(plan);
    for (int sweep = 0; sweep < 50; ++sweep) {
      const double before = p;
      for (std::size_t i = 0; i + 1 < K; ++i) {
        const double lo = arr.times[i], hi = upper(i);
        const auto obj = [&](double s) {
          ThresholdPlan trial = plan;
          trial.s[i] = s;
          return evaluate(trial);
        };
        // Coarse scan then golden refinement (the slice need not be unimodal).
        double bs = plan.s[i], bp = p;
        const int ngrid = 32;
        for (int g = 0; g <= ngrid; ++g) {
          const double s = lo + (hi - lo) * g / ngrid;
          const double v = obj(s);
          if (v > bp) { bp = v; bs = s; }
        }
        const double cell = (hi - lo) / ngrid;
        const double sr = golden_max(obj, std::max(lo, bs - cell),
                                     std::min(hi, bs + cell),
                                     1e-10 * std::max(1.0, hi - lo));
        const double vr = obj(sr);
        if (vr > bp) { bp = vr; bs = sr; }
        plan.s[i] = bs;
        p = bp;
      }
      if (p - before <= 1e-12) break;
    }
    if (p > res.p_opt) {
      res.p_opt = p;
      res.plan = plan;
    }
  }
  res.evaluations = evals;
  return res;
}

}  // namespace dtn::sched
