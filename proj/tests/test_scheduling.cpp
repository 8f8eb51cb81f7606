#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dtn/fluid.hpp"
#include "dtn/scheduling.hpp"
#include "oracles.hpp"

using dtn::ArrivalSchedule;
using dtn::FluidTrajectory;
using dtn::PiecewisePolicy;
namespace sched = dtn::sched;

TEST_CASE("algorithm_A: K=1 transmits frame 1 always") {
  ArrivalSchedule arr({0.0}, 1.0);
  auto pol = sched::algorithm_a(arr, 2.0);
  for (double t : {0.0, 0.5, 2.0})
    CHECK(pol.rates_at(t)[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("algorithm_A: K=2 structure e1, e2, then (1/2,1/2)") {
  // lambda*t2 < ln 2 so the equalization horizon exists.
  const double lam = 0.6, t2 = 0.8;
  ArrivalSchedule arr({0.0, t2}, 30.0);
  auto pol = sched::algorithm_a(arr, lam);
  CHECK(pol.rates_at(0.3)[0] == doctest::Approx(1.0));
  CHECK(pol.rates_at(0.3)[1] == doctest::Approx(0.0));
  CHECK(pol.rates_at(t2 + 0.01)[0] == doctest::Approx(0.0));
  CHECK(pol.rates_at(t2 + 0.01)[1] == doctest::Approx(1.0));
  // final regime: uniform split over both frames
  const auto& last = pol.segments.back();
  CHECK(last[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(last[1] == doctest::Approx(0.5).epsilon(1e-9));
  // equal CCIs at the horizon
  FluidTrajectory traj(pol, lam);
  CHECK(traj.cci(0, 30.0) == doctest::Approx(traj.cci(1, 30.0)).epsilon(1e-9));
}

TEST_CASE("algorithm_A: equalizes K=3 CCIs for large tau and is WC") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    // Slow rate and long horizon: equalization is feasible (the levelling
    // step otherwise correctly returns unequal max-min fair quotas).
    const double lam = 0.5 + 0.5 * U(rng);
    std::vector<double> ts{0.0, 0.15 * U(rng), 0.15 + 0.15 * U(rng)};
    std::sort(ts.begin(), ts.end());
    const double tau = ts.back() + 5.0 / lam;
    ArrivalSchedule arr(ts, tau);
    auto pol = sched::algorithm_a(arr, lam);
    CHECK(pol.work_conserving(ts.front(), tau));
    FluidTrajectory traj(pol, lam);
    const auto Z = traj.cci_vector(tau);
    const double zmax = *std::max_element(Z.begin(), Z.end());
    const double zmin = *std::min_element(Z.begin(), Z.end());
    CHECK(zmax - zmin <= 1e-6 * zmax);
  }
}

TEST_CASE("algorithm_B: degenerate plan equals algorithm_A") {
  const double lam = 2.5;
  ArrivalSchedule arr({0.0, 0.3, 0.6}, 1.2);
  sched::ThresholdPlan plan;
  plan.s = {0.3, 0.6, 1.2};
  auto a = sched::algorithm_a(arr, lam);
  auto b = sched::algorithm_b(arr, lam, plan);
  FluidTrajectory ta(a, lam), tb(b, lam);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(tb.cci(i, arr.tau) == doctest::Approx(ta.cci(i, arr.tau)).epsilon(1e-10));
}

TEST_CASE("algorithm_B: K=2 plan reproduces the threshold family closed forms") {
  const double lam = 3.0, t2 = 0.8, tau = 1.0, s = 0.3;
  ArrivalSchedule arr({0.0, t2}, tau);
  sched::ThresholdPlan plan;
  plan.s = {s, tau};
  auto pol = sched::algorithm_b(arr, lam, plan);
  FluidTrajectory traj(pol, lam);
  CHECK(traj.cci(0, tau) == doctest::Approx(sched::k2_z1(lam, s, tau)).epsilon(1e-10));
  CHECK(traj.cci(1, tau) ==
        doctest::Approx(sched::k2_z2(lam, s, t2, tau)).epsilon(1e-10));
  // Thm 7(iii): full rate on [t_K, tau].
  CHECK(pol.work_conserving(t2, tau));
  // invalid plans rejected
  sched::ThresholdPlan bad;
  bad.s = {0.9, tau};  // s_1 > t_2
  CHECK_THROWS_AS((void)sched::algorithm_b(arr, lam, bad), std::invalid_argument);
}

TEST_CASE("compute_t_eq: existence region, closed-form root, monotonicity") {
  // lambda*t2 < ln 2: root exists; verify on the closed forms.
  const double lam = 1.0, t2 = 0.5;
  auto r = sched::compute_t_eq(lam, t2);
  REQUIRE(r.exists);
  const double a = std::exp(-lam * t2);
  const double tau = r.value;
  const double z1 = (-1.0 + lam * t2 + a) / lam + (tau - t2) * (1.0 - a);
  const double z2 = a * (tau - t2) + (std::exp(-lam * tau) - a) / lam;
  CHECK(z1 == doctest::Approx(z2).epsilon(1e-9));
  CHECK(r.lambert_matches);

  // t2 -> 0 gives t_eq -> 0
  auto r0 = sched::compute_t_eq(1.0, 0.0);
  CHECK(r0.exists);
  CHECK(r0.value == doctest::Approx(0.0));

  // monotone in t2 at fixed lambda
  auto rA = sched::compute_t_eq(1.0, 0.3);
  auto rB = sched::compute_t_eq(1.0, 0.4);
  REQUIRE(rA.exists);
  REQUIRE(rB.exists);
  CHECK(rB.value > rA.value);

  // lambda*t2 >= ln 2: no equalization horizon.
  CHECK_FALSE(sched::compute_t_eq(1.0, 0.8).exists);
  CHECK_FALSE(sched::compute_t_eq(5.0, 0.8).exists);
}

TEST_CASE("optimal_threshold_K2: grid oracle agreement and WC boundary") {
  const double t2 = 0.8, tau = 1.0;
  for (double lam : {1.0, 3.0, 8.0, 15.0}) {
    auto res = sched::optimal_threshold_k2(lam, t2, tau, 1e-4);
    // exhaustive fine grid
    double best_s = 0.0, best_p = -1.0;
    for (double s = 0.0; s <= t2 + 1e-12; s += 1e-4) {
      const double p = sched::k2_success(lam, s, t2, tau);
      if (p > best_p) {
        best_p = p;
        best_s = s;
      }
    }
    CHECK(std::abs(res.s_opt - best_s) <= 2e-4);
    CHECK(res.p_opt >= best_p - 1e-10);
  }
  // tau beyond the equalization horizon: WC answer with a notice.
  auto teq = sched::compute_t_eq(0.5, 0.2);
  REQUIRE(teq.exists);
  auto wc = sched::optimal_threshold_k2(0.5, 0.2, teq.value + 1.0, 1e-4);
  CHECK(wc.work_conserving);
  CHECK(wc.s_opt == doctest::Approx(0.2));
}

TEST_CASE("energy_constrained_threshold") {
  CHECK(sched::energy_constrained_threshold(0.0, 0.0, 1.0) == doctest::Approx(0.0));
  CHECK(sched::energy_constrained_threshold(0.5, 0.0, 1.0) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(sched::energy_constrained_threshold(0.25, 0.5, 1.0) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // X(s) = z + x exactly
  const double s = sched::energy_constrained_threshold(0.3, 0.1, 2.0);
  FluidTrajectory traj(PiecewisePolicy::constant({1.0}), 2.0, 0.1);
  CHECK(traj.total(s) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK_THROWS_AS((void)sched::energy_constrained_threshold(1.0, 0.2, 1.0),
                  std::invalid_argument);
}

TEST_CASE("majorizes") {
  CHECK(sched::majorizes({1.0, 1.0}, {2.0, 0.0}));
  CHECK_FALSE(sched::majorizes({2.0, 0.0}, {1.0, 1.0}));
  CHECK(sched::majorizes({3.0, 2.0, 1.0}, {4.0, 1.0, 1.0}));
  CHECK_THROWS_AS((void)sched::majorizes({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("Schur concavity: majorized CCIs give higher success probability") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> U(0.0, 2.0);
  int checked = 0;
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<double> z1{U(rng), U(rng), U(rng)};
    std::vector<double> z2{U(rng), U(rng), U(rng)};
    // rescale to equal totals
    const double s1 = z1[0] + z1[1] + z1[2], s2 = z2[0] + z2[1] + z2[2];
    if (s2 <= 0.0) continue;
    for (double& v : z2) v *= s1 / s2;
    if (sched::majorizes(z1, z2)) {
      ++checked;
      CHECK(dtn::success_prob(z1, 1.5) >= dtn::success_prob(z2, 1.5) - 1e-12);
    }
  }
  CHECK(checked > 20);
}

TEST_CASE("optimize_general_thresholds: K=2 cross-check and WC baseline") {
  const double lam = 8.0, t2 = 0.8, tau = 1.0;
  ArrivalSchedule arr({0.0, t2}, tau);
  auto gen = sched::optimize_general_thresholds(arr, lam, tau);
  auto k2 = sched::optimal_threshold_k2(lam, t2, tau, 1e-4);
  CHECK(gen.p_opt == doctest::Approx(k2.p_opt).epsilon(1e-4));
  CHECK(gen.p_opt >= gen.p_work_conserving - 1e-12);
  // Thm 7(iii): full rate after t_K.
  auto pol = sched::algorithm_b(arr, lam, gen.plan);
  CHECK(pol.work_conserving(t2, tau));

  // Large tau: equalization feasible, WC plan optimal.
  ArrivalSchedule arr2({0.0, 0.2}, 8.0);
  auto gen2 = sched::optimize_general_thresholds(arr2, 0.5, 8.0);
  CHECK(gen2.p_opt == doctest::Approx(gen2.p_work_conserving).epsilon(1e-7));

  // K=3, clustered arrivals, high rate: strictly better than WC.
  ArrivalSchedule arr3({0.0, 0.7, 0.8}, 1.0);
  auto gen3 = sched::optimize_general_thresholds(arr3, 10.0, 1.0);
  CHECK(gen3.p_opt > gen3.p_work_conserving + 1e-4);
}

TEST_CASE("saturation: WC success collapses at high rate, threshold family does not") {
  const double t2 = 0.8, tau = 1.0;
  for (double lam : {8.0, 15.0}) {
    ArrivalSchedule arr({0.0, t2}, tau);
    auto wc = sched::algorithm_a(arr, lam);
    FluidTrajectory traj(wc, lam);
    const double p_wc = dtn::success_prob(traj.cci_vector(tau), lam);
    const double cap = dtn::zeta(tau * (1.0 - traj.total(t2)), lam);
    CHECK(p_wc <= cap + 1e-9);
    auto opt = sched::optimal_threshold_k2(lam, t2, tau, 1e-4);
    CHECK(opt.p_opt > p_wc);
  }
}

TEST_CASE("Thm 1/5: algorithm_A dominates random WC policies") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double lam = 2.0, tau = 2.0;
  std::vector<double> ts{0.0, 0.4, 0.9};
  ArrivalSchedule arr(ts, tau);
  auto a = sched::algorithm_a(arr, lam);
  FluidTrajectory ta(a, lam);
  const double pa = dtn::success_prob(ta.cci_vector(tau), lam);
  for (int rep = 0; rep < 50; ++rep) {
    auto comp = oracle::random_policy(rng, 3, tau, true, ts);
    FluidTrajectory tc(comp, lam);
    const auto Za = ta.cci_vector(tau);
    const auto Zc = tc.cci_vector(tau);
    CHECK(sched::majorizes(Za, Zc));
    CHECK(pa >= dtn::success_prob(Zc, lam) - 1e-12);
  }
}
