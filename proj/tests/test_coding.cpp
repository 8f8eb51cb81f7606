#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dtn/coding.hpp"
#include "dtn/fluid.hpp"
#include "dtn/gf.hpp"
#include "oracles.hpp"

using dtn::ArrivalSchedule;

namespace {

// Exhaustive oracle: P(at least K of the n Bernoulli(D_i) succeed).
double subset_oracle(const std::vector<double>& D, std::size_t K) {
  const std::size_t n = D.size();
  double total = 0.0;
  for (std::size_t mask = 0; mask < (1u << n); ++mask) {
    std::size_t cnt = 0;
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        p *= D[i];
        ++cnt;
      } else {
        p *= 1.0 - D[i];
      }
    }
    if (cnt >= K) total += p;
  }
  return total;
}

// Brute-force rank over F_2 by row-span enumeration.
std::size_t f2_span_rank(const std::vector<std::vector<uint16_t>>& rows,
                         std::size_t cols) {
  std::vector<uint32_t> packed;
  for (const auto& r : rows) {
    uint32_t v = 0;
    for (std::size_t c = 0; c < cols; ++c)
      if (r[c]) v |= 1u << c;
    packed.push_back(v);
  }
  std::vector<uint32_t> span{0};
  for (uint32_t v : packed) {
    const std::size_t sz = span.size();
    for (std::size_t i = 0; i < sz; ++i) {
      const uint32_t w = span[i] ^ v;
      if (std::find(span.begin(), span.end(), w) == span.end()) span.push_back(w);
    }
  }
  std::size_t r = 0;
  while ((1u << r) < span.size()) ++r;
  return r;
}

}  // namespace

TEST_CASE("fixed_redundancy_prob: trivial and enumerated cases") {
  CHECK(dtn::fixed_redundancy_prob({1.0, 1.0, 1.0}, 2) == doctest::Approx(1.0));
  // H = 0 reduces to the product
  CHECK(dtn::fixed_redundancy_prob({0.3, 0.6}, 2) == doctest::Approx(0.18));
  // K=2, H=1, all 0.5 -> 0.5
  CHECK(dtn::fixed_redundancy_prob({0.5, 0.5, 0.5}, 2) == doctest::Approx(0.5));

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 2 + rep % 10;  // up to 11 frames
    const std::size_t K = 1 + static_cast<std::size_t>(U(rng) * n);
    std::vector<double> D(n);
    for (double& d : D) d = U(rng);
    CHECK(dtn::fixed_redundancy_prob(D, K) ==
          doctest::Approx(subset_oracle(D, K)).epsilon(1e-12));
  }
  CHECK_THROWS_AS((void)dtn::fixed_redundancy_prob({1.2}, 1), std::invalid_argument);
}

TEST_CASE("fixed_redundancy_prob monotone in H") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> U(0.2, 0.9);
  const std::size_t K = 4;
  const double d = U(rng);
  double prev = 0.0;
  for (std::size_t H = 0; H <= 6; ++H) {
    std::vector<double> D(K + H, d);
    const double p = dtn::fixed_redundancy_prob(D, K);
    CHECK(p >= prev - 1e-14);
    prev = p;
  }
}

TEST_CASE("coded_intensity_after_tk") {
  CHECK(dtn::coded_intensity_after_tk(1.0, 1.0, 0.5, 0.5, 0.3) == doctest::Approx(0.0));
  CHECK(dtn::coded_intensity_after_tk(1.0, 0.0, 0.0, 1.0, 0.0) == doctest::Approx(0.0));
  CHECK(dtn::coded_intensity_after_tk(1.0, 1.0, 0.0, 1.0, 0.0) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  // quadrature cross-check
  const double lam = 2.3, u = 0.7, tK = 0.4, tau = 1.3, XtK = 0.35;
  const double ref = lam * oracle::simpson(
                               [&](double t) {
                                 return (1.0 - XtK) *
                                        (1.0 - std::exp(-lam * u * (t - tK)));
                               },
                               tK, tau, 20000);
  CHECK(dtn::coded_intensity_after_tk(lam, u, tK, tau, XtK) ==
        doctest::Approx(ref).epsilon(1e-10));
}

TEST_CASE("bound_after_tk: specializations") {
  CHECK(dtn::bound_after_tk({0.5, 0.7}, 0.0, 3, 256.0, 1.0) == doctest::Approx(0.0));
  // K = 1: no information frames, bound = (1 - e^{-Lambda})(1 - 1/q)
  for (double L : {0.2, 1.0, 3.0})
    CHECK(dtn::bound_after_tk({}, L, 1, 16.0, 1.0) ==
          doctest::Approx((1.0 - std::exp(-L)) * (1.0 - 1.0 / 16.0)).epsilon(1e-12));
  // bounded by 1 and nonnegative on random inputs
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> U(0.0, 3.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> Z{U(rng), U(rng), U(rng)};
    const double b = dtn::bound_after_tk(Z, U(rng), 4, 256.0, 1.0 + U(rng));
    CHECK(b >= 0.0);
    CHECK(b <= 1.0);
  }
}

TEST_CASE("coded_intensity_before_tk: closed form vs quadrature") {
  const double lam = 1.0, u = 1.0, tau = 1.0;
  ArrivalSchedule arr({0.0, 0.5}, tau);
  for (std::size_t k = 1; k <= 2; ++k) {
    const double tk = arr.times[k - 1];
    const double tk1 = (k < 2) ? arr.times[k] : tau;
    const double ref = lam * oracle::simpson(
                                 [&](double t) {
                                   const double hi = std::min(t, tk1);
                                   if (t < tk) return 0.0;
                                   return std::exp(-lam * u * tk) -
                                          std::exp(-lam * u * hi);
                                 },
                                 tk, tau, 20000);
    CHECK(dtn::coded_intensity_before_tk(arr, lam, u, tau, k) ==
          doctest::Approx(ref).epsilon(1e-10));
  }
  // zero-width release window
  ArrivalSchedule deg({0.2, 0.2, 0.6}, 1.0);
  CHECK(dtn::coded_intensity_before_tk(deg, 2.0, 0.5, 1.0, 1) ==
        doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("bound_before_tk: specializations and q-tightness") {
  // lambda = 0: no contacts at all.
  ArrivalSchedule arr1({0.0}, 1.0);
  CHECK(dtn::bound_before_tk(arr1, 0.0, 1.0, 1.0, 1, 256.0) == doctest::Approx(0.0));
  // K = 1 closed form
  for (double q : {2.0, 256.0}) {
    const double L1 = dtn::coded_intensity_before_tk(arr1, 1.3, 0.8, 1.0, 1);
    CHECK(dtn::bound_before_tk(arr1, 1.3, 0.8, 1.0, 1, q) ==
          doctest::Approx((1.0 - 1.0 / q) * (1.0 - std::exp(-L1))).epsilon(1e-12));
  }
  // nondecreasing in q; never above the exact rank success probability
  ArrivalSchedule arr({0.0, 0.3, 0.6}, 1.2);
  double prev = -1.0;
  for (double q : {2.0, 4.0, 16.0, 256.0}) {
    const double b = dtn::bound_before_tk(arr, 2.0, 0.9, 1.2, 3, q);
    CHECK(b >= prev - 1e-12);
    prev = b;
    std::vector<double> L;
    for (std::size_t k = 1; k <= 3; ++k)
      L.push_back(dtn::coded_intensity_before_tk(arr, 2.0, 0.9, 1.2, k));
    CHECK(b <= dtn::nc_rank_success_exact(L, 3, q) + 1e-12);
  }
  CHECK_THROWS_AS(
      (void)dtn::bound_before_tk(ArrivalSchedule(std::vector<double>(13, 0.0), 1.0),
                                 1.0, 1.0, 1.0, 13, 2.0),
      std::invalid_argument);
}

TEST_CASE("nc_rank_success_exact: K=1 thinning identity") {
  for (double q : {2.0, 8.0, 256.0})
    for (double L : {0.3, 1.0, 4.0})
      CHECK(dtn::nc_rank_success_exact({L}, 1, q) ==
            doctest::Approx(1.0 - std::exp(-L * (1.0 - 1.0 / q))).epsilon(1e-10));
}

TEST_CASE("full_rank_prob: exact rationals by matrix enumeration (q = 2)") {
  CHECK(dtn::full_rank_prob(0, 3, 2.0) == doctest::Approx(1.0));
  CHECK(dtn::full_rank_prob(1, 2, 2.0) == doctest::Approx(0.75));
  CHECK(dtn::full_rank_prob(2, 2, 2.0) == doctest::Approx(3.0 / 8.0));
  CHECK_THROWS_AS((void)dtn::full_rank_prob(3, 2, 2.0), std::invalid_argument);

  // exhaustive: count l x k binary matrices with rank l
  for (std::size_t k = 1; k <= 4; ++k) {
    for (std::size_t l = 0; l <= k; ++l) {
      const std::size_t bits = l * k;
      std::size_t full = 0;
      for (std::size_t mask = 0; mask < (1ull << bits); ++mask) {
        std::vector<std::vector<uint16_t>> rows(l, std::vector<uint16_t>(k, 0));
        for (std::size_t b = 0; b < bits; ++b)
          if (mask & (1ull << b)) rows[b / k][b % k] = 1;
        dtn::FieldMatrix m;
        m.q = 2;
        m.cols = k;
        for (auto& r : rows) m.add_row(r);
        if (dtn::gf_rank(m) == l) ++full;
      }
      const double expect =
          static_cast<double>(full) / std::pow(2.0, static_cast<double>(bits));
      CHECK(dtn::full_rank_prob(l, k, 2.0) == doctest::Approx(expect).epsilon(1e-15));
    }
  }
}

TEST_CASE("gf_rank: identities and span oracle") {
  dtn::FieldMatrix id;
  id.q = 256;
  id.cols = 4;
  for (std::size_t i = 0; i < 4; ++i) {
    std::vector<uint16_t> r(4, 0);
    r[i] = 1;
    id.add_row(r);
  }
  CHECK(dtn::gf_rank(id) == 4);

  dtn::FieldMatrix zero;
  zero.q = 2;
  zero.cols = 3;
  zero.add_row({0, 0, 0});
  CHECK(dtn::gf_rank(zero) == 0);

  std::mt19937_64 rng(34);
  for (int rep = 0; rep < 50; ++rep) {
    dtn::FieldMatrix m;
    m.q = 2;
    m.cols = 4;
    std::vector<std::vector<uint16_t>> rows;
    for (int r = 0; r < 5; ++r) {
      std::vector<uint16_t> row(4);
      for (auto& v : row) v = static_cast<uint16_t>(rng() & 1u);
      rows.push_back(row);
      m.add_row(row);
    }
    CHECK(dtn::gf_rank(m) == f2_span_rank(rows, 4));
  }
  dtn::FieldMatrix bad;
  bad.q = 4;
  bad.cols = 2;
  CHECK_THROWS_AS(bad.add_row({5, 0}), std::invalid_argument);
}

TEST_CASE("RankTracker agrees with gf_rank incrementally") {
  std::mt19937_64 rng(35);
  for (int q : {2, 16, 256}) {
    dtn::RankTracker tr(q, 5);
    dtn::FieldMatrix m;
    m.q = q;
    m.cols = 5;
    for (int r = 0; r < 8; ++r) {
      std::vector<uint16_t> row(5);
      for (auto& v : row) v = static_cast<uint16_t>(rng() % q);
      m.add_row(row);
      tr.add_row(row);
      CHECK(tr.rank() == dtn::gf_rank(m));
    }
  }
}

TEST_CASE("degenerate coding: FixedRedundancy(0) equals None product") {
  const std::vector<double> Z{0.4, 0.9, 1.3};
  const double lam = 1.7;
  CHECK(dtn::fixed_redundancy_prob(dtn::per_frame_delivery(Z, lam), 3) ==
        doctest::Approx(dtn::success_prob(Z, lam)).epsilon(1e-14));
}
