#include "dtn/coding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dtn/fluid.hpp"

namespace dtn {

namespace {

bool valid_field_order(int q) {
  for (int m = 1; m <= 8; ++m)
    if ((1 << m) == q) return true;
  return false;
}

}  // namespace

CodingScheme CodingScheme::fixed_redundancy(int H) {
  if (H < 0) throw std::invalid_argument("CodingScheme: H must be >= 0");
  CodingScheme s;
  s.kind = SchemeKind::FixedRedundancy;
  s.H = H;
  return s;
}

CodingScheme CodingScheme::rateless_after_tk(int q, double u) {
  if (!valid_field_order(q)) throw std::invalid_argument("CodingScheme: bad field order");
  if (u <= 0.0 || u > 1.0) throw std::invalid_argument("CodingScheme: u in (0,1]");
  CodingScheme s;
  s.kind = SchemeKind::RatelessAfterTK;
  s.q = q;
  s.u = u;
  return s;
}

CodingScheme CodingScheme::nc_before_tk(int q, double u) {
  if (!valid_field_order(q)) throw std::invalid_argument("CodingScheme: bad field order");
  if (u <= 0.0 || u > 1.0) throw std::invalid_argument("CodingScheme: u in (0,1]");
  CodingScheme s;
  s.kind = SchemeKind::NetworkCodingBeforeTK;
  s.q = q;
  s.u = u;
  return s;
}

double fixed_redundancy_prob(const std::vector<double>& D, std::size_t K) {
  if (K < 1 || D.size() < K)
    throw std::invalid_argument("fixed_redundancy_prob: need K >= 1 and |D| >= K");
  for (double d : D)
    if (d < -1e-15 || d > 1.0 + 1e-15)
      throw std::invalid_argument("fixed_redundancy_prob: probability out of range");
  // Poisson-binomial: dp[j] = P(j successes so far); equals the binomial
  // tail exactly when all D_i coincide.
  std::vector<double> dp(D.size() + 1, 0.0);
  dp[0] = 1.0;
  for (std::size_t i = 0; i < D.size(); ++i) {
    const double p = std::clamp(D[i], 0.0, 1.0);
    for (std::size_t j = i + 1; j-- > 0;) {
      dp[j + 1] += dp[j] * p;
      dp[j] *= (1.0 - p);
    }
  }
  double tail = 0.0;
  for (std::size_t j = K; j < dp.size(); ++j) tail += dp[j];
  return std::clamp(tail, 0.0, 1.0);
}

double coded_intensity_after_tk(double lambda, double u, double tK, double tau,
                                double XtK) {
  if (tau < tK) throw std::invalid_argument("coded_intensity_after_tk: tau < tK");
  if (u < 0.0) throw std::invalid_argument("coded_intensity_after_tk: u < 0");
  if (u == 0.0 || lambda == 0.0) return 0.0;
  const double d = tau - tK;
  const double lu = lambda * u;
  // lambda (1-X(tK)) int_0^d (1 - e^{-lu t}) dt, written with expm1 for
  // stability at small lu*d.
  return lambda * (1.0 - XtK) * (d + std::expm1(-lu * d) / lu);
}

namespace {

// Poisson pmf values P_0..P_{n-1}.
std::vector<double> poisson_head(double lam, std::size_t n) {
  std::vector<double> p(n, 0.0);
  if (n == 0) return p;
  p[0] = std::exp(-lam);
  for (std::size_t m = 1; m < n; ++m) p[m] = p[m - 1] * lam / static_cast<double>(m);
  return p;
}

}  // namespace

double full_rank_prob(std::size_t l, std::size_t k, double q) {
  if (l > k) throw std::invalid_argument("full_rank_prob: need l <= k");
  if (q < 2.0) throw std::invalid_argument("full_rank_prob: need q >= 2");
  double p = 1.0;
  for (std::size_t r = 0; r < l; ++r)
    p *= 1.0 - std::pow(q, -static_cast<double>(k - r));
  return p;
}

double bound_after_tk(const std::vector<double>& Z, double Lambda, std::size_t K,
                      double q, double lambda) {
  if (K < 1) throw std::invalid_argument("bound_after_tk: K >= 1");
  if (Lambda < 0.0) throw std::invalid_argument("bound_after_tk: Lambda >= 0");
  if (Z.size() != K - 1)
    throw std::invalid_argument("bound_after_tk: need K-1 information-frame CCIs");
  const std::vector<double> D = per_frame_delivery(Z, lambda);
  const std::vector<double> P = poisson_head(Lambda, K);  // P_0..P_{K-1}
  double total = 0.0;
  // E runs over subsets of the K-1 information frames delivered uncoded.
  const std::size_t nsub = static_cast<std::size_t>(1) << (K - 1);
  for (std::size_t mask = 0; mask < nsub; ++mask) {
    double term = 1.0;
    std::size_t e = 0;
    for (std::size_t i = 0; i + 1 < K; ++i) {
      if (mask & (static_cast<std::size_t>(1) << i)) {
        term *= D[i];
        ++e;
      } else {
        term *= 1.0 - D[i];
      }
    }
    // Need at least K-e coded frames; the first K-e of them must extend the
    // rank past the e delivered unit rows.
    double head = 0.0;
    for (std::size_t m = 0; m < K - e; ++m) head += P[m];
    double rank = 1.0;
    for (std::size_t r = 0; r < K - e; ++r)
      rank *= 1.0 - std::pow(q, -static_cast<double>(K - (r + e)));
    total += term * (1.0 - head) * rank;
  }
  return std::clamp(total, 0.0, 1.0);
}

double coded_intensity_before_tk(const ArrivalSchedule& arr, double lambda,
                                 double u, double tau, std::size_t k) {
  const std::size_t K = arr.frame_count();
  if (k < 1 || k > K) throw std::invalid_argument("coded_intensity_before_tk: bad k");
  if (u <= 0.0) throw std::invalid_argument("coded_intensity_before_tk: need u > 0");
  if (lambda == 0.0) return 0.0;  // no contacts, Y_k == 0
  const double lu = lambda * u;
  const double tk = arr.times[k - 1];
  if (k < K) {
    const double tk1 = std::min(arr.times[k], tau);
    if (tk1 <= tk) return 0.0;
    return lambda * (std::exp(-lu * tk) * (tau - tk - 1.0 / lu) +
                     std::exp(-lu * tk1) * (1.0 / lu + tk1 - tau));
  }
  if (tau <= tk) return 0.0;
  return lambda * (std::exp(-lu * tk) * (tau - tk - 1.0 / lu) +
                   std::exp(-lu * tau) / lu);
}

double nc_rank_success_exact(const std::vector<double>& Lambdas, std::size_t K,
                             double q) {
  if (Lambdas.size() != K) throw std::invalid_argument("nc_rank_success_exact: size");
  // State: probability over the accumulated rank d, classes processed in
  // increasing k. Class-k rows live in the nested subspace of dimension k,
  // so one uniform row raises the rank from d with probability 1 - q^{d-k}.
  std::vector<double> state(K + 1, 0.0);
  state[0] = 1.0;
  for (std::size_t k = 1; k <= K; ++k) {
    const double lam = Lambdas[k - 1];
    std::vector<double> next(K + 1, 0.0);
    std::vector<double> cur = state;
    double pm = std::exp(-lam), acc = 0.0;
    for (std::size_t m = 0; m < 4000; ++m) {
      for (std::size_t d = 0; d <= K; ++d) next[d] += pm * cur[d];
      acc += pm;
      if (acc > 1.0 - 1e-15 && m >= 4) break;
      std::vector<double> stepped(K + 1, 0.0);
      for (std::size_t d = 0; d <= K; ++d) {
        if (cur[d] == 0.0) continue;
        const double up =
            (d < k) ? 1.0 - std::pow(q, static_cast<double>(d) - static_cast<double>(k))
                    : 0.0;
        if (d < K) stepped[d + 1] += cur[d] * up;
        stepped[d] += cur[d] * (1.0 - up);
      }
      cur.swap(stepped);
      pm *= lam / static_cast<double>(m + 1);
    }
    state.swap(next);
  }
  return state[K];
}

namespace {

// Support-disjoint variant of the Thm 10 chain enumeration: the chain lists
// exactly the classes k < K with at least one reception; classes outside it
// contribute their zero-reception probability D_{k,0}.
double chain_bound(const std::vector<double>& Lam, std::size_t K, double q) {
  std::vector<double> d0(K + 1, 0.0);  // D_{k,0}
  for (std::size_t k = 1; k <= K; ++k) d0[k] = std::exp(-Lam[k - 1]);

  const auto f = [&](std::size_t l, std::size_t k) {
    const double lam = Lam[k - 1];
    if (l < k) {
      const auto pm = poisson_head(lam, l + 1);
      return full_rank_prob(l, k, q) * pm[l];
    }
    const auto pm = poisson_head(lam, k);
    double head = 0.0;
    for (double v : pm) head += v;
    return full_rank_prob(k, k, q) * (1.0 - head);
  };

  double total = 0.0;
  // Enumerate chains as subsets of {1..K-1}; kk = [K, k_1 > ... > k_j].
  const std::size_t nsub = static_cast<std::size_t>(1) << (K - 1);
  for (std::size_t mask = 0; mask < nsub; ++mask) {
    std::vector<std::size_t> kk{K};
    double zero_fac = 1.0;
    for (std::size_t k = K - 1; k >= 1; --k) {
      if (mask & (static_cast<std::size_t>(1) << (k - 1))) kk.push_back(k);
      else zero_fac *= d0[k];
      if (k == 1) break;
    }
    // Recursive sweep over feasible rank allocations l_0..l_j.
    struct Rec {
      const std::vector<std::size_t>& kk;
      std::size_t K;
      const decltype(f)& ff;
      double zero_fac;
      double total = 0.0;
      void run(std::size_t i, std::size_t acc, double prod) {
        if (i == kk.size()) {
          total += prod * zero_fac;
          return;
        }
        const std::size_t k = kk[i];
        const std::size_t knext = (i + 1 < kk.size()) ? kk[i + 1] : 0;
        const std::size_t need = K > knext + acc ? K - knext - acc : 0;
        const std::size_t lo = std::max<std::size_t>(need, 1);
        for (std::size_t l = lo; l <= k; ++l) run(i + 1, acc + l, prod * ff(l, k));
      }
    } rec{kk, K, f, zero_fac};
    rec.run(0, 0, 1.0);
    total += rec.total;
  }
  return total;
}

}  // namespace

double bound_before_tk(const ArrivalSchedule& arr, double lambda, double u,
                       double tau, std::size_t K, double q) {
  if (K < 1) throw std::invalid_argument("bound_before_tk: K >= 1");
  if (K > 12)
    throw std::invalid_argument(
        "bound_before_tk: K > 12 exceeds the combinatorial enumeration limit");
  if (q < 2.0) throw std::invalid_argument("bound_before_tk: q >= 2");
  if (arr.frame_count() != K)
    throw std::invalid_argument("bound_before_tk: schedule has wrong K");
  std::vector<double> Lam(K);
  for (std::size_t k = 1; k <= K; ++k)
    Lam[k - 1] = coded_intensity_before_tk(arr, lambda, u, tau, k);
  const double chained = chain_bound(Lam, K, q);
  const double exact = nc_rank_success_exact(Lam, K, q);
  return std::clamp(std::min(chained, exact), 0.0, 1.0);
}

}  // namespace dtn
