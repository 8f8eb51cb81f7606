#pragma once

#include <cstddef>
#include <vector>

#include "dtn/policy.hpp"

namespace dtn {

enum class SchemeKind { None, FixedRedundancy, RatelessAfterTK, NetworkCodingBeforeTK };

struct CodingScheme {
  SchemeKind kind = SchemeKind::None;
  int H = 0;        // extra MDS frames (FixedRedundancy)
  int q = 256;      // field order, 2^m with 1 <= m <= 8
  double u = 1.0;   // constant total coded rate (both network-coding modes)

  static CodingScheme none() { return {}; }
  static CodingScheme fixed_redundancy(int H);
  static CodingScheme rateless_after_tk(int q, double u = 1.0);
  static CodingScheme nc_before_tk(int q, double u);
};

// P(at least K of the n = K+H frames delivered); exact binomial tail for
// equal D_i, Poisson-binomial convolution otherwise.
double fixed_redundancy_prob(const std::vector<double>& D, std::size_t K);

// Lambda = lambda * int_tK^tau Y_K with Y_K(t) = (1 - XtK)(1 - e^{-lambda u (t-tK)}).
double coded_intensity_after_tk(double lambda, double u, double tK, double tau,
                                double XtK);

// Thm 9 lower bound: Z has the K-1 information-frame CCIs.
double bound_after_tk(const std::vector<double>& Z, double Lambda, std::size_t K,
                      double q, double lambda);

// Appendix Lambda_k closed forms for coding before t_K under constant rate u;
// k is 1-based, k = K uses the Lambda_K display.
double coded_intensity_before_tk(const ArrivalSchedule& arr, double lambda,
                                 double u, double tau, std::size_t k);

// Thm 10 lower bound for coding before t_K. Returns the minimum of the
// support-disjoint chain enumeration and the exact nested-subspace rank
// evaluation (see README: the printed enumeration double counts), so the
// result is always a true lower bound. Rejects K > 12.
double bound_before_tk(const ArrivalSchedule& arr, double lambda, double u,
                       double tau, std::size_t K, double q);

// Exact success probability of the before-t_K model given the Poisson class
// intensities: DP over nested subspaces. Exposed for validation.
double nc_rank_success_exact(const std::vector<double>& Lambdas, std::size_t K,
                             double q);

// P_{l,k,l} = prod_{r=0}^{l-1} (1 - q^{-(k-r)}).
double full_rank_prob(std::size_t l, std::size_t k, double q);

}  // namespace dtn
