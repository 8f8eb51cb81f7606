#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dtn/coding.hpp"
#include "dtn/fluid.hpp"
#include "dtn/gf.hpp"
#include "dtn/policy.hpp"

namespace dtn {

struct Scenario {
  std::size_t N = 100;       // relay count; per-pair contact rate is lambda/N
  double lambda = 1.0;       // aggregate contact rate
  ArrivalSchedule arr;       // frame arrivals and deadline tau
  CodingScheme coding;       // success rule + coded transmission parameters
  std::optional<EnergyModel> energy;
  uint64_t seed = 0;
  std::size_t reps = 1000;
  bool direct_delivery = false;  // opt-in source->destination contacts

  // Information frames needed for success (K). Derived from the schedule and
  // the coding scheme unless set explicitly.
  std::size_t file_k = 0;
  std::size_t effective_k() const;
};

struct ReplicationResult {
  bool success = false;
  double delivery_time = -1.0;  // < 0 when the file was not delivered by tau
  uint32_t copies = 0;
  double energy = 0.0;
  std::vector<double> zhat;  // exact per-replication Z_i(tau), info frames
};

struct SummaryStats {
  std::size_t reps = 0;
  double p_hat = 0.0, se = 0.0, ci_lo = 0.0, ci_hi = 0.0;
  std::size_t n_success = 0;
  double mean_delivery = 0.0;  // among successes; 0 when none
  double mean_copies = 0.0, mean_energy = 0.0;
  uint32_t max_copies = 0;
  std::vector<double> zhat;  // mean empirical Z_i(tau)
};

enum class ExecMode { Parallel, Serial };

ReplicationResult run_replication(const Scenario& sc, const PiecewisePolicy& policy,
                                  std::size_t rep);

SummaryStats simulate(const Scenario& sc, const PiecewisePolicy& policy,
                      ExecMode mode = ExecMode::Parallel);

struct CciCurves {
  std::vector<double> grid;
  std::vector<std::vector<double>> xhat;     // [frame][grid] mean fraction
  std::vector<std::vector<double>> xhat_se;  // standard errors
  std::vector<std::vector<double>> zhat;     // trapezoidal integral of xhat
};

CciCurves empirical_cci(const Scenario& sc, const PiecewisePolicy& policy,
                        const std::vector<double>& grid,
                        ExecMode mode = ExecMode::Parallel);

// Success test on accumulated destination headers for the given scheme.
bool decode_check(const FieldMatrix& headers, std::size_t K,
                  const CodingScheme& coding);

}  // namespace dtn
