// Benchmark: OpenMP-parallel replication loop vs. the serial reference.
// Verifies bit-identical summaries and reports wall-clock speedup.
#include <chrono>
#include <cstdio>
#include <cstring>

#include "dtn/scheduling.hpp"
#include "dtn/sim.hpp"

#ifdef DTN_HAVE_OPENMP
#include <omp.h>
#endif

namespace {

double wall_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

bool identical(const dtn::SummaryStats& a, const dtn::SummaryStats& b) {
  if (a.reps != b.reps || a.n_success != b.n_success) return false;
  if (std::memcmp(&a.p_hat, &b.p_hat, sizeof(double)) != 0) return false;
  if (std::memcmp(&a.mean_delivery, &b.mean_delivery, sizeof(double)) != 0)
    return false;
  if (a.zhat.size() != b.zhat.size()) return false;
  for (std::size_t i = 0; i < a.zhat.size(); ++i)
    if (std::memcmp(&a.zhat[i], &b.zhat[i], sizeof(double)) != 0) return false;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t reps = 20000;
  if (argc > 1) reps = static_cast<std::size_t>(std::atoll(argv[1]));

  dtn::Scenario sc;
  sc.arr = dtn::ArrivalSchedule({0.0, 0.3, 0.6}, 1.0);
  sc.lambda = 5.0;
  sc.N = 500;
  sc.reps = reps;
  sc.seed = 2024;
  const auto policy = dtn::sched::algorithm_a(sc.arr, sc.lambda);

#ifdef DTN_HAVE_OPENMP
  std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not available; both runs are serial\n");
#endif
  std::printf("scenario: K=3, N=%zu, lambda=%g, reps=%zu\n", sc.N, sc.lambda, reps);

  const double t0 = wall_seconds();
  const auto serial = dtn::simulate(sc, policy, dtn::ExecMode::Serial);
  const double t1 = wall_seconds();
  const auto parallel = dtn::simulate(sc, policy, dtn::ExecMode::Parallel);
  const double t2 = wall_seconds();

  std::printf("serial   : %.3f s   p_hat = %.6f\n", t1 - t0, serial.p_hat);
  std::printf("parallel : %.3f s   p_hat = %.6f\n", t2 - t1, parallel.p_hat);
  if ((t2 - t1) > 0.0)
    std::printf("speedup  : %.2fx\n", (t1 - t0) / (t2 - t1));
  if (!identical(serial, parallel)) {
    std::printf("FAIL: serial and parallel summaries differ\n");
    return 1;
  }
  std::printf("summaries bit-identical: OK\n");
  return 0;
}
