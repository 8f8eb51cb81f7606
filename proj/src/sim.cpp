#include "dtn/sim.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "dtn/rng.hpp"

namespace dtn {

std::size_t Scenario::effective_k() const {
  if (file_k > 0) return file_k;
  const std::size_t n = arr.frame_count();
  switch (coding.kind) {
    case SchemeKind::FixedRedundancy:
      if (n <= static_cast<std::size_t>(coding.H))
        throw std::invalid_argument("Scenario: need K = frames - H >= 1");
      return n - static_cast<std::size_t>(coding.H);
    default:
      return n;
  }
}

namespace {

struct RepContext {
  const std::vector<double>* grid = nullptr;  // optional X-curve recording
  std::vector<std::vector<double>>* xrec = nullptr;  // [frame][grid]
};

bool needs_rank(const CodingScheme& c) {
  return c.kind == SchemeKind::RatelessAfterTK ||
         c.kind == SchemeKind::NetworkCodingBeforeTK;
}

ReplicationResult replicate(const Scenario& sc, const PiecewisePolicy& policy,
                            std::size_t rep, const RepContext& ctx) {
  const double tau = sc.arr.tau;
  const double lambda = sc.lambda;
  const std::size_t N = sc.N;
  const std::size_t K = sc.effective_k();
  const std::size_t ninfo =
      (sc.coding.kind == SchemeKind::RatelessAfterTK) ? K - 1 : policy.frame_count();
  const double tK = sc.arr.tK();
  const bool rank_mode = needs_rank(sc.coding);
  const int q = sc.coding.q;
  const uint32_t budget = sc.energy
                              ? static_cast<uint32_t>(std::floor(sc.energy->x *
                                                                 static_cast<double>(N)))
                              : 0xFFFFFFFFu;

  CounterRng rng(sc.seed, rep);
  ReplicationResult res;
  res.zhat.assign(ninfo, 0.0);

  // Relay buffers: -1 empty, [0, ninfo) information frame, >= ninfo coded
  // (one-frame buffers: a relay never accepts a second frame).
  std::vector<int32_t> buf(N, -1);
  std::vector<std::vector<uint16_t>> coded_rows;
  std::vector<uint32_t> count(ninfo, 0);  // relays holding info frame i

  std::vector<char> delivered(ninfo, 0);
  std::size_t distinct = 0;
  RankTracker tracker(rank_mode ? q : 2, K);
  std::vector<char> relay_done(N, 0);  // this relay's frame already at dest

  const auto success_now = [&]() {
    switch (sc.coding.kind) {
      case SchemeKind::None:
        return distinct >= ninfo && ninfo == K;
      case SchemeKind::FixedRedundancy:
        return distinct >= K;
      default:
        return tracker.rank() >= K;
    }
  };

  // What the source hands over at a contact at time t: -1 nothing,
  // [0, ninfo) an information frame, ninfo a fresh coded frame.
  const auto sample_tx = [&](double t) -> int32_t {
    if (res.copies >= budget) return -1;
    switch (sc.coding.kind) {
      case SchemeKind::NetworkCodingBeforeTK: {
        std::size_t arrived = 0;
        while (arrived < K && sc.arr.times[arrived] <= t) ++arrived;
        if (arrived == 0) return -1;
        if (rng.uniform() >= sc.coding.u) return -1;
        std::vector<uint16_t> row(K, 0);
        for (std::size_t c = 0; c < arrived; ++c)
          row[c] = static_cast<uint16_t>(rng.below(static_cast<uint64_t>(q)));
        coded_rows.push_back(std::move(row));
        return static_cast<int32_t>(ninfo);
      }
      case SchemeKind::RatelessAfterTK: {
        if (t >= tK) {
          if (rng.uniform() >= sc.coding.u) return -1;
          std::vector<uint16_t> row(K, 0);
          for (std::size_t c = 0; c < K; ++c)
            row[c] = static_cast<uint16_t>(rng.below(static_cast<uint64_t>(q)));
          coded_rows.push_back(std::move(row));
          return static_cast<int32_t>(ninfo);
        }
        [[fallthrough]];
      }
      default: {
        const auto& u = policy.rates_at(t);
        double r = rng.uniform();
        for (std::size_t i = 0; i < u.size(); ++i) {
          if (r < u[i]) return static_cast<int32_t>(i);
          r -= u[i];
        }
        return -1;
      }
    }
  };

  const auto deliver_to_dest = [&](int32_t frame) {
    if (frame < 0) return;
    if (frame < static_cast<int32_t>(ninfo)) {
      if (!delivered[frame]) {
        delivered[frame] = 1;
        ++distinct;
      }
      if (rank_mode) {
        std::vector<uint16_t> row(K, 0);
        row[frame] = 1;
        tracker.add_row(std::move(row));
      }
    } else if (rank_mode) {
      tracker.add_row(coded_rows[static_cast<std::size_t>(frame) -
                                 ninfo]);
    }
  };

  // Rates chosen to realize the analytic model exactly: the source meets each
  // relay at rate lambda (fraction dynamics dX = lambda*u*(1-X)dt), while the
  // destination meets each relay at rate lambda/N (frame-i receipt intensity
  // lambda*X_i, hence D_i = 1 - e^{-lambda Z_i}).
  const double r_sr = lambda * static_cast<double>(N);
  const double r_rd = lambda;
  const double r_sd = sc.direct_delivery ? lambda / static_cast<double>(N) : 0.0;
  const double total_rate = r_sr + r_rd + r_sd;

  double t = 0.0;
  std::size_t gp = 0;  // grid pointer
  bool done = false;

  const auto advance_to = [&](double tnew) {
    const double hi = std::min(tnew, tau);
    if (hi > t) {
      const double dt = hi - t;
      for (std::size_t i = 0; i < ninfo; ++i)
        res.zhat[i] += static_cast<double>(count[i]) * dt / static_cast<double>(N);
    }
    if (ctx.grid) {
      while (gp < ctx.grid->size() && (*ctx.grid)[gp] < tnew) {
        for (std::size_t i = 0; i < ninfo; ++i)
          (*ctx.xrec)[i][gp] =
              static_cast<double>(count[i]) / static_cast<double>(N);
        ++gp;
      }
    }
  };

  if (total_rate > 0.0 && lambda > 0.0) {
    for (;;) {
      const double tnew = t + rng.exponential(total_rate);
      advance_to(tnew);
      if (tnew >= tau) break;
      t = tnew;
      const double pick = rng.uniform() * total_rate;
      const std::size_t relay = static_cast<std::size_t>(
          rng.below(static_cast<uint64_t>(N)));
      if (pick < r_sr) {
        if (buf[relay] < 0) {
          const int32_t frame = sample_tx(t);
          if (frame >= 0) {
            buf[relay] = (frame == static_cast<int32_t>(ninfo))
                             ? static_cast<int32_t>(ninfo + coded_rows.size() - 1)
                             : frame;
            if (frame < static_cast<int32_t>(ninfo)) ++count[frame];
            ++res.copies;
          }
        }
      } else if (pick < r_sr + r_rd) {
        if (buf[relay] >= 0 && !relay_done[relay]) {
          deliver_to_dest(buf[relay]);
          relay_done[relay] = 1;  // repeat contacts would only redeliver
        }
      } else {
        const int32_t frame = sample_tx(t);
        if (frame >= 0) {
          deliver_to_dest(frame == static_cast<int32_t>(ninfo)
                              ? static_cast<int32_t>(ninfo + coded_rows.size() - 1)
                              : frame);
          ++res.copies;
        }
      }
      if (!done && success_now()) {
        done = true;
        res.success = true;
        res.delivery_time = t;
      }
    }
  } else {
    advance_to(tau);
  }
  // Flush grid points at or beyond tau.
  if (ctx.grid) {
    while (gp < ctx.grid->size()) {
      for (std::size_t i = 0; i < ninfo; ++i)
        (*ctx.xrec)[i][gp] = static_cast<double>(count[i]) / static_cast<double>(N);
      ++gp;
    }
  }
  res.energy = sc.energy ? sc.energy->epsilon * static_cast<double>(res.copies) : 0.0;
  return res;
}

}  // namespace

ReplicationResult run_replication(const Scenario& sc, const PiecewisePolicy& policy,
                                  std::size_t rep) {
  return replicate(sc, policy, rep, RepContext{});
}

SummaryStats simulate(const Scenario& sc, const PiecewisePolicy& policy,
                      ExecMode mode) {
  if (sc.N < 1 || sc.reps < 1) throw std::invalid_argument("simulate: N, reps >= 1");
  policy.validate();
  std::vector<ReplicationResult> results(sc.reps);
  if (mode == ExecMode::Parallel) {
#ifdef DTN_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long r = 0; r < static_cast<long long>(sc.reps); ++r)
      results[static_cast<std::size_t>(r)] =
          run_replication(sc, policy, static_cast<std::size_t>(r));
  } else {
    for (std::size_t r = 0; r < sc.reps; ++r)
      results[r] = run_replication(sc, policy, r);
  }

  SummaryStats st;
  st.reps = sc.reps;
  const std::size_t ninfo = results.front().zhat.size();
  st.zhat.assign(ninfo, 0.0);
  double dsum = 0.0, csum = 0.0, esum = 0.0;
  for (const auto& r : results) {
    if (r.success) {
      ++st.n_success;
      dsum += r.delivery_time;
    }
    csum += r.copies;
    esum += r.energy;
    st.max_copies = std::max(st.max_copies, r.copies);
    for (std::size_t i = 0; i < ninfo; ++i) st.zhat[i] += r.zhat[i];
  }
  const double n = static_cast<double>(sc.reps);
  st.p_hat = static_cast<double>(st.n_success) / n;
  st.se = std::sqrt(std::max(st.p_hat * (1.0 - st.p_hat), 0.0) / n);
  st.ci_lo = st.p_hat - 1.959963984540054 * st.se;
  st.ci_hi = st.p_hat + 1.959963984540054 * st.se;
  st.mean_delivery = st.n_success ? dsum / static_cast<double>(st.n_success) : 0.0;
  st.mean_copies = csum / n;
  st.mean_energy = esum / n;
  for (auto& z : st.zhat) z /= n;
  return st;
}

CciCurves empirical_cci(const Scenario& sc, const PiecewisePolicy& policy,
                        const std::vector<double>& grid, ExecMode mode) {
  policy.validate();
  CciCurves out;
  out.grid = grid;
  const std::size_t ninfo = (sc.coding.kind == SchemeKind::RatelessAfterTK)
                                ? sc.effective_k() - 1
                                : policy.frame_count();
  const std::size_t G = grid.size();
  // Per-replication curves are kept and reduced in replication order so the
  // result is bit-identical for any thread count.
  std::vector<std::vector<std::vector<double>>> recs(sc.reps);

#ifdef DTN_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (mode == ExecMode::Parallel)
#endif
  for (long long r = 0; r < static_cast<long long>(sc.reps); ++r) {
    std::vector<std::vector<double>> xrec(ninfo, std::vector<double>(G, 0.0));
    RepContext ctx;
    ctx.grid = &grid;
    ctx.xrec = &xrec;
    replicate(sc, policy, static_cast<std::size_t>(r), ctx);
    recs[static_cast<std::size_t>(r)] = std::move(xrec);
  }

  std::vector<std::vector<double>> sum(ninfo, std::vector<double>(G, 0.0));
  std::vector<std::vector<double>> sumsq(ninfo, std::vector<double>(G, 0.0));
  for (const auto& xrec : recs)
    for (std::size_t i = 0; i < ninfo; ++i)
      for (std::size_t g = 0; g < G; ++g) {
        sum[i][g] += xrec[i][g];
        sumsq[i][g] += xrec[i][g] * xrec[i][g];
      }

  const double n = static_cast<double>(sc.reps);
  out.xhat.assign(ninfo, std::vector<double>(G, 0.0));
  out.xhat_se.assign(ninfo, std::vector<double>(G, 0.0));
  out.zhat.assign(ninfo, std::vector<double>(G, 0.0));
  for (std::size_t i = 0; i < ninfo; ++i) {
    for (std::size_t g = 0; g < G; ++g) {
      const double m = sum[i][g] / n;
      out.xhat[i][g] = m;
      const double var = std::max(sumsq[i][g] / n - m * m, 0.0);
      out.xhat_se[i][g] = std::sqrt(var / n);
    }
    for (std::size_t g = 1; g < G; ++g)
      out.zhat[i][g] = out.zhat[i][g - 1] +
                       0.5 * (out.xhat[i][g] + out.xhat[i][g - 1]) *
                           (grid[g] - grid[g - 1]);
  }
  return out;
}

bool decode_check(const FieldMatrix& headers, std::size_t K,
                  const CodingScheme& coding) {
  switch (coding.kind) {
    case SchemeKind::None:
    case SchemeKind::FixedRedundancy: {
      std::set<std::vector<uint16_t>> distinct(headers.rows.begin(),
                                               headers.rows.end());
      return distinct.size() >= K;
    }
    default:
      return gf_rank(headers) >= K;
  }
}

}  // namespace dtn
