#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dtn/coding.hpp"
#include "dtn/config.hpp"
#include "dtn/csv.hpp"
#include "dtn/fluid.hpp"
#include "dtn/scheduling.hpp"
#include "dtn/sim.hpp"

#ifdef DTN_HAVE_OPENMP
#include <omp.h>
#endif

namespace {

constexpr const char* kVersion = "1.0.0";

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  long long seed = -1;            // override when >= 0
  long long reps = -1;            // override when > 0
  double grid_step = 0.0;         // curve step when > 0
  bool direct_delivery = false;
};

struct Context {
  dtn::Config cfg;
  CommonOpts opts;
  dtn::ArrivalSchedule arr;
  double lambda = 1.0;
  dtn::Scenario scenario;
  dtn::PiecewisePolicy policy;
  std::string policy_kind;
};

std::string fmt(double v) { return dtn::CsvWriter::cell(v); }

dtn::CodingScheme load_coding(const dtn::Config& cfg) {
  const std::string scheme = cfg.get_string("coding", "scheme", "none");
  if (scheme == "none") return dtn::CodingScheme::none();
  if (scheme == "fixed-redundancy")
    return dtn::CodingScheme::fixed_redundancy(
        static_cast<int>(cfg.get_int("coding", "H")));
  if (scheme == "rateless-after-tk")
    return dtn::CodingScheme::rateless_after_tk(
        static_cast<int>(cfg.get_int("coding", "q", 256)),
        cfg.get_double("coding", "u", 1.0));
  if (scheme == "nc-before-tk")
    return dtn::CodingScheme::nc_before_tk(
        static_cast<int>(cfg.get_int("coding", "q", 256)),
        cfg.get_double("coding", "u", 1.0));
  throw dtn::ConfigError("[coding] scheme: unknown scheme '" + scheme + "'");
}

dtn::PiecewisePolicy build_policy(const dtn::Config& cfg,
                                  const dtn::ArrivalSchedule& arr, double lambda,
                                  const dtn::CodingScheme& coding,
                                  std::string* kind_out) {
  const std::string kind = cfg.get_string("policy", "kind", "algorithm-A");
  if (kind_out) *kind_out = kind;
  if (kind == "algorithm-A") return dtn::sched::algorithm_a(arr, lambda);
  if (kind == "algorithm-B") {
    dtn::sched::ThresholdPlan plan;
    plan.s = cfg.get_doubles("policy", "thresholds");
    return dtn::sched::algorithm_b(arr, lambda, plan);
  }
  if (kind == "algorithm-C") return dtn::sched::algorithm_c(arr, lambda);
  if (kind == "threshold-family") {
    if (arr.frame_count() != 2)
      throw dtn::ConfigError("[policy] threshold-family requires K = 2");
    const double s = cfg.get_double("policy", "s");
    const double t2 = arr.times[1];
    if (s < arr.times[0] || s > t2)
      throw dtn::ConfigError("[policy] s must lie in [t_1, t_2]");
    std::vector<double> bps{0.0};
    std::vector<std::vector<double>> segs{{1.0, 0.0}};
    if (s > 0.0 && s < t2) {
      bps.push_back(s);
      segs.push_back({0.0, 0.0});
    }
    bps.push_back(t2);
    segs.push_back({0.0, 1.0});
    return dtn::PiecewisePolicy(bps, segs);
  }
  if (kind == "explicit") {
    std::vector<double> bps = cfg.get_doubles("policy", "breakpoints");
    std::vector<std::vector<double>> segs;
    for (std::size_t i = 0; i < bps.size(); ++i) {
      segs.push_back(cfg.get_doubles("policy", "seg" + std::to_string(i)));
    }
    return dtn::PiecewisePolicy(bps, segs);
  }
  if (kind == "zero") {
    return dtn::PiecewisePolicy::constant(
        std::vector<double>(arr.frame_count(), 0.0));
  }
  throw dtn::ConfigError("[policy] kind: unknown policy '" + kind + "'");
}

Context load_context(const CommonOpts& opts) {
  Context ctx{dtn::Config::parse_file(opts.config_path), opts,
              dtn::ArrivalSchedule({0.0}, 1.0)};
  const auto& cfg = ctx.cfg;
  const std::vector<double> arrivals = cfg.get_doubles("scenario", "arrivals");
  const double tau = cfg.get_double("scenario", "tau");
  ctx.arr = dtn::ArrivalSchedule(arrivals, tau);
  ctx.lambda = cfg.get_double("scenario", "lambda");
  if (ctx.lambda < 0.0) throw dtn::ConfigError("[scenario] lambda must be >= 0");

  dtn::Scenario sc;
  sc.arr = ctx.arr;
  sc.lambda = ctx.lambda;
  sc.N = static_cast<std::size_t>(cfg.get_int("scenario", "N", 100));
  sc.reps = static_cast<std::size_t>(cfg.get_int("scenario", "reps", 1000));
  sc.seed = static_cast<uint64_t>(cfg.get_int("scenario", "seed", 0));
  sc.coding = load_coding(cfg);
  if (cfg.has_section("energy")) {
    dtn::EnergyModel em;
    em.epsilon = cfg.get_double("energy", "epsilon", 1.0);
    em.x = cfg.get_double("energy", "x", 1.0);
    sc.energy = em;
  }
  if (opts.seed >= 0) sc.seed = static_cast<uint64_t>(opts.seed);
  if (opts.reps > 0) sc.reps = static_cast<std::size_t>(opts.reps);
  sc.direct_delivery = opts.direct_delivery;
  ctx.scenario = sc;
  ctx.policy = build_policy(cfg, ctx.arr, ctx.lambda, sc.coding, &ctx.policy_kind);
  return ctx;
}

void print_manifest(const Context& ctx, const std::string& subcommand) {
  std::cerr << "manifest: tool=dtn version=" << kVersion
            << " subcommand=" << subcommand << " seed=" << ctx.scenario.seed
            << " reps=" << ctx.scenario.reps << " config_hash=0x" << std::hex
            << ctx.cfg.content_hash() << std::dec;
#ifdef DTN_HAVE_OPENMP
  std::cerr << " threads=" << omp_get_max_threads();
#else
  std::cerr << " threads=1";
#endif
  std::cerr << '\n';
}

std::unique_ptr<std::ostream> open_out(const Context& ctx,
                                       std::ostream*& stream) {
  std::string path = ctx.opts.out_path;
  if (path.empty())
    path = ctx.cfg.get_string("output", "path", "");
  if (path.empty()) {
    stream = &std::cout;
    return nullptr;
  }
  auto f = std::make_unique<std::ofstream>(path, std::ios::binary);
  if (!*f) throw dtn::ConfigError("cannot open output file: " + path);
  stream = f.get();
  return f;
}

struct Row {
  std::vector<std::string> names;
  std::vector<std::string> cells;
  void add(const std::string& n, const std::string& c) {
    names.push_back(n);
    cells.push_back(c);
  }
};

Row fluid_row(const Context& ctx) {
  const std::size_t K = ctx.policy.frame_count();
  dtn::FluidTrajectory traj(ctx.policy, ctx.lambda);
  const double tau = ctx.arr.tau;
  const auto Z = traj.cci_vector(tau);
  Row r;
  r.add("k", dtn::CsvWriter::cell(K));
  r.add("lambda", fmt(ctx.lambda));
  r.add("tau", fmt(tau));
  r.add("x_tau", fmt(traj.total(tau)));
  for (std::size_t i = 0; i < K; ++i)
    r.add("z_" + std::to_string(i + 1), fmt(Z[i]));
  r.add("p_s", fmt(dtn::success_prob(Z, ctx.lambda)));
  const auto ed = dtn::expected_delivery_time(traj);
  r.add("ed_finite", ed.finite ? "1" : "0");
  r.add("ed", ed.finite ? fmt(ed.value) : "inf");
  const double eps = ctx.scenario.energy ? ctx.scenario.energy->epsilon : 1.0;
  r.add("energy", fmt(eps * (traj.total(tau) - traj.total(0.0))));
  return r;
}

Row simulate_row(const Context& ctx) {
  const auto st = dtn::simulate(ctx.scenario, ctx.policy);
  dtn::FluidTrajectory traj(ctx.policy, ctx.lambda);
  const auto Z = traj.cci_vector(ctx.arr.tau);
  double p_analytic = std::numeric_limits<double>::quiet_NaN();
  if (ctx.scenario.coding.kind == dtn::SchemeKind::None)
    p_analytic = dtn::success_prob(Z, ctx.lambda);
  else if (ctx.scenario.coding.kind == dtn::SchemeKind::FixedRedundancy)
    p_analytic = dtn::fixed_redundancy_prob(
        dtn::per_frame_delivery(Z, ctx.lambda), ctx.scenario.effective_k());
  Row r;
  r.add("n", dtn::CsvWriter::cell(ctx.scenario.N));
  r.add("reps", dtn::CsvWriter::cell(ctx.scenario.reps));
  r.add("seed", dtn::CsvWriter::cell(static_cast<unsigned long long>(ctx.scenario.seed)));
  r.add("p_hat", fmt(st.p_hat));
  r.add("se", fmt(st.se));
  r.add("ci_lo", fmt(st.ci_lo));
  r.add("ci_hi", fmt(st.ci_hi));
  r.add("n_success", dtn::CsvWriter::cell(st.n_success));
  r.add("mean_delivery", fmt(st.mean_delivery));
  r.add("mean_copies", fmt(st.mean_copies));
  r.add("mean_energy", fmt(st.mean_energy));
  r.add("max_copies", dtn::CsvWriter::cell(static_cast<std::size_t>(st.max_copies)));
  for (std::size_t i = 0; i < st.zhat.size(); ++i)
    r.add("zhat_" + std::to_string(i + 1), fmt(st.zhat[i]));
  r.add("p_analytic", fmt(p_analytic));
  return r;
}

Row optimize_row(const Context& ctx) {
  Row r;
  const std::size_t K = ctx.arr.frame_count();
  r.add("k", dtn::CsvWriter::cell(K));
  r.add("lambda", fmt(ctx.lambda));
  r.add("tau", fmt(ctx.arr.tau));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (K == 2) {
    const auto res = dtn::sched::optimal_threshold_k2(
        ctx.lambda, ctx.arr.times[1], ctx.arr.tau,
        ctx.opts.grid_step > 0.0 ? ctx.opts.grid_step : 1e-4);
    r.add("s_family", fmt(res.s_opt));
    r.add("p_family", fmt(res.p_opt));
    r.add("work_conserving", res.work_conserving ? "1" : "0");
    r.add("t_eq", fmt(res.teq));
    r.add("s_thm6_printed", fmt(res.s_thm6_printed));
    r.add("s_appendix_c", fmt(res.s_appendix_c));
  } else {
    r.add("s_family", fmt(nan));
    r.add("p_family", fmt(nan));
    r.add("work_conserving", "");
    r.add("t_eq", fmt(nan));
    r.add("s_thm6_printed", fmt(nan));
    r.add("s_appendix_c", fmt(nan));
  }
  const auto gen =
      dtn::sched::optimize_general_thresholds(ctx.arr, ctx.lambda, ctx.arr.tau);
  for (std::size_t i = 0; i < gen.plan.s.size(); ++i)
    r.add("s_plan_" + std::to_string(i + 1), fmt(gen.plan.s[i]));
  r.add("p_plan", fmt(gen.p_opt));
  r.add("p_work_conserving", fmt(gen.p_work_conserving));
  r.add("evaluations", dtn::CsvWriter::cell(static_cast<long long>(gen.evaluations)));
  return r;
}

Row bound_row(const Context& ctx) {
  Row r;
  const auto& coding = ctx.scenario.coding;
  const std::size_t K = ctx.scenario.effective_k();
  const double tau = ctx.arr.tau;
  r.add("scheme", ctx.cfg.get_string("coding", "scheme", "none"));
  r.add("k", dtn::CsvWriter::cell(K));
  r.add("q", dtn::CsvWriter::cell(coding.q));
  r.add("h", dtn::CsvWriter::cell(coding.H));
  r.add("u", fmt(coding.u));
  switch (coding.kind) {
    case dtn::SchemeKind::RatelessAfterTK: {
      dtn::FluidTrajectory traj(ctx.policy, ctx.lambda);
      const auto Z = traj.cci_vector(tau);
      if (Z.size() != K - 1)
        throw dtn::ConfigError(
            "bound: rateless-after-tk needs a policy over the K-1 information "
            "frames (use policy kind algorithm-C)");
      const double lam = dtn::coded_intensity_after_tk(
          ctx.lambda, coding.u, ctx.arr.tK(), tau, traj.total(ctx.arr.tK()));
      r.add("intensity", fmt(lam));
      r.add("bound", fmt(dtn::bound_after_tk(Z, lam, K, coding.q, ctx.lambda)));
      break;
    }
    case dtn::SchemeKind::NetworkCodingBeforeTK: {
      const double lamK =
          dtn::coded_intensity_before_tk(ctx.arr, ctx.lambda, coding.u, tau, K);
      r.add("intensity", fmt(lamK));
      r.add("bound", fmt(dtn::bound_before_tk(ctx.arr, ctx.lambda, coding.u, tau,
                                              K, coding.q)));
      break;
    }
    case dtn::SchemeKind::FixedRedundancy: {
      dtn::FluidTrajectory traj(ctx.policy, ctx.lambda);
      const auto Z = traj.cci_vector(tau);
      r.add("intensity", fmt(std::numeric_limits<double>::quiet_NaN()));
      r.add("bound",
            fmt(dtn::fixed_redundancy_prob(dtn::per_frame_delivery(Z, ctx.lambda), K)));
      break;
    }
    default: {
      dtn::FluidTrajectory traj(ctx.policy, ctx.lambda);
      const auto Z = traj.cci_vector(tau);
      r.add("intensity", fmt(std::numeric_limits<double>::quiet_NaN()));
      r.add("bound", fmt(dtn::success_prob(Z, ctx.lambda)));
      break;
    }
  }
  return r;
}

void write_single_row(const Context& ctx, const Row& row) {
  std::ostream* os = nullptr;
  auto holder = open_out(ctx, os);
  dtn::CsvWriter w(*os);
  w.header(row.names);
  w.row(row.cells);
}

int run_fluid(const CommonOpts& opts) {
  Context ctx = load_context(opts);
  print_manifest(ctx, "fluid");
  if (opts.grid_step > 0.0) {
    dtn::FluidTrajectory traj(ctx.policy, ctx.lambda);
    const std::size_t K = ctx.policy.frame_count();
    std::ostream* os = nullptr;
    auto holder = open_out(ctx, os);
    dtn::CsvWriter w(*os);
    std::vector<std::string> names{"t", "x_total"};
    for (std::size_t i = 0; i < K; ++i) names.push_back("x_" + std::to_string(i + 1));
    for (std::size_t i = 0; i < K; ++i) names.push_back("z_" + std::to_string(i + 1));
    w.header(names);
    for (double t = 0.0; t <= ctx.arr.tau + 1e-12; t += opts.grid_step) {
      std::vector<std::string> cells{fmt(t), fmt(traj.total(t))};
      for (std::size_t i = 0; i < K; ++i) cells.push_back(fmt(traj.frame(i, t)));
      const auto Z = traj.cci_vector(t);
      for (std::size_t i = 0; i < K; ++i) cells.push_back(fmt(Z[i]));
      w.row(cells);
    }
    return 0;
  }
  write_single_row(ctx, fluid_row(ctx));
  return 0;
}

int run_policy(const CommonOpts& opts) {
  Context ctx = load_context(opts);
  print_manifest(ctx, "policy");
  std::ostream* os = nullptr;
  auto holder = open_out(ctx, os);
  dtn::CsvWriter w(*os);
  const std::size_t K = ctx.policy.frame_count();
  std::vector<std::string> names{"seg_start", "seg_end"};
  for (std::size_t i = 0; i < K; ++i) names.push_back("u_" + std::to_string(i + 1));
  w.header(names);
  for (std::size_t s = 0; s < ctx.policy.segment_count(); ++s) {
    std::vector<std::string> cells{fmt(ctx.policy.breakpoints[s])};
    cells.push_back(s + 1 < ctx.policy.segment_count()
                        ? fmt(ctx.policy.breakpoints[s + 1])
                        : std::string("inf"));
    for (double u : ctx.policy.segments[s]) cells.push_back(fmt(u));
    w.row(cells);
  }
  return 0;
}

int run_optimize(const CommonOpts& opts) {
  Context ctx = load_context(opts);
  print_manifest(ctx, "optimize");
  write_single_row(ctx, optimize_row(ctx));
  return 0;
}

int run_simulate(const CommonOpts& opts) {
  Context ctx = load_context(opts);
  print_manifest(ctx, "simulate");
  write_single_row(ctx, simulate_row(ctx));
  return 0;
}

int run_bound(const CommonOpts& opts) {
  Context ctx = load_context(opts);
  print_manifest(ctx, "bound");
  write_single_row(ctx, bound_row(ctx));
  return 0;
}

int run_sweep(const CommonOpts& opts) {
  Context base = load_context(opts);
  print_manifest(base, "sweep");
  const std::string param = base.cfg.get_string("sweep", "parameter");
  const std::vector<double> values = base.cfg.get_doubles("sweep", "values");
  const std::string target = base.cfg.get_string("sweep", "target", "simulate");

  std::ostream* os = nullptr;
  auto holder = open_out(base, os);
  dtn::CsvWriter w(*os);
  bool wrote_header = false;

  for (double v : values) {
    Row row;
    row.add("parameter", param);
    row.add("value", fmt(v));
    try {
      Context ctx = base;  // copy, then override the swept parameter
      if (param == "lambda") {
        ctx.lambda = v;
        ctx.scenario.lambda = v;
      } else if (param == "tau") {
        ctx.arr.tau = v;
        ctx.scenario.arr.tau = v;
      } else if (param == "N" || param == "n") {
        ctx.scenario.N = static_cast<std::size_t>(v);
      } else if (param == "reps") {
        ctx.scenario.reps = static_cast<std::size_t>(v);
      } else if (param == "q") {
        ctx.scenario.coding.q = static_cast<int>(v);
      } else if (param == "u") {
        ctx.scenario.coding.u = v;
      } else if (param == "H" || param == "h") {
        ctx.scenario.coding.H = static_cast<int>(v);
      } else if (param == "seed") {
        ctx.scenario.seed = static_cast<uint64_t>(v);
      } else {
        throw dtn::ConfigError("[sweep] parameter: unsupported parameter '" +
                               param + "'");
      }
      // Policies depending on the swept scenario must be rebuilt.
      ctx.policy =
          build_policy(ctx.cfg, ctx.arr, ctx.lambda, ctx.scenario.coding, nullptr);
      Row inner;
      if (target == "fluid") inner = fluid_row(ctx);
      else if (target == "simulate") inner = simulate_row(ctx);
      else if (target == "optimize") inner = optimize_row(ctx);
      else if (target == "bound") inner = bound_row(ctx);
      else throw dtn::ConfigError("[sweep] target: unknown target '" + target + "'");
      for (std::size_t i = 0; i < inner.names.size(); ++i)
        row.add(inner.names[i], inner.cells[i]);
      row.add("status", "ok");
    } catch (const std::exception& e) {
      std::string msg = e.what();
      for (char& c : msg)
        if (c == ',' || c == '\n') c = ';';
      row.add("status", msg);
    }
    if (!wrote_header) {
      w.header(row.names);
      wrote_header = true;
    }
    w.row(row.cells);
  }
  return 0;
}

int run_reproduce(const std::string& which, const std::string& out_path,
                  double grid_step) {
  const double tau = 1.0, t2 = 0.8;
  const std::vector<double> lambdas{1.0, 3.0, 8.0, 15.0};
  const std::vector<double> paper_s{0.242, 0.242, 0.265, 0.425};
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) throw dtn::ConfigError("cannot open output file: " + out_path);
    os = &file;
  }
  dtn::CsvWriter w(*os);
  if (which == "fig1") {
    const double step = grid_step > 0.0 ? grid_step : 1e-3;
    w.header({"row_type", "lambda", "s", "p_s", "s_paper", "match_paper"});
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
      const double lam = lambdas[j];
      double best_s = 0.0, best_p = -1.0;
      for (double s = 0.0; s <= t2 + 1e-12; s += step) {
        const double p = dtn::sched::k2_success(lam, std::min(s, t2), t2, tau);
        if (p > best_p) {
          best_p = p;
          best_s = std::min(s, t2);
        }
        w.row({"curve", fmt(lam), fmt(std::min(s, t2)), fmt(p), "", ""});
      }
      const bool match = std::abs(best_s - paper_s[j]) <= 2.0 * step;
      w.row({"argmax", fmt(lam), fmt(best_s), fmt(best_p), fmt(paper_s[j]),
             match ? "match" : "deviate"});
    }
    return 0;
  }
  if (which == "fig2") {
    const double step = grid_step > 0.0 ? grid_step : 1e-3;
    w.header({"lambda", "t", "x_total"});
    for (double lam : lambdas) {
      // Best work-conserving policy: single-frame dynamics of X(t).
      dtn::ArrivalSchedule arr({0.0, t2}, tau);
      dtn::FluidTrajectory traj(dtn::sched::algorithm_a(arr, lam), lam);
      for (double t = 0.0; t <= tau + 1e-12; t += step)
        w.row({fmt(lam), fmt(t), fmt(traj.total(t))});
    }
    return 0;
  }
  throw dtn::ConfigError("reproduce: expected 'fig1' or 'fig2'");
}

}  // namespace

int main(int argc, char** argv) {
#ifdef DTN_HAVE_OPENMP
  if (const char* th = std::getenv("DTN_THREADS")) {
    const int n = std::atoi(th);
    if (n > 0) omp_set_num_threads(n);
  }
#endif

  CLI::App app{"DTN two-hop relay toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string repro_which, repro_out;

  const auto add_common = [&](CLI::App* sub, bool config_required = true) {
    auto* c = sub->add_option("--config", opts.config_path, "experiment config file");
    if (config_required) c->required();
    sub->add_option("--out", opts.out_path, "output CSV path (default: config/stdout)");
    sub->add_option("--seed", opts.seed, "override RNG seed");
    sub->add_option("--reps", opts.reps, "override replication count");
    sub->add_option("--grid-step", opts.grid_step, "grid step for curves/search");
    sub->add_flag("--enable-direct-delivery", opts.direct_delivery,
                  "enable direct source->destination contacts (deviates from "
                  "the analytic model)");
  };

  auto* fluid = app.add_subcommand("fluid", "closed-form trajectories and P_s/E[D]");
  add_common(fluid);
  auto* policy = app.add_subcommand("policy", "emit the constructed policy segments");
  add_common(policy);
  auto* optimize = app.add_subcommand("optimize", "threshold optimization");
  add_common(optimize);
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate");
  add_common(simulate);
  auto* bound = app.add_subcommand("bound", "coding success bounds");
  add_common(bound);
  auto* sweep = app.add_subcommand("sweep", "parameter sweep");
  add_common(sweep);
  auto* repro = app.add_subcommand("reproduce", "regenerate figure datasets");
  repro->add_option("which", repro_which, "fig1 or fig2")->required();
  repro->add_option("--out", repro_out, "output CSV path");
  repro->add_option("--grid-step", opts.grid_step, "curve step");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fluid->parsed()) return run_fluid(opts);
    if (policy->parsed()) return run_policy(opts);
    if (optimize->parsed()) return run_optimize(opts);
    if (simulate->parsed()) return run_simulate(opts);
    if (bound->parsed()) return run_bound(opts);
    if (sweep->parsed()) return run_sweep(opts);
    if (repro->parsed()) return run_reproduce(repro_which, repro_out, opts.grid_step);
  } catch (const dtn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
