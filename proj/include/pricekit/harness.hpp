#pragma once

#include "pricekit/datagen/generate.hpp"
#include "pricekit/methods/solve.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace pricekit {

/// Worker count: hardware concurrency, capped by PRICEKIT_THREADS when that is a positive integer.
inline unsigned worker_threads() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PRICEKIT_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

/// Runs job(i) for i in [0, count) on up to `threads` workers. Results are written by index, so
/// output order does not depend on scheduling.
template <class Job>
void parallel_for(std::size_t count, unsigned threads, Job&& job) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) job(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline Method parse_method(const std::string& name) {
  for (Method m : {Method::CCP, Method::QMM, Method::PGD}) {
    if (name == to_string(m)) return m;
  }
  throw Error(ErrorCode::UnknownName, "unknown method '" + name + "' (expected ccp, qmm or pgd)");
}

struct BenchmarkRow {
  Index n = 0;
  std::string method;
  double wall_time_s = 0.0;
  int iterations = 0;
  double profit = 0.0;
  SolveStatus status = SolveStatus::Converged;
};

/// For each size n, generates the instance with m = n/5 and the given seed and solves it with
/// every method. Rows are ordered by size, then by method.
inline std::vector<BenchmarkRow> run_benchmark(const std::vector<Index>& sizes, std::uint64_t seed,
                                               const std::vector<Method>& methods = {Method::CCP, Method::QMM,
                                                                                     Method::PGD},
                                               unsigned threads = 1, const SolveOptions& base = {}) {
  std::vector<PricingInstance> instances;
  for (Index n : sizes) {
    GenConfig cfg;
    cfg.n = n;
    cfg.m = n / 5;
    cfg.seed = seed;
    instances.push_back(generate_instance(cfg));
  }
  std::vector<BenchmarkRow> rows(sizes.size() * methods.size());
  parallel_for(rows.size(), threads, [&](std::size_t k) {
    const std::size_t s = k / methods.size();
    SolveOptions opts = base;
    opts.method = methods[k % methods.size()];
    const SolveResult r = solve(instances[s], opts);
    rows[k] = {sizes[s], to_string(opts.method), r.wall_time, r.iterations, r.final_profit(), r.status};
  });
  return rows;
}

inline std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
  std::string out = "n,method,wall_time_s,iterations,profit,status\n";
  char buf[64];
  for (const auto& r : rows) {
    out += std::to_string(r.n) + "," + r.method + ",";
    std::snprintf(buf, sizeof(buf), "%.6f", r.wall_time_s);
    out += buf;
    out += "," + std::to_string(r.iterations) + ",";
    std::snprintf(buf, sizeof(buf), "%.17g", r.profit);
    out += buf;
    out += std::string(",") + to_string(r.status) + "\n";
  }
  return out;
}

struct MethodComparison {
  std::string method;
  double zero_init_profit = 0.0;
  SolveStatus zero_init_status = SolveStatus::Converged;
  std::vector<double> trial_profits;
  std::vector<SolveStatus> trial_statuses;
  /// max_t |P_t - P_0| / |P_0| over the random starts, P_0 being the zero-initialized profit.
  double max_relative_spread = 0.0;
  bool within_tolerance = true;
};

/// Solves from the zero start and from `trials` random feasible starts (the same starts for every
/// method). Trial t draws its start from substream t of the seeded generator.
inline std::vector<MethodComparison> compare_initializations(const PricingInstance& inst,
                                                             const std::vector<Method>& methods, int trials,
                                                             std::uint64_t seed, double tolerance,
                                                             unsigned threads = 1, const SolveOptions& base = {}) {
  require(trials >= 0, ErrorCode::InvalidArgument, "trials must be nonnegative");
  std::vector<methods::FeasiblePoint> starts;
  const Xoshiro256 root(seed);
  for (int t = 0; t < trials; ++t) {
    Xoshiro256 rng = root.substream(t);
    starts.push_back(methods::random_feasible_init(inst, rng, base.qp));
  }
  const std::size_t per = static_cast<std::size_t>(trials) + 1;
  std::vector<SolveResult> results(methods.size() * per);
  parallel_for(results.size(), threads, [&](std::size_t k) {
    SolveOptions opts = base;
    opts.method = methods[k / per];
    const std::size_t t = k % per;
    if (t > 0) {
      opts.pi_init = starts[t - 1].pi;
      opts.theta_init = starts[t - 1].theta;
    }
    results[k] = solve(inst, opts);
  });
  std::vector<MethodComparison> out;
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    MethodComparison c;
    c.method = to_string(methods[mi]);
    const SolveResult& zero = results[mi * per];
    c.zero_init_profit = zero.final_profit();
    c.zero_init_status = zero.status;
    const double denom = std::max(std::abs(c.zero_init_profit), 1e-300);
    c.within_tolerance = zero.status == SolveStatus::Converged;
    for (std::size_t t = 1; t < per; ++t) {
      const SolveResult& r = results[mi * per + t];
      c.trial_profits.push_back(r.final_profit());
      c.trial_statuses.push_back(r.status);
      c.max_relative_spread = std::max(c.max_relative_spread, std::abs(r.final_profit() - c.zero_init_profit) / denom);
      if (r.status != SolveStatus::Converged) c.within_tolerance = false;
    }
    if (c.max_relative_spread > tolerance) c.within_tolerance = false;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace pricekit
