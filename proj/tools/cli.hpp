#pragma once

#include "pricekit/datagen/fixtures.hpp"
#include "pricekit/harness.hpp"
#include "pricekit/io/serialize.hpp"
#include "pricekit/model/validate.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace pricekit::cli {

/// Process exit codes. They are part of the command-line contract.
enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,  // verify found a mismatch, or compare saw a spread above tolerance
  kIoError = 2,
  kMaxIterations = 3,
  kInfeasible = 4,
  kSubsolverFailure = 5,
  kUsage = 64,
};

inline int exit_code(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return kOk;
    case SolveStatus::MaxIterations: return kMaxIterations;
    case SolveStatus::Infeasible: return kInfeasible;
    case SolveStatus::SubsolverFailure: return kSubsolverFailure;
  }
  return kSubsolverFailure;
}

/// Unreadable or malformed input files count as I/O failures; everything the caller could fix
/// by changing arguments is a usage error.
inline int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::Io:
    case ErrorCode::Parse: return kIoError;
    case ErrorCode::Infeasible: return kInfeasible;
    default: return kUsage;
  }
}

inline std::string significant(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

/// Loads an instance and rejects it unless validation is clean.
inline PricingInstance load_valid_instance(const std::string& path) {
  PricingInstance inst = io::load_instance(path);
  const ValidationReport rep = validate_instance(inst);
  if (!rep.ok()) {
    std::string what = "instance '" + path + "' is invalid:";
    bool empty_set = false;
    for (const auto& f : rep.findings) {
      what += " " + f.message + ";";
      empty_set = empty_set || f.message == "infeasible polyhedron";
    }
    // An empty feasible set is a property of the instance, reported like an infeasible solve.
    throw Error(empty_set ? ErrorCode::Infeasible : ErrorCode::PreconditionViolated, what);
  }
  return inst;
}

/// Starting point file: either {"pi": [...], "theta": [...]} or a result document.
inline methods::FeasiblePoint load_start(const std::string& path, const PricingInstance& inst) {
  const io::Json j = io::parse_json(io::read_file(path), path);
  if (!j.is_object()) throw Error(ErrorCode::Parse, path + ": start document must be an object");
  const char* pi_key = j.contains("pi") ? "pi" : "pi_star";
  const char* theta_key = j.contains("pi") ? "theta" : "theta_star";
  methods::FeasiblePoint start;
  start.pi = io::detail::vector_from_json(io::detail::field(j, pi_key, path), path + "." + pi_key);
  if (start.pi.size() != inst.n()) throw Error(ErrorCode::Parse, path + ": start has the wrong length");
  if (j.contains(theta_key)) start.theta = io::detail::vector_from_json(j[theta_key], path + "." + theta_key);
  return start;
}

struct VerifyReport {
  bool dimensions_ok = false;
  bool feasible = false;
  bool profit_ok = false;
  bool delta_ok = false;
  double profit = 0.0;
  double recorded_profit = 0.0;

  bool ok() const { return dimensions_ok && feasible && profit_ok && delta_ok; }
};

/// Re-evaluates a result document against its instance: feasibility at `tol`, and the recorded
/// profit and demand changes against values recomputed from pi_star.
inline VerifyReport verify_result(const PricingInstance& inst, const SolveResult& r, double tol) {
  VerifyReport rep;
  rep.recorded_profit = r.final_profit();
  rep.dimensions_ok = r.pi_star.size() == inst.n() && r.delta_star.size() == inst.n();
  if (!rep.dimensions_ok) return rep;
  rep.feasible = is_feasible(inst, r.pi_star, r.theta_star, tol);
  try {
    rep.profit = profit(inst, r.pi_star);
  } catch (const Error&) {
    return rep;
  }
  rep.profit_ok = std::abs(rep.profit - rep.recorded_profit) <= 1e-9 * std::max(1.0, std::abs(rep.profit));
  const Vector delta = demand_change(inst.E, r.pi_star);
  rep.delta_ok = linalg::inf_norm(delta - r.delta_star) <= 1e-9 * std::max(1.0, linalg::inf_norm(delta));
  return rep;
}

inline void print_verify(const VerifyReport& v, std::ostream& out) {
  out << "verify: " << (v.ok() ? "ok" : "FAILED") << " (feasible " << (v.feasible ? "yes" : "no") << ", profit "
      << significant(v.profit, 10) << " recorded " << significant(v.recorded_profit, 10) << ", demand changes "
      << (v.delta_ok ? "match" : "differ") << ")\n";
}

inline std::string default_csv_path(const std::string& out_path) {
  std::filesystem::path p(out_path);
  p.replace_extension(".csv");
  return p.string();
}

struct GenerateArgs {
  Index n = 20;
  Index m = 4;
  Index block_size = 10;
  std::uint64_t seed = 0;
  std::string fixture;
  std::string out;
};

inline int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  PricingInstance inst;
  if (!a.fixture.empty()) {
    inst = fixture(a.fixture);
  } else {
    GenConfig cfg;
    cfg.n = a.n;
    cfg.m = a.m;
    cfg.block_size = a.block_size;
    cfg.seed = a.seed;
    inst = generate_instance(cfg);
  }
  io::save_instance(a.out, inst);
  out << "wrote " << a.out << " (n = " << inst.n() << ")\n";
  return kOk;
}

struct SolveArgs {
  std::string instance;
  std::string method = "qmm";
  double tol = 1e-3;
  std::optional<int> max_iters;
  std::string init;
  std::string out;
  std::string csv;
  bool verify = false;
};

inline int cmd_solve(const SolveArgs& a, std::ostream& out) {
  const PricingInstance inst = load_valid_instance(a.instance);
  SolveResult res;
  if (a.method == "analytic") {
    res = solve_diagonal_analytic(inst);
  } else {
    SolveOptions opts;
    opts.method = parse_method(a.method);
    opts.rel_tol = a.tol;
    if (a.max_iters) {
      opts.max_outer_iters = *a.max_iters;
      opts.pgd_max_iters = *a.max_iters;
    }
    if (!a.init.empty()) {
      const methods::FeasiblePoint start = load_start(a.init, inst);
      opts.pi_init = start.pi;
      opts.theta_init = start.theta;
    }
    res = solve(inst, opts);
  }
  io::write_file(a.out, io::dump(io::result_to_json(res)));
  const std::string csv = a.csv.empty() ? default_csv_path(a.out) : a.csv;
  io::write_file(csv, io::per_product_csv(inst, res));
  out << "status " << to_string(res.status) << "\n";
  out << "profit " << significant(res.final_profit()) << "\n";
  out << "iterations " << res.iterations << "\n";
  if (!res.message.empty()) out << "message " << res.message << "\n";
  if (a.verify) {
    // Only the written document is trusted here, not the in-memory result.
    const SolveResult back = io::result_from_json(io::parse_json(io::read_file(a.out), a.out));
    const VerifyReport v = verify_result(inst, back, 1e-6);
    print_verify(v, out);
    if (res.status == SolveStatus::Converged && !v.ok()) return kCheckFailed;
  }
  return exit_code(res.status);
}

struct VerifyArgs {
  std::string instance;
  std::string result;
  double tol = 1e-6;
};

inline int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  const PricingInstance inst = load_valid_instance(a.instance);
  const SolveResult r = io::result_from_json(io::parse_json(io::read_file(a.result), a.result));
  const VerifyReport v = verify_result(inst, r, a.tol);
  print_verify(v, out);
  return v.ok() ? kOk : kCheckFailed;
}

struct CompareArgs {
  std::string instance;
  std::string methods = "ccp,qmm,pgd";
  int trials = 20;
  std::uint64_t seed = 0;
  double tol = 1e-3;
  double rel_tol = 1e-3;
  std::string out;
};

inline int cmd_compare(const CompareArgs& a, std::ostream& out) {
  const PricingInstance inst = load_valid_instance(a.instance);
  require(a.trials >= 0, ErrorCode::InvalidArgument, "trials must be nonnegative");
  std::vector<Method> iterative;
  std::optional<SolveResult> analytic;
  std::vector<std::string> order;
  for (const std::string& name : split_list(a.methods)) {
    if (name == "analytic") {
      // The clip formula ignores the starting point, so its spread is zero by construction.
      analytic = solve_diagonal_analytic(inst);
    } else {
      iterative.push_back(parse_method(name));
    }
    order.push_back(name);
  }
  require(!order.empty(), ErrorCode::InvalidArgument, "the method list is empty");
  SolveOptions base;
  base.rel_tol = a.rel_tol;
  const std::vector<MethodComparison> cmp =
      compare_initializations(inst, iterative, a.trials, a.seed, a.tol, worker_threads(), base);

  io::Json report;
  report["version"] = io::kSchemaVersion;
  report["instance"] = a.instance;
  report["trials"] = a.trials;
  report["seed"] = a.seed;
  report["tolerance"] = a.tol;
  io::Json rows = io::Json::array();
  bool all_ok = true;
  std::size_t next = 0;
  for (const std::string& name : order) {
    io::Json row;
    row["method"] = name;
    if (name == "analytic") {
      row["zero_init_profit"] = analytic->final_profit();
      row["zero_init_status"] = to_string(analytic->status);
      row["trial_profits"] = io::Json::array();
      row["max_relative_spread"] = 0.0;
      row["within_tolerance"] = true;
    } else {
      const MethodComparison& c = cmp[next++];
      row["zero_init_profit"] = c.zero_init_profit;
      row["zero_init_status"] = to_string(c.zero_init_status);
      row["trial_profits"] = c.trial_profits;
      io::Json statuses = io::Json::array();
      for (SolveStatus s : c.trial_statuses) statuses.push_back(to_string(s));
      row["trial_statuses"] = statuses;
      row["max_relative_spread"] = c.max_relative_spread;
      row["within_tolerance"] = c.within_tolerance;
      all_ok = all_ok && c.within_tolerance;
    }
    out << name << ": profit " << significant(row["zero_init_profit"].get<double>()) << ", max relative spread "
        << significant(row["max_relative_spread"].get<double>(), 3) << (row["within_tolerance"].get<bool>() ? "" : " (exceeds tolerance)")
        << "\n";
    rows.push_back(row);
  }
  report["methods"] = rows;
  report["all_within_tolerance"] = all_ok;
  if (!a.out.empty()) {
    io::write_file(a.out, io::dump(report));
  } else {
    out << io::dump(report);
  }
  return all_ok ? kOk : kCheckFailed;
}

struct BenchmarkArgs {
  std::string sizes = "20,40,80,160,320,640,1280,2560";
  std::string methods = "ccp,qmm,pgd";
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::string out;
};

inline int cmd_benchmark(const BenchmarkArgs& a, std::ostream& out) {
  std::vector<Index> sizes;
  for (const std::string& s : split_list(a.sizes)) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == s.size() && v > 0, ErrorCode::InvalidArgument, "bad size '" + s + "'");
    sizes.push_back(static_cast<Index>(v));
  }
  require(!sizes.empty(), ErrorCode::InvalidArgument, "the size list is empty");
  std::vector<Method> methods;
  for (const std::string& name : split_list(a.methods)) methods.push_back(parse_method(name));
  require(!methods.empty(), ErrorCode::InvalidArgument, "the method list is empty");
  // Validate every size before any solve starts.
  for (Index n : sizes) {
    GenConfig cfg;
    cfg.n = n;
    cfg.m = n / 5;
    cfg.validate();
  }
  const unsigned threads = std::max(1u, std::min(a.jobs, worker_threads()));
  const std::string csv = benchmark_csv(run_benchmark(sizes, a.seed, methods, threads));
  if (a.out.empty()) {
    out << csv;
  } else {
    io::write_file(a.out, csv);
    out << "wrote " << a.out << "\n";
  }
  return kOk;
}

/// Parses `args` (without the program name) and runs one subcommand.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Log-price optimization under an elasticity demand model", "pricekit"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "Write a random or fixture instance");
  generate->add_option("--n", gen.n, "Number of products")->capture_default_str();
  generate->add_option("--m", gen.m, "Policy parameters, 0 for free prices")->capture_default_str();
  generate->add_option("--block-size", gen.block_size, "Size of the cross-elasticity blocks")->capture_default_str();
  generate->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  generate->add_option("--fixture", gen.fixture, "Write a named fixture instead of a random instance");
  generate->add_option("-o,--out", gen.out, "Instance file to write")->required();

  SolveArgs sol;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve an instance");
  solve_cmd->add_option("instance", sol.instance, "Instance file")->required();
  solve_cmd->add_option("--method", sol.method, "ccp, qmm, pgd or analytic")->capture_default_str();
  solve_cmd->add_option("--tol", sol.tol, "Relative objective tolerance")->capture_default_str();
  solve_cmd->add_option("--max-iters", sol.max_iters, "Outer iteration limit");
  solve_cmd->add_option("--init", sol.init, "Starting point file (pi/theta or a result document)");
  solve_cmd->add_option("-o,--out", sol.out, "Result document to write")->required();
  solve_cmd->add_option("--csv", sol.csv, "Per-product CSV (defaults to the result path with .csv)");
  solve_cmd->add_flag("--verify", sol.verify, "Re-check the written result document");

  VerifyArgs ver;
  CLI::App* verify = app.add_subcommand("verify", "Re-check a result document against its instance");
  verify->add_option("instance", ver.instance, "Instance file")->required();
  verify->add_option("result", ver.result, "Result document")->required();
  verify->add_option("--tol", ver.tol, "Feasibility tolerance")->capture_default_str();

  CompareArgs cmpa;
  CLI::App* compare = app.add_subcommand("compare", "Compare methods from zero and random starts");
  compare->add_option("instance", cmpa.instance, "Instance file")->required();
  compare->add_option("--methods", cmpa.methods, "Comma-separated method list")->capture_default_str();
  compare->add_option("--trials", cmpa.trials, "Random starts per method")->capture_default_str();
  compare->add_option("--seed", cmpa.seed, "Seed of the random starts")->capture_default_str();
  compare->add_option("--tol", cmpa.tol, "Allowed relative spread")->capture_default_str();
  compare->add_option("--rel-tol", cmpa.rel_tol, "Solver stopping tolerance")->capture_default_str();
  compare->add_option("-o,--out", cmpa.out, "Report file (printed when omitted)");

  BenchmarkArgs bench;
  CLI::App* benchmark = app.add_subcommand("benchmark", "Time every method over a range of sizes");
  benchmark->add_option("--sizes", bench.sizes, "Comma-separated problem sizes")->capture_default_str();
  benchmark->add_option("--methods", bench.methods, "Comma-separated method list")->capture_default_str();
  benchmark->add_option("--seed", bench.seed, "Generator seed")->capture_default_str();
  benchmark->add_option("--jobs", bench.jobs, "Concurrent solves (timings are cleanest with 1)")->capture_default_str();
  benchmark->add_option("-o,--out", bench.out, "CSV file (printed when omitted)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen, out);
    if (solve_cmd->parsed()) return cmd_solve(sol, out);
    if (verify->parsed()) return cmd_verify(ver, out);
    if (compare->parsed()) return cmd_compare(cmpa, out);
    if (benchmark->parsed()) return cmd_benchmark(bench, out);
  } catch (const Error& e) {
    err << "pricekit: " << e.what() << "\n";
    return exit_code(e);
  }
  return kUsage;
}

}  // namespace pricekit::cli
