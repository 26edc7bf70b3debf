#pragma once

#include "pricekit/methods/lowering.hpp"

#include <chrono>
#include <functional>

namespace pricekit::methods {

/// Iterate of an outer loop, kept both as prices and as subproblem variable.
struct Iterate {
  Vector x;
  Vector pi;
  Vector delta;
  std::optional<Vector> theta;
  double profit = 0.0;
};

struct StepOutcome {
  Vector x;
  subsolvers::SubsolverStatus status = subsolvers::SubsolverStatus::Solved;
};

inline bool objective_converged(double previous, double current, double rel_tol) {
  return std::abs(current - previous) <= rel_tol * std::max(1.0, std::abs(current));
}

namespace detail {

/// Prices read off a subproblem solution: pi = C theta under a policy, otherwise the pi block
/// clipped into the box.
inline Iterate read_iterate(const PricingInstance& inst, const Lowered& low, Vector x) {
  Iterate it;
  it.theta = low.theta(x);
  if (inst.policy) {
    it.pi = inst.policy->C * *it.theta;
  } else {
    it.pi = low.pi(x).cwiseMax(inst.constraints.pi_min()).cwiseMin(inst.constraints.pi_max());
  }
  it.delta = demand_change(inst.E, it.pi);
  it.x = std::move(x);
  return it;
}

inline SolveStatus status_of(subsolvers::SubsolverStatus s) {
  return s == subsolvers::SubsolverStatus::Infeasible ? SolveStatus::Infeasible : SolveStatus::SubsolverFailure;
}

}  // namespace detail

/// Shared minorize-maximize driver. `step` solves one surrogate problem at the current iterate.
/// A step that lowers the true profit is rejected: within the stopping tolerance the loop ends as
/// converged at the previous iterate, beyond it the subsolver is reported as failed.
inline SolveResult run_outer_loop(const PricingInstance& inst, const SolveOptions& opts, const Lowered& low,
                                  const char* name, const std::function<StepOutcome(const Iterate&)>& step) {
  const auto t0 = std::chrono::steady_clock::now();
  opts.validate();
  SolveResult res;
  res.method = name;

  Iterate cur;
  try {
    const FeasiblePoint start = starting_point(inst, opts);
    cur.pi = start.pi;
    cur.theta = start.theta;
    cur.delta = demand_change(inst.E, cur.pi);
    cur.x = lift(low, cur.pi, inst.E, cur.theta);
    cur.profit = profit(inst, cur.pi);
  } catch (const Error& e) {
    res.status = e.code() == ErrorCode::Infeasible ? SolveStatus::Infeasible : SolveStatus::SubsolverFailure;
    res.message = e.what();
    res.pi_star = Vector::Zero(inst.n());
    res.delta_star = Vector::Zero(inst.n());
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  }
  res.profit_trajectory.push_back(cur.profit);
  res.status = SolveStatus::MaxIterations;

  for (int k = 1; k <= opts.max_outer_iters; ++k) {
    res.iterations = k;
    StepOutcome out;
    try {
      out = step(cur);
    } catch (const Error& e) {
      res.status = SolveStatus::SubsolverFailure;
      res.message = e.what();
      break;
    }
    if (out.status != subsolvers::SubsolverStatus::Solved) {
      res.status = detail::status_of(out.status);
      res.message = std::string("subproblem ") + std::to_string(k) + ": " + subsolvers::to_string(out.status);
      break;
    }
    Iterate next = detail::read_iterate(inst, low, std::move(out.x));
    try {
      next.profit = profit(inst, next.pi);
    } catch (const Error& e) {
      res.status = SolveStatus::SubsolverFailure;
      res.message = e.what();
      break;
    }
    if (next.profit < cur.profit) {
      if (objective_converged(cur.profit, next.profit, opts.rel_tol)) {
        res.profit_trajectory.push_back(cur.profit);
        res.status = SolveStatus::Converged;
      } else {
        res.status = SolveStatus::SubsolverFailure;
        res.message = "subproblem " + std::to_string(k) + " decreased the profit";
      }
      break;
    }
    const double previous = cur.profit;
    cur = std::move(next);
    res.profit_trajectory.push_back(cur.profit);
    if (objective_converged(previous, cur.profit, opts.rel_tol)) {
      res.status = SolveStatus::Converged;
      break;
    }
  }
  res.pi_star = cur.pi;
  res.delta_star = cur.delta;
  res.theta_star = cur.theta;
  res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace pricekit::methods
