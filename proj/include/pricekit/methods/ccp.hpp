#pragma once

#include "pricekit/methods/outer_loop.hpp"
#include "pricekit/subsolvers/barrier.hpp"

namespace pricekit {

namespace methods {

/// Smooth subproblem with the revenue terms linearized at pi_hat:
/// maximize sum_i u_i (delta_i + pi_i) - kappa_i e^{delta_i},  u = r e^{delta_hat + pi_hat}.
inline subsolvers::SmoothProblem ccp_subproblem(const PricingInstance& inst, const Lowered& low, const Iterate& at) {
  const Vector u = (inst.r_nom.array() * (at.delta + at.pi).array().exp()).matrix();
  subsolvers::SmoothProblem sp;
  sp.c = low.to_pi.transpose() * u + low.to_delta.transpose() * u;
  sp.w = inst.kappa_nom;
  sp.S = low.to_delta;
  sp.constraints = low.constraints;
  return sp;
}

/// Value of the linearized objective at pi, linearized at pi_hat.
inline double ccp_surrogate(const PricingInstance& inst, const Vector& pi_hat, const Vector& pi) {
  const Vector dh = demand_change(inst.E, pi_hat);
  const Vector d = demand_change(inst.E, pi);
  const Vector u = (inst.r_nom.array() * (dh + pi_hat).array().exp()).matrix();
  return u.dot(d + pi) - (inst.kappa_nom.array() * d.array().exp()).sum();
}

}  // namespace methods

inline SolveResult solve_ccp(const PricingInstance& inst, const SolveOptions& opts = {}) {
  const methods::Lowered low = methods::lower_instance(inst, opts.lowering);
  return methods::run_outer_loop(inst, opts, low, "ccp", [&](const methods::Iterate& at) {
    const subsolvers::SmoothProblem sp = methods::ccp_subproblem(inst, low, at);
    const subsolvers::SubsolverReport rep = subsolvers::smooth_solve(sp, at.x, opts.smooth, opts.qp);
    return methods::StepOutcome{rep.x_star, rep.status};
  });
}

}  // namespace pricekit
