#pragma once

#include "pricekit/methods/minorizer.hpp"
#include "pricekit/methods/outer_loop.hpp"

namespace pricekit {

namespace methods {

inline MinorizerState minorizer_state(const Iterate& at, const Vector& delta_max) {
  MinorizerState st;
  st.pi_hat = at.pi;
  st.delta_hat = at.delta.cwiseMin(delta_max);
  st.delta_max = delta_max;
  st.beta = update_beta(delta_max, st.delta_hat);
  return st;
}

/// QP form of the quadratic minorizer at the state:
/// minimize sum_i v_i beta_i (delta_i - delta_hat_i)^2 + v_i delta_i - u_i (delta_i + pi_i)
/// with u = r e^{delta_hat + pi_hat}, v = kappa e^{delta_hat}.
inline subsolvers::QPProblem qmm_subproblem(const PricingInstance& inst, const Lowered& low, const MinorizerState& st) {
  const Vector u = (inst.r_nom.array() * (st.delta_hat + st.pi_hat).array().exp()).matrix();
  const Vector v = (inst.kappa_nom.array() * st.delta_hat.array().exp()).matrix();
  const Vector curv = 2.0 * (v.array() * st.beta.array()).matrix();
  subsolvers::QPProblem qp;
  const SparseMatrix td_t = low.to_delta.transpose();
  qp.P = SparseMatrix(td_t * curv.asDiagonal() * low.to_delta);
  qp.q = -(low.to_pi.transpose() * u) + td_t * (v - u - curv.cwiseProduct(st.delta_hat));
  qp.constraints = low.constraints;
  return qp;
}

/// sum_i u_i (delta_i + pi_i) - v_i (delta_i + beta_i (delta_i - delta_hat_i)^2) at pi.
inline double qmm_surrogate(const PricingInstance& inst, const MinorizerState& st, const Vector& pi) {
  const Vector d = demand_change(inst.E, pi);
  const Vector u = (inst.r_nom.array() * (st.delta_hat + st.pi_hat).array().exp()).matrix();
  const Vector v = (inst.kappa_nom.array() * st.delta_hat.array().exp()).matrix();
  const Vector s = d - st.delta_hat;
  return u.dot(d + pi) - (v.array() * (d.array() + st.beta.array() * s.array().square())).sum();
}

}  // namespace methods

inline SolveResult solve_qmm(const PricingInstance& inst, const SolveOptions& opts = {}) {
  const Vector delta_max = compute_delta_max(inst.E, inst.constraints.pi_min(), inst.constraints.pi_max());
  const methods::Lowered low = methods::lower_instance(inst, opts.lowering, delta_max);
  subsolvers::QpWorkspace ws;
  std::optional<subsolvers::QpWarmStart> warm;
  return methods::run_outer_loop(inst, opts, low, "qmm", [&](const methods::Iterate& at) {
    const MinorizerState st = methods::minorizer_state(at, delta_max);
    const subsolvers::QPProblem qp = methods::qmm_subproblem(inst, low, st);
    const subsolvers::SubsolverReport rep = subsolvers::qp_solve(qp, opts.qp, warm ? &*warm : nullptr, &ws);
    if (rep.ok()) warm = subsolvers::QpWarmStart{rep.x_star, linalg::vconcat({&rep.y_eq, &rep.y_ineq})};
    return methods::StepOutcome{rep.x_star, rep.status};
  });
}

}  // namespace pricekit
