#pragma once

#include "pricekit/model/profit.hpp"

#include <chrono>

namespace pricekit {

/// Optimal log-price change of one product with self-elasticity e and cost ratio kappa / r on
/// [lo, hi]. For e < -1 this is the stationary point log((kappa/r) e/(e+1)) clipped to the box; for
/// -1 <= e <= 0 the profit is increasing and the answer is hi. A positive e makes the profit
/// quasiconvex, so the better endpoint wins.
inline double diagonal_optimum(double e, double r, double kappa, double lo, double hi) {
  if (e < -1.0) return std::clamp(std::log((kappa / r) * (e / (e + 1.0))), lo, hi);
  if (e <= 0.0) return hi;
  auto f = [&](double p) { return r * std::exp((1.0 + e) * p) - kappa * std::exp(e * p); };
  return f(lo) > f(hi) ? lo : hi;
}

inline SolveResult solve_diagonal_analytic(const PricingInstance& inst) {
  const auto t0 = std::chrono::steady_clock::now();
  require(inst.E.is_diagonal(), ErrorCode::PreconditionViolated, "the analytic solver needs a diagonal elasticity matrix");
  require(inst.constraints.A.rows() == 0 && inst.constraints.F.rows() == 0 && !inst.policy,
          ErrorCode::PreconditionViolated, "the analytic solver accepts box constraints only");
  const Index n = inst.n();
  const Vector e = inst.E.diagonal_entries();
  SolveResult res;
  res.method = "analytic";
  res.pi_star.resize(n);
  for (Index i = 0; i < n; ++i) {
    res.pi_star[i] = diagonal_optimum(e[i], inst.r_nom[i], inst.kappa_nom[i], inst.constraints.pi_min()[i],
                                      inst.constraints.pi_max()[i]);
  }
  res.delta_star = demand_change(inst.E, res.pi_star);
  res.profit_trajectory = {profit(inst, res.pi_star)};
  res.iterations = 1;
  res.status = SolveStatus::Converged;
  res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace pricekit
