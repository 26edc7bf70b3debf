#pragma once

#include "pricekit/methods/outer_loop.hpp"

namespace pricekit {

namespace methods {

/// Constraint set of the projected-gradient variable: pi without a policy, theta with one.
struct PgdSpace {
  subsolvers::LinearConstraints constraints;
  bool pure_box = false;
  Vector lower;
  Vector upper;
  std::optional<SparseMatrix> C;

  Vector prices(const Vector& x) const { return C ? Vector(*C * x) : x; }
};

inline PgdSpace pgd_space(const PricingInstance& inst) {
  PgdSpace sp;
  if (inst.policy) {
    sp.C = inst.policy->C;
    sp.constraints = lower_instance(inst, Lowering::Eliminated).constraints;
    return sp;
  }
  const PriceConstraintSet& pc = inst.constraints;
  sp.pure_box = pc.A.rows() == 0 && pc.F.rows() == 0;
  sp.lower = pc.pi_min();
  sp.upper = pc.pi_max();
  sp.constraints = subsolvers::to_linear_constraints(pc, inst.n());
  return sp;
}

class Projector {
 public:
  Projector(const PgdSpace& space, const subsolvers::QpOptions& opts) : space_(space), opts_(opts) {}

  Vector operator()(const Vector& point) {
    if (space_.pure_box) return point.cwiseMax(space_.lower).cwiseMin(space_.upper);
    const auto rep = subsolvers::project(point, space_.constraints, opts_, warm_ ? &*warm_ : nullptr, &ws_);
    if (rep.status == subsolvers::SubsolverStatus::Infeasible) {
      throw Error(ErrorCode::Infeasible, "projection onto an empty feasible set");
    }
    require(rep.ok(), ErrorCode::PreconditionViolated,
            std::string("projection QP failed: ") + subsolvers::to_string(rep.status));
    warm_ = subsolvers::QpWarmStart{rep.x_star, linalg::vconcat({&rep.y_eq, &rep.y_ineq})};
    return rep.x_star;
  }

 private:
  const PgdSpace& space_;
  subsolvers::QpOptions opts_;
  subsolvers::QpWorkspace ws_;
  std::optional<subsolvers::QpWarmStart> warm_;
};

}  // namespace methods

/// Projected gradient ascent on P(pi), or on P(C theta) under a policy. The first trial step is 1
/// and later ones use the Barzilai-Borwein length; every trial backtracks by 1/2 until the Armijo
/// condition P(x_t) >= P(x) + 1e-4 g^T (x_t - x) holds.
inline SolveResult solve_pgd(const PricingInstance& inst, const SolveOptions& opts = {}) {
  constexpr double kArmijo = 1e-4;
  constexpr double kBacktrack = 0.5;
  constexpr int kMaxBacktracks = 60;
  const auto t0 = std::chrono::steady_clock::now();
  opts.validate();
  SolveResult res;
  res.method = "pgd";
  const methods::PgdSpace space = methods::pgd_space(inst);
  methods::Projector proj(space, opts.qp);
  methods::Projector certificate(space, opts.qp);  // separate warm start for the unit-step test

  auto objective = [&](const Vector& x) { return profit(inst, space.prices(x)); };
  auto gradient = [&](const Vector& x) {
    const Vector g = profit_gradient(inst, space.prices(x));
    return space.C ? Vector(space.C->transpose() * g) : g;
  };
  auto finish = [&](const Vector& x) {
    res.pi_star = space.prices(x);
    res.delta_star = demand_change(inst.E, res.pi_star);
    if (space.C) res.theta_star = x;
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  };

  Vector x;
  double p = 0.0;
  try {
    const methods::FeasiblePoint start = methods::starting_point(inst, opts);
    x = space.C ? *start.theta : start.pi;
    p = objective(x);
  } catch (const Error& e) {
    res.status = e.code() == ErrorCode::Infeasible ? SolveStatus::Infeasible : SolveStatus::SubsolverFailure;
    res.message = e.what();
    res.pi_star = Vector::Zero(inst.n());
    res.delta_star = Vector::Zero(inst.n());
    return res;
  }
  res.profit_trajectory.push_back(p);
  res.status = SolveStatus::MaxIterations;
  Vector g = gradient(x);
  double step = 1.0;

  try {
    for (int k = 1; k <= opts.pgd_max_iters; ++k) {
      res.iterations = k;
      double s = step;
      Vector xt;
      double pt = -kInf;
      bool accepted = false;
      for (int bt = 0; bt < kMaxBacktracks; ++bt, s *= kBacktrack) {
        xt = proj(x + s * g);
        const Vector d = xt - x;
        if (linalg::inf_norm(d) / s <= opts.pgd_gradient_tol) {
          res.profit_trajectory.push_back(p);
          res.status = SolveStatus::Converged;
          return finish(x);
        }
        try {
          pt = objective(xt);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::ExponentOverflow) throw;
          continue;
        }
        if (pt >= p + kArmijo * g.dot(d)) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        // No ascent step along the projected arc within machine precision.
        res.profit_trajectory.push_back(p);
        res.status = SolveStatus::Converged;
        return finish(x);
      }
      const Vector gt = gradient(xt);
      const Vector sx = xt - x;
      const double curvature = -sx.dot(gt - g);
      step = curvature > 0.0 ? std::clamp(sx.squaredNorm() / curvature, 1e-10, 1e10) : std::min(2.0 * s, 1e10);
      const double previous = p;
      x = xt;
      p = pt;
      g = gt;
      res.profit_trajectory.push_back(p);
      // A short step alone is weak evidence under linear convergence; also require the
      // linearized gain of a unit projected step to be within the tolerance.
      if (methods::objective_converged(previous, p, opts.rel_tol) &&
          g.dot(certificate(x + g) - x) <= opts.rel_tol * std::max(1.0, std::abs(p))) {
        res.status = SolveStatus::Converged;
        break;
      }
    }
  } catch (const Error& e) {
    res.status = e.code() == ErrorCode::Infeasible ? SolveStatus::Infeasible : SolveStatus::SubsolverFailure;
    res.message = e.what();
  }
  return finish(x);
}

}  // namespace pricekit
