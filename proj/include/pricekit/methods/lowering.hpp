#pragma once

#include "pricekit/methods/options.hpp"
#include "pricekit/model/profit.hpp"
#include "pricekit/subsolvers/projection.hpp"

namespace pricekit::methods {

/// Subproblem variable layout. Prices, demand changes and policy parameters are linear images of
/// the subproblem variable x.
struct Lowered {
  Index dim = 0;
  bool eliminated = false;
  SparseMatrix to_pi;     // n x dim
  SparseMatrix to_delta;  // n x dim
  SparseMatrix to_theta;  // m x dim, empty without a policy
  subsolvers::LinearConstraints constraints;

  Vector pi(const Vector& x) const { return to_pi * x; }
  Vector delta(const Vector& x) const { return to_delta * x; }
  std::optional<Vector> theta(const Vector& x) const {
    if (to_theta.rows() == 0) return std::nullopt;
    return Vector(to_theta * x);
  }
};

namespace detail {

inline SparseMatrix place(const SparseMatrix& block, Index rows, Index cols, Index col0) {
  std::vector<Triplet> t;
  linalg::append_triplets(t, block, 0, col0);
  SparseMatrix out(rows, cols);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

inline SparseMatrix hcat(const std::vector<std::pair<const SparseMatrix*, double>>& blocks, Index rows) {
  std::vector<Triplet> t;
  Index col = 0;
  for (const auto& [m, scale] : blocks) {
    linalg::append_triplets(t, *m, 0, col, scale);
    col += m->cols();
  }
  SparseMatrix out(rows, col);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

inline void add_polyhedron(subsolvers::LinearConstraints& c, const Polyhedron& poly, const SparseMatrix& map) {
  if (poly.A.rows() > 0) c.add_equalities(SparseMatrix(poly.A * map), poly.b);
  if (poly.F.rows() > 0) c.add_upper(SparseMatrix(poly.F * map), poly.g);
  if (!poly.has_box()) return;
  // Degenerate box rows become equalities so the remaining inequalities keep an interior.
  std::vector<Index> fixed, ranged;
  for (Index i = 0; i < poly.lower.size(); ++i) (poly.lower[i] == poly.upper[i] ? fixed : ranged).push_back(i);
  if (fixed.empty()) {
    c.add_ranged(map, poly.lower, poly.upper);
    return;
  }
  auto select = [&](const std::vector<Index>& idx) {
    std::vector<Triplet> t;
    for (std::size_t k = 0; k < idx.size(); ++k) t.emplace_back(static_cast<Index>(k), idx[k], 1.0);
    SparseMatrix sel(static_cast<Index>(idx.size()), poly.lower.size());
    sel.setFromTriplets(t.begin(), t.end());
    return sel;
  };
  const SparseMatrix sf = select(fixed);
  const SparseMatrix sr = select(ranged);
  c.add_equalities(SparseMatrix(sf * map), sf * poly.lower);
  if (!ranged.empty()) c.add_ranged(SparseMatrix(sr * map), sr * poly.lower, sr * poly.upper);
}

}  // namespace detail

inline bool use_elimination(const PricingInstance& inst, Lowering mode) {
  if (!inst.policy) return false;
  if (mode == Lowering::Eliminated) return true;
  if (mode == Lowering::Full) return false;
  return 2 * inst.policy->parameter_count() < inst.n();
}

/// Lowers the price constraints (and the policy, when present) onto the subproblem variable.
/// With delta_max, the rows delta <= delta_max are added as explicit inequalities.
inline Lowered lower_instance(const PricingInstance& inst, Lowering mode,
                              const std::optional<Vector>& delta_max = std::nullopt) {
  const Index n = inst.n();
  const SparseMatrix& e = inst.E.entries();
  const SparseMatrix eye = linalg::identity(n);
  Lowered low;
  if (use_elimination(inst, mode)) {
    const PricingPolicy& pol = *inst.policy;
    const Index m = pol.parameter_count();
    low.dim = m;
    low.eliminated = true;
    low.to_pi = pol.C;
    low.to_delta = SparseMatrix(e * pol.C);
    low.to_theta = linalg::identity(m);
    low.constraints = subsolvers::LinearConstraints::none(m);
    detail::add_polyhedron(low.constraints, inst.constraints, low.to_pi);
    detail::add_polyhedron(low.constraints, pol.theta_constraints, low.to_theta);
  } else {
    const Index m = inst.policy ? inst.policy->parameter_count() : 0;
    const Index d = 2 * n + m;
    low.dim = d;
    low.to_pi = detail::place(eye, n, d, 0);
    low.to_delta = detail::place(eye, n, d, n);
    low.constraints = subsolvers::LinearConstraints::none(d);
    // delta - E pi = 0
    low.constraints.add_equalities(detail::place(detail::hcat({{&e, -1.0}, {&eye, 1.0}}, n), n, d, 0),
                                   Vector::Zero(n));
    if (inst.policy) {
      const PricingPolicy& pol = *inst.policy;
      low.to_theta = detail::place(linalg::identity(m), m, d, 2 * n);
      const SparseMatrix zero_delta(n, n);
      // pi - C theta = 0
      low.constraints.add_equalities(detail::hcat({{&eye, 1.0}, {&zero_delta, 0.0}, {&pol.C, -1.0}}, n),
                                     Vector::Zero(n));
      detail::add_polyhedron(low.constraints, pol.theta_constraints, low.to_theta);
    }
    detail::add_polyhedron(low.constraints, inst.constraints, low.to_pi);
  }
  if (delta_max) low.constraints.add_upper(low.to_delta, *delta_max);
  return low;
}

/// Subproblem variable for a (pi, theta) pair.
inline Vector lift(const Lowered& low, const Vector& pi, const ElasticityMatrix& E, const std::optional<Vector>& theta) {
  if (low.eliminated) return *theta;
  const Index n = pi.size();
  Vector x = Vector::Zero(low.dim);
  x.head(n) = pi;
  x.segment(n, n) = E.entries() * pi;
  if (theta) x.tail(theta->size()) = *theta;
  return x;
}

/// Nearest feasible (pi, theta) to a price vector, measured in pi. Without a policy this is the
/// Euclidean projection onto the price constraints.
struct FeasiblePoint {
  Vector pi;
  std::optional<Vector> theta;
};

inline FeasiblePoint nearest_feasible(const PricingInstance& inst, const Vector& pi,
                                      const subsolvers::QpOptions& opts = {}) {
  require(pi.size() == inst.n(), ErrorCode::DimensionMismatch, "initial price vector length");
  FeasiblePoint out;
  if (!inst.policy) {
    out.pi = is_feasible(inst.constraints, pi, 0.0) ? pi : subsolvers::project_polyhedron(pi, inst.constraints, opts);
    return out;
  }
  const PricingPolicy& pol = *inst.policy;
  subsolvers::QPProblem qp;
  qp.P = SparseMatrix(pol.C.transpose() * pol.C);
  qp.q = -(pol.C.transpose() * pi);
  qp.constraints = subsolvers::LinearConstraints::none(pol.parameter_count());
  detail::add_polyhedron(qp.constraints, inst.constraints, pol.C);
  detail::add_polyhedron(qp.constraints, pol.theta_constraints, linalg::identity(pol.parameter_count()));
  const auto rep = subsolvers::qp_solve(qp, opts);
  if (rep.status == subsolvers::SubsolverStatus::Infeasible) {
    throw Error(ErrorCode::Infeasible, "no parameter vector satisfies the policy and price constraints");
  }
  require(rep.ok(), ErrorCode::PreconditionViolated,
          std::string("policy projection failed: ") + subsolvers::to_string(rep.status));
  out.theta = rep.x_star;
  out.pi = pol.C * rep.x_star;
  return out;
}

/// Starting point of an outer loop: the requested initialization, made feasible.
inline FeasiblePoint starting_point(const PricingInstance& inst, const SolveOptions& opts) {
  const Vector pi0 = opts.pi_init ? *opts.pi_init : Vector::Zero(inst.n());
  if (inst.policy && opts.theta_init) {
    const Vector pi = inst.policy->C * *opts.theta_init;
    if (is_feasible(inst, pi, opts.theta_init, 1e-9)) return {pi, opts.theta_init};
  }
  if (inst.policy && !opts.pi_init) {
    const Vector theta = Vector::Zero(inst.policy->parameter_count());
    if (is_feasible(inst, pi0, theta, 0.0)) return {pi0, theta};
  }
  return nearest_feasible(inst, pi0, opts.qp);
}

}  // namespace pricekit::methods
