#pragma once

#include "pricekit/model/instance.hpp"
#include "pricekit/subsolvers/projection.hpp"

#include <string>
#include <vector>

namespace pricekit {

struct Finding {
  std::string message;
  std::optional<Index> index;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool ok() const { return findings.empty(); }
  void add(std::string message, std::optional<Index> index = std::nullopt) {
    findings.push_back({std::move(message), index});
  }
};

namespace detail {

inline bool polyhedron_dims_ok(const Polyhedron& p, Index dim) {
  const bool a = p.A.rows() == p.b.size() && (p.A.rows() == 0 || p.A.cols() == dim);
  const bool f = p.F.rows() == p.g.size() && (p.F.rows() == 0 || p.F.cols() == dim);
  const bool box = !p.has_box() || (p.lower.size() == dim && p.upper.size() == dim);
  return a && f && box;
}

inline void check_box(ValidationReport& rep, const Vector& lo, const Vector& hi, const std::string& what) {
  for (Index i = 0; i < lo.size(); ++i) {
    if (std::isnan(lo[i]) || std::isnan(hi[i])) {
      rep.add(what + " bound is NaN at index " + std::to_string(i), i);
    } else if (lo[i] > hi[i]) {
      rep.add("empty box at index " + std::to_string(i), i);
    }
  }
}

}  // namespace detail

/// Structural checks followed by a phase-1 feasibility QP over the prices (and the policy
/// parameters when a policy is present).
inline ValidationReport validate_instance(const PricingInstance& inst, const subsolvers::QpOptions& opts = {}) {
  ValidationReport rep;
  const Index n = inst.n();
  if (n == 0) {
    rep.add("instance has no products");
    return rep;
  }
  if (inst.kappa_nom.size() != n) rep.add("kappa_nom has " + std::to_string(inst.kappa_nom.size()) + " entries, expected " + std::to_string(n));
  if (inst.E.size() != n) rep.add("elasticity matrix is " + std::to_string(inst.E.size()) + "x" + std::to_string(inst.E.size()) + ", expected " + std::to_string(n));
  const PriceConstraintSet& pc = inst.constraints;
  if (!pc.has_box()) {
    rep.add("price constraints lack the mandatory box");
  } else if (!detail::polyhedron_dims_ok(pc, n)) {
    rep.add("price constraint dimensions disagree with n");
  }
  if (inst.policy) {
    const PricingPolicy& pol = *inst.policy;
    if (pol.C.rows() != n) rep.add("policy matrix has " + std::to_string(pol.C.rows()) + " rows, expected " + std::to_string(n));
    if (!all_finite(pol.C)) rep.add("policy matrix has non-finite entries");
    if (!detail::polyhedron_dims_ok(pol.theta_constraints, pol.parameter_count())) {
      rep.add("parameter constraint dimensions disagree with the policy");
    }
  }
  if (!rep.ok()) return rep;

  for (Index i = 0; i < n; ++i) {
    if (!(inst.r_nom[i] > 0.0) || !std::isfinite(inst.r_nom[i])) rep.add("r_nom must be positive at index " + std::to_string(i), i);
    if (!(inst.kappa_nom[i] > 0.0) || !std::isfinite(inst.kappa_nom[i])) rep.add("kappa_nom must be positive at index " + std::to_string(i), i);
  }
  if (!all_finite(pc.A) || !all_finite(pc.b) || !all_finite(pc.F) || !all_finite(pc.g)) {
    rep.add("constraint rows have non-finite entries");
  }
  detail::check_box(rep, pc.pi_min(), pc.pi_max(), "price");
  for (Index i = 0; i < n; ++i) {
    if (std::isinf(pc.pi_min()[i]) || std::isinf(pc.pi_max()[i])) rep.add("unbounded box at index " + std::to_string(i), i);
  }
  if (inst.policy && inst.policy->theta_constraints.has_box()) {
    detail::check_box(rep, inst.policy->theta_constraints.lower, inst.policy->theta_constraints.upper, "parameter");
  }
  if (!rep.ok()) return rep;

  subsolvers::LinearConstraints cons;
  Index dim = n;
  if (inst.policy) {
    const PricingPolicy& pol = *inst.policy;
    dim = pol.parameter_count();
    cons = subsolvers::to_linear_constraints(pol.theta_constraints, dim);
    if (pc.A.rows() > 0) cons.add_equalities(SparseMatrix(pc.A * pol.C), pc.b);
    if (pc.F.rows() > 0) cons.add_upper(SparseMatrix(pc.F * pol.C), pc.g);
    cons.add_ranged(pol.C, pc.pi_min(), pc.pi_max());
  } else {
    cons = subsolvers::to_linear_constraints(pc, n);
  }
  const subsolvers::SubsolverReport feas = subsolvers::project(Vector::Zero(dim), cons, opts);
  if (feas.status == subsolvers::SubsolverStatus::Infeasible) {
    rep.add("infeasible polyhedron");
  } else if (!feas.ok()) {
    rep.add(std::string("feasibility check inconclusive: ") + subsolvers::to_string(feas.status));
  }
  return rep;
}

}  // namespace pricekit
