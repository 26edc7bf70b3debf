#pragma once

#include "pricekit/model/instance.hpp"

#include <string>

namespace pricekit {

/// delta = E pi.
inline Vector demand_change(const ElasticityMatrix& E, const Vector& pi) {
  require(E.size() == pi.size(), ErrorCode::DimensionMismatch,
          "elasticity matrix is " + std::to_string(E.size()) + "x" + std::to_string(E.size()) + " but pi has " +
              std::to_string(pi.size()) + " entries");
  require(all_finite(pi), ErrorCode::NonFinite, "pi has non-finite entries");
  return E.entries() * pi;
}

namespace detail {

inline void check_exponents(const Vector& delta, const Vector& pi) {
  for (Index i = 0; i < delta.size(); ++i) {
    const double worst = std::max(std::abs(delta[i] + pi[i]), std::abs(delta[i]));
    if (!(worst <= kMaxExponent)) {
      throw Error(ErrorCode::ExponentOverflow, "exponent argument at product " + std::to_string(i) + " exceeds " +
                                                   std::to_string(static_cast<int>(kMaxExponent)),
                  i);
    }
  }
}

inline void check_dimensions(const PricingInstance& inst, const Vector& pi) {
  require(pi.size() == inst.n(), ErrorCode::DimensionMismatch,
          "pi has " + std::to_string(pi.size()) + " entries, instance has " + std::to_string(inst.n()) + " products");
  require(inst.kappa_nom.size() == inst.n() && inst.E.size() == inst.n(), ErrorCode::DimensionMismatch,
          "instance data dimensions disagree");
}

}  // namespace detail

/// Per-product profit r_i e^{delta_i + pi_i} - kappa_i e^{delta_i}.
inline Vector product_profits(const PricingInstance& inst, const Vector& pi) {
  detail::check_dimensions(inst, pi);
  const Vector delta = demand_change(inst.E, pi);
  detail::check_exponents(delta, pi);
  return (inst.r_nom.array() * (delta + pi).array().exp() - inst.kappa_nom.array() * delta.array().exp()).matrix();
}

inline double profit(const PricingInstance& inst, const Vector& pi) { return product_profits(inst, pi).sum(); }

/// Gradient of the profit with respect to pi: u + E^T (u - v) with u = r e^{delta+pi}, v = kappa e^{delta}.
inline Vector profit_gradient(const PricingInstance& inst, const Vector& pi) {
  detail::check_dimensions(inst, pi);
  const Vector delta = demand_change(inst.E, pi);
  detail::check_exponents(delta, pi);
  const Vector u = (inst.r_nom.array() * (delta + pi).array().exp()).matrix();
  const Vector v = (inst.kappa_nom.array() * delta.array().exp()).matrix();
  return u + inst.E.entries().transpose() * (u - v);
}

/// Residual-based membership test for a polyhedron (box included when present).
inline bool is_feasible(const Polyhedron& c, const Vector& x, double tol) {
  require(tol >= 0.0, ErrorCode::InvalidArgument, "tolerance must be nonnegative");
  if (!all_finite(x)) return false;
  if (c.A.rows() > 0) {
    if (c.A.cols() != x.size()) return false;
    if (linalg::inf_norm(c.A * x - c.b) > tol) return false;
  }
  if (c.F.rows() > 0) {
    if (c.F.cols() != x.size()) return false;
    if (((c.F * x - c.g).array() > tol).any()) return false;
  }
  if (c.has_box()) {
    if (c.lower.size() != x.size()) return false;
    if (((c.lower - x).array() > tol).any() || ((x - c.upper).array() > tol).any()) return false;
  }
  return true;
}

/// Feasibility of a price vector for an instance, including the policy range condition when a
/// parameter vector is supplied.
inline bool is_feasible(const PricingInstance& inst, const Vector& pi, const std::optional<Vector>& theta,
                        double tol) {
  if (!is_feasible(inst.constraints, pi, tol)) return false;
  if (inst.policy && theta) {
    if (theta->size() != inst.policy->parameter_count()) return false;
    if (linalg::inf_norm(inst.policy->C * *theta - pi) > tol) return false;
    if (!is_feasible(inst.policy->theta_constraints, *theta, tol)) return false;
  }
  return true;
}

}  // namespace pricekit
