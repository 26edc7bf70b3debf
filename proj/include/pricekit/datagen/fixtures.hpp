#pragma once

#include "pricekit/model/instance.hpp"

#include <array>
#include <string>
#include <string_view>

namespace pricekit {

inline constexpr std::array<std::string_view, 5> kFixtureNames = {"scalar-interior", "scalar-clipped",
                                                                  "pair-substitutes", "diag-10", "pinned"};

namespace detail {

inline PricingInstance make_fixture(DenseMatrix e, Vector r, double cost_ratio, PriceConstraintSet box) {
  PricingInstance inst;
  inst.E = ElasticityMatrix::from_dense(e);
  inst.kappa_nom = cost_ratio * r;
  inst.r_nom = std::move(r);
  inst.constraints = std::move(box);
  return inst;
}

}  // namespace detail

/// Small handcrafted instances with known optima.
///   scalar-interior   E = -3, kappa/r = 0.9, box +-0.4; optimum log 1.35 inside the box
///   scalar-clipped    E = -2, kappa/r = 0.9, box +-log 1.2; optimum at the upper bound
///   pair-substitutes  E = [[-1, 0.5], [0.2, -2]], r = (1, 1), kappa = 0.9 r, box +-log 1.2
///   diag-10           ten independent products mixing interior, clipped and E_ii >= -1 cases
///   pinned            three coupled products with A = I, b = 0
inline PricingInstance fixture(std::string_view name) {
  const double limit = std::log(1.2);
  if (name == "scalar-interior") {
    return detail::make_fixture(DenseMatrix::Constant(1, 1, -3.0), Vector::Ones(1), 0.9,
                                PriceConstraintSet::box(1, 0.4));
  }
  if (name == "scalar-clipped") {
    return detail::make_fixture(DenseMatrix::Constant(1, 1, -2.0), Vector::Ones(1), 0.9,
                                PriceConstraintSet::box(1, limit));
  }
  if (name == "pair-substitutes") {
    DenseMatrix e(2, 2);
    e << -1.0, 0.5, 0.2, -2.0;
    return detail::make_fixture(e, Vector::Ones(2), 0.9, PriceConstraintSet::box(2, limit));
  }
  if (name == "diag-10") {
    Vector d(10);
    d << -3.0, -2.5, -2.0, -1.5, -1.2, -1.0, -0.8, -4.0, -1.1, -2.8;
    Vector r(10);
    r << 1.0, 2.0, 3.0, 4.0, 5.0, 1.5, 2.5, 3.5, 4.5, 1.2;
    PricingInstance inst = detail::make_fixture(d.asDiagonal().toDenseMatrix(), r, 0.9, PriceConstraintSet::box(10, limit));
    inst.kappa_nom[7] = 0.8 * r[7];  // interior optimum log(0.8 * 4/3)
    return inst;
  }
  if (name == "pinned") {
    DenseMatrix e(3, 3);
    e << -2.0, 0.3, 0.1, 0.2, -1.5, 0.4, 0.1, 0.1, -2.5;
    Vector r(3);
    r << 1.0, 2.0, 3.0;
    PricingInstance inst = detail::make_fixture(e, r, 0.9, PriceConstraintSet::box(3, limit));
    inst.constraints.add_equality_rows(linalg::identity(3), Vector::Zero(3));
    return inst;
  }
  std::string known;
  for (auto n : kFixtureNames) known += (known.empty() ? "" : ", ") + std::string(n);
  throw Error(ErrorCode::UnknownName, "unknown fixture '" + std::string(name) + "'; known fixtures: " + known);
}

}  // namespace pricekit
