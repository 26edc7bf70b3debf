#pragma once

#include "pricekit/model/instance.hpp"

#include <Eigen/Eigenvalues>

#include <string>

namespace pricekit {

/// A block of constraint rows together with their right-hand side.
struct RowBlock {
  SparseMatrix rows;
  Vector rhs;
};

enum class PolicyKind { Affine, ValueBased, CostBased };

/// Builds the policy matrix C from product attributes.
///
/// Affine uses the attributes as they are. ValueBased takes elementwise logs, so attributes must be
/// strictly positive. CostBased ignores `attributes` and uses the nominal markup factors
/// p_nom / c (one per product): C = [-log(markup), 1] with theta_1 fixed to 1, so that every
/// product ends up with the same markup e^{theta_2}.
inline PricingPolicy build_policy(PolicyKind kind, const DenseMatrix& attributes, const Vector& markup = Vector()) {
  PricingPolicy policy;
  switch (kind) {
    case PolicyKind::Affine: {
      require(attributes.allFinite(), ErrorCode::NonFinite, "affine policy attributes must be finite");
      policy.C = linalg::from_dense(attributes);
      policy.theta_constraints = Polyhedron::unconstrained(attributes.cols());
      break;
    }
    case PolicyKind::ValueBased: {
      for (Index i = 0; i < attributes.rows(); ++i) {
        for (Index j = 0; j < attributes.cols(); ++j) {
          if (!(attributes(i, j) > 0.0) || !std::isfinite(attributes(i, j))) {
            throw Error(ErrorCode::InvalidArgument,
                        "value-based policy needs positive attributes; a(" + std::to_string(i) + "," +
                            std::to_string(j) + ") is not",
                        i);
          }
        }
      }
      policy.C = linalg::from_dense(attributes.array().log().matrix());
      policy.theta_constraints = Polyhedron::unconstrained(attributes.cols());
      break;
    }
    case PolicyKind::CostBased: {
      const Index n = markup.size();
      require(n > 0, ErrorCode::InvalidArgument, "cost-based policy needs markup factors");
      DenseMatrix c(n, 2);
      for (Index i = 0; i < n; ++i) {
        if (!(markup[i] > 0.0) || !std::isfinite(markup[i])) {
          throw Error(ErrorCode::InvalidArgument, "markup factor " + std::to_string(i) + " must be positive", i);
        }
        c(i, 0) = -std::log(markup[i]);
        c(i, 1) = 1.0;
      }
      policy.C = linalg::from_dense(c);
      policy.theta_constraints = Polyhedron::unconstrained(2);
      SparseMatrix row(1, 2);
      row.insert(0, 0) = 1.0;
      policy.theta_constraints.add_equality_rows(row, Vector::Constant(1, 1.0));
      break;
    }
  }
  return policy;
}

/// Rows encoding E pi <= delta_max followed by -E pi <= -delta_min. Infinite bounds are dropped.
inline RowBlock demand_limits_to_rows(const ElasticityMatrix& E, const Vector& delta_min, const Vector& delta_max) {
  const Index n = E.size();
  require(delta_min.size() == n && delta_max.size() == n, ErrorCode::DimensionMismatch, "demand limit vectors");
  for (Index i = 0; i < n; ++i) {
    require(!(delta_min[i] > delta_max[i]), ErrorCode::InvalidArgument,
            "delta_min exceeds delta_max at product " + std::to_string(i), i);
  }
  std::vector<Triplet> t;
  std::vector<double> rhs;
  Index row = 0;
  const SparseMatrix& e = E.entries();
  auto emit = [&](Index i, double sign, double bound) {
    for (SparseMatrix::InnerIterator it(e, i); it; ++it) t.emplace_back(row, it.col(), sign * it.value());
    rhs.push_back(sign * bound);
    ++row;
  };
  for (Index i = 0; i < n; ++i) {
    if (std::isfinite(delta_max[i])) emit(i, 1.0, delta_max[i]);
  }
  for (Index i = 0; i < n; ++i) {
    if (std::isfinite(delta_min[i])) emit(i, -1.0, delta_min[i]);
  }
  RowBlock out;
  out.rows = SparseMatrix(row, n);
  out.rows.setFromTriplets(t.begin(), t.end());
  out.rhs = Eigen::Map<Vector>(rhs.data(), static_cast<Index>(rhs.size()));
  return out;
}

/// Converts absolute price limits into log-price-change bounds.
inline PriceConstraintSet price_limits_to_box(const Vector& p_nom, const Vector& p_min, const Vector& p_max) {
  require(p_nom.size() == p_min.size() && p_nom.size() == p_max.size(), ErrorCode::DimensionMismatch,
          "price limit vectors");
  require((p_nom.array() > 0).all() && (p_min.array() > 0).all() && (p_max.array() > 0).all(),
          ErrorCode::InvalidArgument, "prices must be positive");
  return PriceConstraintSet::box((p_min.array() / p_nom.array()).log().matrix(),
                                 (p_max.array() / p_nom.array()).log().matrix());
}

/// Equality rows pi_i = 0 for every product that keeps its nominal price.
inline RowBlock partial_pricing_rows(Index n, const std::vector<Index>& fixed_products) {
  RowBlock out;
  out.rows = SparseMatrix(static_cast<Index>(fixed_products.size()), n);
  for (std::size_t k = 0; k < fixed_products.size(); ++k) {
    require(fixed_products[k] >= 0 && fixed_products[k] < n, ErrorCode::InvalidArgument, "product index out of range");
    out.rows.insert(static_cast<Index>(k), fixed_products[k]) = 1.0;
  }
  out.rhs = Vector::Zero(static_cast<Index>(fixed_products.size()));
  return out;
}

/// Inequality row for p_i >= ratio * p_j, i.e. pi_j - pi_i <= -log(ratio) - log(p_nom_j / p_nom_i).
inline RowBlock inter_price_row(Index n, Index i, Index j, double ratio, double p_nom_i, double p_nom_j) {
  require(i >= 0 && i < n && j >= 0 && j < n && i != j, ErrorCode::InvalidArgument, "product indices");
  require(ratio > 0 && p_nom_i > 0 && p_nom_j > 0, ErrorCode::InvalidArgument, "ratio and prices must be positive");
  RowBlock out;
  out.rows = SparseMatrix(1, n);
  out.rows.insert(0, i) = -1.0;
  out.rows.insert(0, j) = 1.0;
  out.rhs = Vector::Constant(1, -std::log(ratio) - std::log(p_nom_j / p_nom_i));
  return out;
}

inline constexpr Index kDefaultDenseEigenCap = 2000;

/// True iff diag(r_nom) E is symmetric and negative definite, which is what a demand model
/// linearized from a utility function must satisfy. Dense O(n^3) check.
inline bool check_utility_form(const ElasticityMatrix& E, const Vector& r_nom, Index cap = kDefaultDenseEigenCap) {
  const Index n = E.size();
  require(r_nom.size() == n, ErrorCode::DimensionMismatch, "r_nom length");
  require((r_nom.array() > 0).all(), ErrorCode::InvalidArgument, "r_nom must be positive");
  require(n <= cap, ErrorCode::TooLarge,
          "dense eigendecomposition capped at n=" + std::to_string(cap) + ", got " + std::to_string(n));
  const DenseMatrix scaled = r_nom.asDiagonal() * DenseMatrix(E.entries());
  if ((scaled - scaled.transpose()).cwiseAbs().maxCoeff() > 1e-10) return false;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(scaled, Eigen::EigenvaluesOnly);
  return eig.info() == Eigen::Success && (eig.eigenvalues().array() < -1e-12).all();
}

}  // namespace pricekit
