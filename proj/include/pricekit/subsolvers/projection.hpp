#pragma once

#include "pricekit/model/instance.hpp"
#include "pricekit/subsolvers/admm_qp.hpp"

namespace pricekit::subsolvers {

/// Rewrites a polyhedron (box included) as linear constraints with ranged rows.
inline LinearConstraints to_linear_constraints(const Polyhedron& poly, Index dim) {
  LinearConstraints c = LinearConstraints::none(dim);
  if (poly.A.rows() > 0) c.add_equalities(poly.A, poly.b);
  if (poly.F.rows() > 0) c.add_upper(poly.F, poly.g);
  if (poly.has_box()) c.add_ranged(linalg::identity(dim), poly.lower, poly.upper);
  return c;
}

/// Euclidean projection onto {x | constraints} as a QP.
inline SubsolverReport project(const Vector& point, const LinearConstraints& cons, const QpOptions& opts = {},
                               const QpWarmStart* warm = nullptr, QpWorkspace* ws = nullptr) {
  QPProblem qp;
  qp.P = linalg::identity(point.size());
  qp.q = -point;
  qp.constraints = cons;
  return qp_solve(qp, opts, warm, ws);
}

/// argmin ||x - point||^2 over the polyhedron. A pure box is handled by clipping.
inline Vector project_polyhedron(const Vector& point, const Polyhedron& poly, const QpOptions& opts = {}) {
  if (poly.A.rows() == 0 && poly.F.rows() == 0) {
    if (!poly.has_box()) return point;
    require(poly.lower.size() == point.size(), ErrorCode::DimensionMismatch, "box and point dimensions");
    require(!((poly.lower.array() > poly.upper.array()).any()), ErrorCode::Infeasible, "empty box");
    return point.cwiseMax(poly.lower).cwiseMin(poly.upper);
  }
  const SubsolverReport rep = project(point, to_linear_constraints(poly, point.size()), opts);
  if (rep.status == SubsolverStatus::Infeasible) throw Error(ErrorCode::Infeasible, "projection onto an empty polyhedron");
  require(rep.ok(), ErrorCode::PreconditionViolated, std::string("projection QP failed: ") + to_string(rep.status));
  return rep.x_star;
}

struct InteriorPoint {
  Vector x;
  double margin = 0.0;  // smallest normalized slack over the inequality rows
  SubsolverStatus status = SubsolverStatus::Solved;
};

/// Smallest slack of the ranged rows at x, each divided by the row's Euclidean norm.
inline double normalized_margin(const LinearConstraints& c, const Vector& x) {
  if (c.F.rows() == 0) return kInf;
  const Vector fx = c.F * x;
  double margin = kInf;
  for (Index i = 0; i < fx.size(); ++i) {
    const double nrm = std::max(c.F.row(i).norm(), 1e-300);
    if (std::isfinite(c.upper[i])) margin = std::min(margin, (c.upper[i] - fx[i]) / nrm);
    if (std::isfinite(c.lower[i])) margin = std::min(margin, (fx[i] - c.lower[i]) / nrm);
  }
  return margin;
}

/// Phase-1 problem: a point satisfying the equalities with every inequality row strictly slack.
/// Solves the QP in (x, s)
///   minimize  -s + eps/2 (||x - reference||^2 + s^2)
///   subject to Aeq x = beq,  F_i x + |F_i| s <= upper_i,  F_i x - |F_i| s >= lower_i,  s <= 1,
/// which approximates the Chebyshev center closest to the reference point.
inline InteriorPoint find_interior_point(const LinearConstraints& c, const Vector& reference, const QpOptions& opts = {}) {
  const Index d = reference.size();
  InteriorPoint out;
  if (c.F.rows() == 0) {
    if (c.Aeq.rows() == 0) {
      out.x = reference;
      out.margin = kInf;
      return out;
    }
    const SubsolverReport rep = project(reference, c, opts);
    out.x = rep.x_star;
    out.margin = kInf;
    out.status = rep.status;
    return out;
  }
  constexpr double eps = 1e-3;
  std::vector<Triplet> t;
  std::vector<double> hi;
  Index row = 0;
  for (Index i = 0; i < c.F.rows(); ++i) {
    const double nrm = c.F.row(i).norm();
    if (std::isfinite(c.upper[i])) {
      for (SparseMatrix::InnerIterator it(c.F, i); it; ++it) t.emplace_back(row, it.col(), it.value());
      t.emplace_back(row, d, nrm);
      hi.push_back(c.upper[i]);
      ++row;
    }
    if (std::isfinite(c.lower[i])) {
      for (SparseMatrix::InnerIterator it(c.F, i); it; ++it) t.emplace_back(row, it.col(), -it.value());
      t.emplace_back(row, d, nrm);
      hi.push_back(-c.lower[i]);
      ++row;
    }
  }
  t.emplace_back(row, d, 1.0);
  hi.push_back(1.0);
  ++row;
  SparseMatrix rows(row, d + 1);
  rows.setFromTriplets(t.begin(), t.end());

  QPProblem qp;
  qp.P = eps * linalg::identity(d + 1);
  qp.q = Vector::Zero(d + 1);
  qp.q.head(d) = -eps * reference;
  qp.q[d] = -1.0;
  qp.constraints = LinearConstraints::none(d + 1);
  if (c.Aeq.rows() > 0) {
    SparseMatrix aeq(c.Aeq.rows(), d + 1);
    std::vector<Triplet> ta;
    linalg::append_triplets(ta, c.Aeq, 0, 0);
    aeq.setFromTriplets(ta.begin(), ta.end());
    qp.constraints.add_equalities(aeq, c.beq);
  }
  qp.constraints.add_upper(rows, Eigen::Map<const Vector>(hi.data(), row));
  const SubsolverReport rep = qp_solve(qp, opts);
  out.status = rep.status;
  if (rep.status == SubsolverStatus::Infeasible) return out;
  out.x = rep.x_star.head(d);
  out.margin = normalized_margin(c, out.x);
  const double eq_res = c.Aeq.rows() > 0 ? linalg::inf_norm(c.Aeq * out.x - c.beq) : 0.0;
  if (!(out.margin > 1e-9) || eq_res > 1e-6) out.status = SubsolverStatus::Infeasible;
  return out;
}

}  // namespace pricekit::subsolvers
