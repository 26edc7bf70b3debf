#pragma once

#include "pricekit/core/linalg.hpp"

#include <string>
#include <vector>

namespace pricekit {

/// Square elasticity matrix E: entry (i, j) is the elasticity of demand for product i with
/// respect to the price of product j. Stored in CSR layout.
class ElasticityMatrix {
 public:
  ElasticityMatrix() = default;

  explicit ElasticityMatrix(SparseMatrix entries) : entries_(std::move(entries)) {
    require(entries_.rows() == entries_.cols(), ErrorCode::DimensionMismatch, "elasticity matrix must be square");
    require(all_finite(entries_), ErrorCode::NonFinite, "elasticity matrix has non-finite entries");
    entries_.makeCompressed();
  }

  static ElasticityMatrix from_dense(const DenseMatrix& d) { return ElasticityMatrix(linalg::from_dense(d)); }

  static ElasticityMatrix diagonal(const Vector& diag) { return ElasticityMatrix(linalg::diagonal(diag)); }

  Index size() const { return entries_.rows(); }
  const SparseMatrix& entries() const { return entries_; }
  double coeff(Index i, Index j) const { return entries_.coeff(i, j); }

  bool is_diagonal() const {
    for (Index r = 0; r < entries_.outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(entries_, r); it; ++it) {
        if (it.row() != it.col() && it.value() != 0.0) return false;
      }
    }
    return true;
  }

  Vector diagonal_entries() const { return entries_.diagonal(); }

 private:
  SparseMatrix entries_;
};

/// Polyhedron {x | A x = b, F x <= g} with an optional box lo <= x <= hi.
struct Polyhedron {
  SparseMatrix A;
  Vector b;
  SparseMatrix F;
  Vector g;
  Vector lower;  // empty when there is no box
  Vector upper;

  bool has_box() const { return lower.size() > 0; }
  Index equality_count() const { return A.rows(); }
  Index inequality_count() const { return F.rows(); }
  bool empty() const { return A.rows() == 0 && F.rows() == 0 && !has_box(); }

  static Polyhedron unconstrained(Index dim) {
    Polyhedron p;
    p.A = SparseMatrix(0, dim);
    p.b = Vector(0);
    p.F = SparseMatrix(0, dim);
    p.g = Vector(0);
    return p;
  }

  void add_equality_rows(const SparseMatrix& rows, const Vector& rhs) {
    require(rows.rows() == rhs.size(), ErrorCode::DimensionMismatch, "equality rows/rhs");
    A = linalg::vstack({&A, &rows});
    b = linalg::vconcat({&b, &rhs});
  }

  void add_inequality_rows(const SparseMatrix& rows, const Vector& rhs) {
    require(rows.rows() == rhs.size(), ErrorCode::DimensionMismatch, "inequality rows/rhs");
    F = linalg::vstack({&F, &rows});
    g = linalg::vconcat({&g, &rhs});
  }
};

/// Allowed log-price changes. The box is mandatory; equality and inequality rows are optional.
struct PriceConstraintSet : Polyhedron {
  const Vector& pi_min() const { return lower; }
  const Vector& pi_max() const { return upper; }

  /// Symmetric box |pi_i| <= limit.
  static PriceConstraintSet box(Index n, double limit) { return box(Vector::Constant(n, -limit), Vector::Constant(n, limit)); }

  static PriceConstraintSet box(Vector pi_min, Vector pi_max) {
    require(pi_min.size() == pi_max.size(), ErrorCode::DimensionMismatch, "box bounds");
    PriceConstraintSet c;
    const Index n = pi_min.size();
    c.A = SparseMatrix(0, n);
    c.b = Vector(0);
    c.F = SparseMatrix(0, n);
    c.g = Vector(0);
    c.lower = std::move(pi_min);
    c.upper = std::move(pi_max);
    return c;
  }
};

/// Pricing policy pi = C theta with theta restricted to a polyhedron.
struct PricingPolicy {
  SparseMatrix C;
  Polyhedron theta_constraints;

  Index parameter_count() const { return C.cols(); }
  Vector prices(const Vector& theta) const { return C * theta; }
};

struct PricingInstance {
  Vector r_nom;
  Vector kappa_nom;
  ElasticityMatrix E;
  PriceConstraintSet constraints;
  std::optional<PricingPolicy> policy;

  Index n() const { return r_nom.size(); }
};

enum class SolveStatus { Converged, MaxIterations, SubsolverFailure, Infeasible };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::SubsolverFailure: return "subsolver_failure";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

struct SolveResult {
  Vector pi_star;
  Vector delta_star;
  std::optional<Vector> theta_star;
  /// True profit at the starting point followed by one entry per accepted outer iteration.
  std::vector<double> profit_trajectory;
  int iterations = 0;
  SolveStatus status = SolveStatus::Converged;
  double wall_time = 0.0;
  std::string method;
  std::string message;

  double final_profit() const { return profit_trajectory.empty() ? 0.0 : profit_trajectory.back(); }
};

}  // namespace pricekit
