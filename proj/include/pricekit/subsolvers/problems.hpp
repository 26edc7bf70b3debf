#pragma once

#include "pricekit/core/linalg.hpp"

namespace pricekit::subsolvers {

/// Aeq x = beq together with ranged rows lower <= F x <= upper. Either side of a ranged row may be
/// infinite; a one-sided inequality F x <= g is written with lower = -inf.
struct LinearConstraints {
  SparseMatrix Aeq;
  Vector beq;
  SparseMatrix F;
  Vector lower;
  Vector upper;

  static LinearConstraints none(Index dim) {
    LinearConstraints c;
    c.Aeq = SparseMatrix(0, dim);
    c.beq = Vector(0);
    c.F = SparseMatrix(0, dim);
    c.lower = Vector(0);
    c.upper = Vector(0);
    return c;
  }

  Index dim() const { return std::max(Aeq.cols(), F.cols()); }

  void add_equalities(const SparseMatrix& rows, const Vector& rhs) {
    require(rows.rows() == rhs.size(), ErrorCode::DimensionMismatch, "equality rows/rhs");
    Aeq = linalg::vstack({&Aeq, &rows});
    beq = linalg::vconcat({&beq, &rhs});
  }

  void add_ranged(const SparseMatrix& rows, const Vector& lo, const Vector& hi) {
    require(rows.rows() == lo.size() && rows.rows() == hi.size(), ErrorCode::DimensionMismatch, "ranged rows");
    F = linalg::vstack({&F, &rows});
    lower = linalg::vconcat({&lower, &lo});
    upper = linalg::vconcat({&upper, &hi});
  }

  void add_upper(const SparseMatrix& rows, const Vector& hi) {
    add_ranged(rows, Vector::Constant(rows.rows(), -kInf), hi);
  }

  void validate(Index d) const {
    require(Aeq.rows() == beq.size() && (Aeq.rows() == 0 || Aeq.cols() == d), ErrorCode::DimensionMismatch,
            "equality block dimensions");
    require(F.rows() == lower.size() && F.rows() == upper.size() && (F.rows() == 0 || F.cols() == d),
            ErrorCode::DimensionMismatch, "inequality block dimensions");
    require(all_finite(beq) && all_finite(Aeq) && all_finite(F), ErrorCode::NonFinite, "constraint data");
    for (Index i = 0; i < lower.size(); ++i) {
      require(!(lower[i] > upper[i]), ErrorCode::Infeasible, "row " + std::to_string(i) + " has lower > upper", i);
    }
  }
};

/// minimize 1/2 x^T P x + q^T x subject to the linear constraints.
struct QPProblem {
  SparseMatrix P;
  Vector q;
  LinearConstraints constraints;

  Index dim() const { return q.size(); }
};

/// maximize c^T x - sum_i w_i exp((S x)_i) subject to the linear constraints.
struct SmoothProblem {
  Vector c;
  Vector w;
  SparseMatrix S;
  LinearConstraints constraints;

  Index dim() const { return c.size(); }
};

enum class SubsolverStatus { Solved, Infeasible, Unbounded, LineSearchFailure, MaxIterations, NumericalError };

inline const char* to_string(SubsolverStatus s) {
  switch (s) {
    case SubsolverStatus::Solved: return "solved";
    case SubsolverStatus::Infeasible: return "infeasible";
    case SubsolverStatus::Unbounded: return "unbounded";
    case SubsolverStatus::LineSearchFailure: return "line_search_failure";
    case SubsolverStatus::MaxIterations: return "max_iterations";
    case SubsolverStatus::NumericalError: return "numerical_error";
  }
  return "unknown";
}

struct SubsolverReport {
  Vector x_star;
  Vector y_eq;    // multipliers of Aeq x = beq
  Vector y_ineq;  // multipliers of the ranged rows (positive: upper side active)
  double stationarity = 0.0;
  double primal_residual = 0.0;
  double complementarity = 0.0;
  double gap = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool polished = false;
  SubsolverStatus status = SubsolverStatus::Solved;

  bool ok() const { return status == SubsolverStatus::Solved; }
};

struct QpOptions {
  double eps = 1e-6;          // absolute KKT tolerance
  double eps_rel = 1e-6;      // relative tolerance used by the ADMM stopping test
  double eps_infeasible = 1e-8;
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;
  int max_iterations = 20000;
  int adaptive_rho_interval = 25;
  int check_interval = 5;
  int scaling_iterations = 10;
  bool polish = true;
};

struct SmoothOptions {
  double eps = 1e-8;       // stationarity of the centering problems
  double gap = 1e-6;       // relative duality-gap target
  double mu = 10.0;        // barrier parameter growth per outer step
  double initial_gap = 1e-1;
  double armijo = 0.01;
  double backtrack = 0.5;
  int max_newton_per_center = 100;
  int max_newton_total = 2000;
};

}  // namespace pricekit::subsolvers
