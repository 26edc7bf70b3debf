#pragma once

// Log-barrier interior-point solver for
//
//   maximize  c^T x - sum_i w_i exp((S x)_i)
//   subject to Aeq x = beq,  lower <= F x <= upper
//
// Each centering step minimizes t f0(x) + phi(x) with damped (infeasible-start) Newton steps and
// a backtracking line search on the KKT residual; t grows geometrically until the duality-gap
// bound m / t is below the requested relative tolerance.

#include "pricekit/subsolvers/projection.hpp"

#include <cmath>

namespace pricekit::subsolvers {

/// Value, gradient and Hessian of the maximized objective c^T x - sum w exp(S x).
struct SmoothObjective {
  const SmoothProblem* problem;

  double value(const Vector& x) const {
    const Vector sx = problem->S * x;
    return problem->c.dot(x) - (problem->w.array() * sx.array().exp()).sum();
  }

  Vector gradient(const Vector& x) const {
    const Vector sx = problem->S * x;
    return problem->c - problem->S.transpose() * (problem->w.array() * sx.array().exp()).matrix();
  }

  DenseMatrix hessian(const Vector& x) const {
    const Vector sx = problem->S * x;
    const Vector wexp = (problem->w.array() * sx.array().exp()).matrix();
    const DenseMatrix s = DenseMatrix(problem->S);
    return -(s.transpose() * wexp.asDiagonal() * s);
  }
};

namespace detail {

class BarrierState {
 public:
  BarrierState(const SmoothProblem& sp)
      : sp_(sp),
        ms_(sp.S.rows()),
        mf_(sp.constraints.F.rows()),
        g_(linalg::vstack({&sp.S, &sp.constraints.F})),
        a_(sp.constraints.Aeq) {
    for (Index i = 0; i < mf_; ++i) {
      if (std::isfinite(sp.constraints.upper[i])) ++m_ineq_;
      if (std::isfinite(sp.constraints.lower[i])) ++m_ineq_;
    }
  }

  Index inequality_count() const { return m_ineq_; }
  const linalg::LinearMap& equalities() const { return a_; }

  struct Point {
    bool valid = false;
    Vector exp_terms;  // w .* exp(S x)
    Vector inv_upper;  // 1 / (upper - F x), zero where infinite
    Vector inv_lower;  // 1 / (F x - lower), zero where infinite
    double f0 = 0.0;   // -c^T x + sum w exp(S x)
  };

  Point evaluate(const Vector& x) const {
    Point p;
    const Vector gx = g_.rows() > 0 ? g_.apply(x) : Vector(Vector::Zero(0));
    const auto& c = sp_.constraints;
    if (ms_ > 0 && (gx.head(ms_).array() > kMaxExponent).any()) return p;
    p.exp_terms = (sp_.w.array() * gx.head(ms_).array().exp()).matrix();
    p.inv_upper = Vector::Zero(mf_);
    p.inv_lower = Vector::Zero(mf_);
    for (Index i = 0; i < mf_; ++i) {
      const double fx = gx[ms_ + i];
      if (std::isfinite(c.upper[i])) {
        const double slack = c.upper[i] - fx;
        if (!(slack > 0.0)) return p;
        p.inv_upper[i] = 1.0 / slack;
      }
      if (std::isfinite(c.lower[i])) {
        const double slack = fx - c.lower[i];
        if (!(slack > 0.0)) return p;
        p.inv_lower[i] = 1.0 / slack;
      }
    }
    p.f0 = -sp_.c.dot(x) + p.exp_terms.sum();
    p.valid = true;
    return p;
  }

  /// t f0 + phi, where phi is the log barrier of the inequality rows.
  double value(const Point& p, double t) const {
    double phi = 0.0;
    for (Index i = 0; i < mf_; ++i) {
      if (p.inv_upper[i] > 0.0) phi += std::log(p.inv_upper[i]);
      if (p.inv_lower[i] > 0.0) phi += std::log(p.inv_lower[i]);
    }
    return t * p.f0 + phi;
  }

  /// Gradient of t f0 + phi.
  Vector gradient(const Point& p, double t) const {
    Vector weights(ms_ + mf_);
    weights.head(ms_) = t * p.exp_terms;
    weights.tail(mf_) = p.inv_upper - p.inv_lower;
    Vector grad = -t * sp_.c;
    if (g_.rows() > 0) grad += g_.apply_transpose(weights);
    return grad;
  }

  /// Gradient of f0 alone.
  Vector objective_gradient(const Point& p) const {
    Vector grad = -sp_.c;
    if (ms_ > 0) grad += sp_.S.transpose() * p.exp_terms;
    return grad;
  }

  linalg::SymmetricMatrix hessian(const Point& p, double t) const {
    Vector weights(ms_ + mf_);
    weights.head(ms_) = t * p.exp_terms;
    weights.tail(mf_) = p.inv_upper.cwiseAbs2() + p.inv_lower.cwiseAbs2();
    if (g_.rows() > 0) return g_.gram(weights);
    linalg::SymmetricMatrix h;
    h.dense = true;
    h.full = DenseMatrix::Zero(sp_.dim(), sp_.dim());
    return h;
  }

  /// True when d is a recession direction along which f0 keeps decreasing, so no minimizer exists.
  bool is_unbounded_direction(const Vector& d, const Point& p) const {
    const double nrm = linalg::inf_norm(d);
    if (!(nrm > 0.0)) return false;
    const Vector u = d / nrm;
    constexpr double tol = 1e-10;
    if (a_.rows() > 0 && linalg::inf_norm(a_.apply(u)) > tol) return false;
    const Vector gu = g_.rows() > 0 ? g_.apply(u) : Vector(Vector::Zero(0));
    const auto& c = sp_.constraints;
    for (Index i = 0; i < ms_; ++i) {
      if (gu[i] > tol) return false;
    }
    for (Index i = 0; i < mf_; ++i) {
      if (std::isfinite(c.upper[i]) && gu[ms_ + i] > tol) return false;
      if (std::isfinite(c.lower[i]) && gu[ms_ + i] < -tol) return false;
    }
    if (sp_.c.dot(u) < -tol * (1.0 + linalg::inf_norm(sp_.c))) return false;
    return objective_gradient(p).dot(u) < -1e-14;
  }

 private:
  const SmoothProblem& sp_;
  Index ms_;
  Index mf_;
  Index m_ineq_ = 0;
  linalg::LinearMap g_;
  linalg::LinearMap a_;
};

inline bool strictly_feasible(const LinearConstraints& c, const Vector& x) {
  if (c.F.rows() == 0) return true;
  const Vector fx = c.F * x;
  for (Index i = 0; i < fx.size(); ++i) {
    if (std::isfinite(c.upper[i]) && !(fx[i] < c.upper[i])) return false;
    if (std::isfinite(c.lower[i]) && !(fx[i] > c.lower[i])) return false;
  }
  return true;
}

}  // namespace detail

inline SubsolverReport smooth_solve(const SmoothProblem& sp, const Vector& x0, const SmoothOptions& opts = {},
                                    const QpOptions& phase1 = {}) {
  const Index d = sp.dim();
  const auto& cons = sp.constraints;
  require(x0.size() == d, ErrorCode::DimensionMismatch, "x0 length");
  require(sp.S.cols() == d || sp.S.rows() == 0, ErrorCode::DimensionMismatch, "S columns");
  require(sp.w.size() == sp.S.rows(), ErrorCode::DimensionMismatch, "w length");
  require((sp.w.array() > 0.0).all(), ErrorCode::InvalidArgument, "weights must be positive");
  require(all_finite(sp.c) && all_finite(sp.S), ErrorCode::NonFinite, "smooth problem data");
  cons.validate(d);

  SubsolverReport rep;
  rep.x_star = x0;

  // Phase 1: move to a strictly feasible point when the start is not one.
  Vector x = x0;
  if (!detail::strictly_feasible(cons, x)) {
    const InteriorPoint ip = find_interior_point(cons, x0, phase1);
    if (ip.status != SubsolverStatus::Solved) {
      rep.status = SubsolverStatus::Infeasible;
      return rep;
    }
    bool found = false;
    for (double lambda : {1e-3, 1e-2, 1e-1, 0.5, 1.0}) {
      const Vector trial = x0 + lambda * (ip.x - x0);
      if (detail::strictly_feasible(cons, trial)) {
        x = trial;
        found = true;
        break;
      }
    }
    if (!found) x = ip.x;
  }

  detail::BarrierState state(sp);
  detail::BarrierState::Point pt = state.evaluate(x);
  if (!pt.valid) {
    rep.status = SubsolverStatus::NumericalError;
    return rep;
  }
  const Index k = cons.Aeq.rows();
  const Index m_ineq = state.inequality_count();
  const double scale = 1.0 + linalg::inf_norm(sp.c);
  Vector nu = Vector::Zero(k);
  double t = m_ineq > 0 ? m_ineq / (opts.initial_gap * std::max(1.0, std::abs(pt.f0))) : 1.0;
  int total = 0;
  double stationarity = kInf;

  auto residual_norm = [&](const detail::BarrierState::Point& p, const Vector& xx, const Vector& v, double tt) {
    Vector r1 = state.gradient(p, tt);
    if (k > 0) r1 += state.equalities().apply_transpose(v);
    const double n1 = r1.squaredNorm();
    const double n2 = k > 0 ? (state.equalities().apply(xx) - cons.beq).squaredNorm() : 0.0;
    return std::sqrt(n1 + n2);
  };

  rep.status = SubsolverStatus::Solved;
  while (true) {
    // Centering.
    bool centered = false;
    for (int it = 0; it < opts.max_newton_per_center && total < opts.max_newton_total; ++it, ++total) {
      const Vector grad = state.gradient(pt, t);
      const Vector rp = k > 0 ? Vector(state.equalities().apply(x) - cons.beq) : Vector(Vector::Zero(0));
      linalg::SymmetricMatrix h = state.hessian(pt, t);
      const double hscale = h.dense ? (h.full.size() > 0 ? h.full.diagonal().cwiseAbs().maxCoeff() : 1.0)
                                    : Vector(h.lower.diagonal()).cwiseAbs().maxCoeff();
      linalg::KktSolver kkt;
      if (!kkt.factorize(h, state.equalities(), Vector::Zero(k), 1e-13 * std::max(hscale, 1.0))) {
        rep.status = SubsolverStatus::NumericalError;
        break;
      }
      // Residual form: solve for the multiplier increment so that small corrections survive.
      Vector rd = grad;
      if (k > 0) rd += state.equalities().apply_transpose(nu);
      const Vector sol = kkt.solve(-rd, -rp);
      const Vector dx = sol.head(d);
      const Vector nu_new = nu + sol.tail(k);
      if (!dx.allFinite()) {
        rep.status = SubsolverStatus::NumericalError;
        break;
      }
      Vector dual_res = grad;
      if (k > 0) dual_res += state.equalities().apply_transpose(nu_new);
      stationarity = linalg::inf_norm(dual_res) / t;
      const double eq_res = linalg::inf_norm(rp);
      if (stationarity <= opts.eps * scale && eq_res <= 1e-10 * (1.0 + linalg::inf_norm(cons.beq))) {
        nu = nu_new;
        centered = true;
        break;
      }
      if (state.is_unbounded_direction(dx, pt)) {
        rep.status = SubsolverStatus::Unbounded;
        break;
      }
      const Vector dnu = nu_new - nu;
      const double r0 = residual_norm(pt, x, nu, t);
      double step = 1.0;
      detail::BarrierState::Point trial = state.evaluate(x + step * dx);
      while (!trial.valid && step > 1e-16) {
        step *= opts.backtrack;
        trial = state.evaluate(x + step * dx);
      }
      while (trial.valid && step > 1e-16 &&
             residual_norm(trial, x + step * dx, nu + step * dnu, t) > (1.0 - opts.armijo * step) * r0) {
        step *= opts.backtrack;
        trial = state.evaluate(x + step * dx);
      }
      if (!trial.valid || step <= 1e-16) {
        if (stationarity <= 1e3 * opts.eps * scale && eq_res <= 1e-8 * (1.0 + linalg::inf_norm(cons.beq))) {
          nu = nu_new;
          centered = true;
          break;
        }
        rep.status = SubsolverStatus::LineSearchFailure;
        break;
      }
      x += step * dx;
      nu += step * dnu;
      pt = trial;
    }
    if (rep.status != SubsolverStatus::Solved) break;
    if (!centered) {
      rep.status = SubsolverStatus::MaxIterations;
      break;
    }
    if (m_ineq == 0) break;
    if (m_ineq / t <= opts.gap * std::max(1.0, std::abs(pt.f0))) break;
    t *= opts.mu;
    nu *= opts.mu;
  }

  rep.x_star = x;
  rep.iterations = total;
  rep.y_eq = nu / t;
  rep.y_ineq = (pt.valid ? Vector(pt.inv_upper - pt.inv_lower) : Vector(Vector::Zero(cons.F.rows()))) / t;
  rep.gap = m_ineq > 0 ? m_ineq / t : 0.0;
  rep.stationarity = stationarity;
  rep.primal_residual = k > 0 ? linalg::inf_norm(cons.Aeq * x - cons.beq) : 0.0;
  rep.objective = pt.valid ? -pt.f0 : -kInf;
  return rep;
}

}  // namespace pricekit::subsolvers
