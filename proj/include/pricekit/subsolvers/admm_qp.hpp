#pragma once

// Operator-splitting QP solver.
//
//   minimize 1/2 x^T P x + q^T x   subject to  l <= K x <= u,   K = [Aeq; F]
//
// ADMM on the splitting z = K x with over-relaxation, Ruiz equilibration of the data,
// residual-balancing updates of the penalty, infeasibility certificates, and a final
// active-set polishing step that solves the reduced KKT system with iterative refinement.

#include "pricekit/subsolvers/problems.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace pricekit::subsolvers {

struct QpWarmStart {
  Vector x;
  Vector y;  // stacked over [Aeq; F]
};

/// Factorization state that survives across calls so the symbolic analysis of the reduced
/// system can be reused while the sparsity pattern stays the same.
struct QpWorkspace {
  linalg::SymmetricSolver solver;
};

namespace detail {

inline Vector col_inf_norms(const SparseMatrix& m) {
  Vector out = Vector::Zero(m.cols());
  for (Index r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) out[it.col()] = std::max(out[it.col()], std::abs(it.value()));
  }
  return out;
}

inline Vector row_inf_norms(const SparseMatrix& m) {
  Vector out = Vector::Zero(m.rows());
  for (Index r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) out[r] = std::max(out[r], std::abs(it.value()));
  }
  return out;
}

inline double limit_scale(double norm) {
  if (norm < 1e-4) return 1.0;
  return 1.0 / std::sqrt(std::clamp(norm, 1e-4, 1e4));
}

struct ScaledQp {
  SparseMatrix P;
  Vector q;
  SparseMatrix K;
  Vector l;
  Vector u;
  Vector D;  // x = D .* x_scaled
  Vector E;  // Kx scaled = E .* (K x)
  double c = 1.0;
};

inline ScaledQp equilibrate(const SparseMatrix& P, const Vector& q, const SparseMatrix& K, const Vector& l,
                            const Vector& u, int iterations) {
  ScaledQp s;
  const Index d = q.size();
  const Index m = K.rows();
  s.P = P;
  s.q = q;
  s.K = K;
  s.D = Vector::Ones(d);
  s.E = Vector::Ones(m);
  for (int it = 0; it < iterations; ++it) {
    const Vector pn = col_inf_norms(s.P);
    const Vector kn = col_inf_norms(s.K);
    Vector dd(d);
    for (Index j = 0; j < d; ++j) dd[j] = limit_scale(std::max(pn[j], kn[j]));
    const Vector rn = row_inf_norms(s.K);
    Vector de(m);
    for (Index i = 0; i < m; ++i) de[i] = limit_scale(rn[i]);
    s.P = dd.asDiagonal() * s.P * dd.asDiagonal();
    s.q = dd.cwiseProduct(s.q);
    s.K = de.asDiagonal() * s.K * dd.asDiagonal();
    s.D = s.D.cwiseProduct(dd);
    s.E = s.E.cwiseProduct(de);
    const Vector pcol = col_inf_norms(s.P);
    const double mean_p = d > 0 ? pcol.mean() : 0.0;
    double gamma = std::max(mean_p, linalg::inf_norm(s.q));
    gamma = gamma < 1e-4 ? 1.0 : 1.0 / std::clamp(gamma, 1e-4, 1e4);
    s.P *= gamma;
    s.q *= gamma;
    s.c *= gamma;
  }
  s.l = s.E.cwiseProduct(l);
  s.u = s.E.cwiseProduct(u);
  for (Index i = 0; i < m; ++i) {
    if (!std::isfinite(l[i])) s.l[i] = -kInf;
    if (!std::isfinite(u[i])) s.u[i] = kInf;
  }
  s.P.makeCompressed();
  s.K.makeCompressed();
  return s;
}

inline Vector clip(const Vector& v, const Vector& lo, const Vector& hi) { return v.cwiseMax(lo).cwiseMin(hi); }

inline Vector rho_vector(const Vector& l, const Vector& u, double rho) {
  Vector r(l.size());
  for (Index i = 0; i < l.size(); ++i) {
    if (!std::isfinite(l[i]) && !std::isfinite(u[i])) {
      r[i] = 1e-6;
    } else if (l[i] == u[i]) {
      r[i] = 1e3 * rho;
    } else {
      r[i] = rho;
    }
  }
  return r;
}

inline linalg::SymmetricMatrix reduced_matrix(const SparseMatrix& P, const linalg::LinearMap& K, const Vector& rho,
                                              double sigma) {
  linalg::SymmetricMatrix m = K.gram(rho);
  if (m.dense) {
    m.full += DenseMatrix(P);
    m.full.diagonal().array() += sigma;
  } else {
    m.lower = m.lower + linalg::ColMajorSparse(P);
    m.lower.makeCompressed();
    m.add_diagonal(Vector::Constant(P.rows(), sigma));
  }
  return m;
}

struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
  double primal_scale = 0.0;
  double dual_scale = 0.0;
};

}  // namespace detail

/// Evaluates the KKT residuals of (x, y) on the original, unscaled problem.
inline void fill_kkt_residuals(const QPProblem& qp, SubsolverReport& rep) {
  const auto& c = qp.constraints;
  const Vector& x = rep.x_star;
  Vector stat = qp.P * x + qp.q;
  double primal = 0.0;
  if (c.Aeq.rows() > 0) {
    stat += c.Aeq.transpose() * rep.y_eq;
    primal = std::max(primal, linalg::inf_norm(c.Aeq * x - c.beq));
  }
  double comp = 0.0;
  if (c.F.rows() > 0) {
    stat += c.F.transpose() * rep.y_ineq;
    const Vector fx = c.F * x;
    for (Index i = 0; i < fx.size(); ++i) {
      primal = std::max({primal, fx[i] - c.upper[i], c.lower[i] - fx[i]});
      const double y = rep.y_ineq[i];
      if (y > 0) comp = std::max(comp, std::isfinite(c.upper[i]) ? std::abs(y * (c.upper[i] - fx[i])) : kInf);
      if (y < 0) comp = std::max(comp, std::isfinite(c.lower[i]) ? std::abs(y * (fx[i] - c.lower[i])) : kInf);
    }
  }
  rep.stationarity = linalg::inf_norm(stat);
  rep.primal_residual = std::max(primal, 0.0);
  rep.complementarity = comp;
  rep.objective = 0.5 * x.dot(qp.P * x) + qp.q.dot(x);
}

inline SubsolverReport qp_solve(const QPProblem& qp, const QpOptions& opts = {}, const QpWarmStart* warm = nullptr,
                                QpWorkspace* workspace = nullptr) {
  using detail::clip;
  const Index d = qp.dim();
  const auto& cons = qp.constraints;
  require(qp.P.rows() == d && qp.P.cols() == d, ErrorCode::DimensionMismatch, "P must be d x d");
  cons.validate(d);
  require(all_finite(qp.q) && all_finite(qp.P), ErrorCode::NonFinite, "QP objective data");

  const Index k_eq = cons.Aeq.rows();
  SparseMatrix k_full = linalg::vstack({&cons.Aeq, &cons.F});
  if (k_full.cols() != d) k_full = SparseMatrix(0, d);
  const Index m = k_full.rows();
  const Vector l_full = linalg::vconcat({&cons.beq, &cons.lower});
  const Vector u_full = linalg::vconcat({&cons.beq, &cons.upper});

  detail::ScaledQp s = detail::equilibrate(qp.P, qp.q, k_full, l_full, u_full, opts.scaling_iterations);
  const linalg::LinearMap kmap(s.K);

  QpWorkspace local;
  QpWorkspace& ws = workspace ? *workspace : local;

  double rho = opts.rho;
  Vector rho_vec = detail::rho_vector(s.l, s.u, rho);
  if (!ws.solver.factorize(detail::reduced_matrix(s.P, kmap, rho_vec, opts.sigma))) {
    SubsolverReport rep;
    rep.status = SubsolverStatus::NumericalError;
    rep.x_star = Vector::Zero(d);
    return rep;
  }

  Vector x = Vector::Zero(d);
  Vector y = Vector::Zero(m);
  if (warm && warm->x.size() == d) x = warm->x.cwiseQuotient(s.D);
  if (warm && warm->y.size() == m) y = (s.c * warm->y).cwiseQuotient(s.E);
  Vector z = clip(kmap.apply(x), s.l, s.u);

  SubsolverReport rep;
  rep.status = SubsolverStatus::MaxIterations;
  const double alpha = opts.alpha;
  const double sigma = opts.sigma;

  auto residuals = [&](const Vector& xs, const Vector& zs, const Vector& ys) {
    detail::Residuals r;
    const Vector kx = kmap.apply(xs);
    const Vector px = s.P * xs;
    const Vector kty = kmap.apply_transpose(ys);
    r.primal = m > 0 ? linalg::inf_norm((kx - zs).cwiseQuotient(s.E)) : 0.0;
    r.primal_scale =
        m > 0 ? std::max(linalg::inf_norm(kx.cwiseQuotient(s.E)), linalg::inf_norm(zs.cwiseQuotient(s.E))) : 0.0;
    r.dual = linalg::inf_norm((px + s.q + kty).cwiseQuotient(s.D)) / s.c;
    r.dual_scale = std::max({linalg::inf_norm(px.cwiseQuotient(s.D)), linalg::inf_norm(kty.cwiseQuotient(s.D)),
                             linalg::inf_norm(s.q.cwiseQuotient(s.D))}) /
                   s.c;
    return r;
  };

  Vector x_prev = x;
  Vector y_prev = y;
  int iter = 0;
  bool converged = false;
  for (iter = 1; iter <= opts.max_iterations; ++iter) {
    x_prev = x;
    y_prev = y;
    Vector rhs = sigma * x - s.q;
    if (m > 0) rhs += kmap.apply_transpose(rho_vec.cwiseProduct(z) - y);
    const Vector x_tilde = ws.solver.solve(rhs);
    const Vector z_tilde = kmap.apply(x_tilde);
    x = alpha * x_tilde + (1.0 - alpha) * x_prev;
    const Vector z_relaxed = alpha * z_tilde + (1.0 - alpha) * z;
    const Vector z_next = clip(z_relaxed + y.cwiseQuotient(rho_vec), s.l, s.u);
    y += rho_vec.cwiseProduct(z_relaxed - z_next);
    z = z_next;

    const bool check = iter % opts.check_interval == 0 || iter == opts.max_iterations;
    const bool adapt = opts.adaptive_rho_interval > 0 && iter % opts.adaptive_rho_interval == 0;
    if (!check && !adapt) continue;

    const detail::Residuals r = residuals(x, z, y);
    if (r.primal <= opts.eps + opts.eps_rel * r.primal_scale && r.dual <= opts.eps + opts.eps_rel * r.dual_scale) {
      converged = true;
      break;
    }

    // Primal infeasibility certificate from the dual increment.
    if (m > 0) {
      Vector dy = (y - y_prev).cwiseProduct(s.E) / s.c;  // unscaled
      for (Index i = 0; i < m; ++i) {
        if (!std::isfinite(u_full[i])) dy[i] = std::min(dy[i], 0.0);
        if (!std::isfinite(l_full[i])) dy[i] = std::max(dy[i], 0.0);
      }
      const double dy_norm = linalg::inf_norm(dy);
      if (dy_norm > 1e-10) {
        const Vector kt_dy = kmap.apply_transpose(dy.cwiseQuotient(s.E)).cwiseQuotient(s.D);
        double support = 0.0;
        for (Index i = 0; i < m; ++i) support += dy[i] > 0 ? u_full[i] * dy[i] : (dy[i] < 0 ? l_full[i] * dy[i] : 0.0);
        if (linalg::inf_norm(kt_dy) <= opts.eps_infeasible * dy_norm && support < -opts.eps_infeasible * dy_norm) {
          rep.status = SubsolverStatus::Infeasible;
          break;
        }
      }
    }
    // Dual infeasibility certificate from the primal increment.
    {
      const Vector dx = (x - x_prev).cwiseProduct(s.D);
      const double dx_norm = linalg::inf_norm(dx);
      if (dx_norm > 1e-10) {
        const double tol = opts.eps_infeasible * dx_norm;
        const Vector pdx = (s.P * (x - x_prev)).cwiseQuotient(s.D) / s.c;
        const double qdx = s.q.dot(x - x_prev) / s.c;
        bool cert = linalg::inf_norm(pdx) <= tol && qdx < -tol;
        if (cert && m > 0) {
          const Vector kdx = kmap.apply(x - x_prev).cwiseQuotient(s.E);
          for (Index i = 0; i < m && cert; ++i) {
            if (std::isfinite(u_full[i]) && kdx[i] > tol) cert = false;
            if (std::isfinite(l_full[i]) && kdx[i] < -tol) cert = false;
          }
        }
        if (cert) {
          rep.status = SubsolverStatus::Unbounded;
          break;
        }
      }
    }

    if (adapt && m > 0) {
      const double prim_norm = r.primal / std::max(r.primal_scale, 1e-12);
      const double dual_norm = r.dual / std::max(r.dual_scale, 1e-12);
      double ratio = std::sqrt(prim_norm / std::max(dual_norm, 1e-30));
      double new_rho = std::clamp(rho * ratio, 1e-6, 1e6);
      if (new_rho > 5.0 * rho || new_rho < 0.2 * rho) {
        rho = new_rho;
        rho_vec = detail::rho_vector(s.l, s.u, rho);
        if (!ws.solver.factorize(detail::reduced_matrix(s.P, kmap, rho_vec, sigma))) {
          rep.status = SubsolverStatus::NumericalError;
          break;
        }
      }
    }
  }
  rep.iterations = std::min(iter, opts.max_iterations);

  if (rep.status == SubsolverStatus::Infeasible || rep.status == SubsolverStatus::Unbounded ||
      rep.status == SubsolverStatus::NumericalError) {
    rep.x_star = x.cwiseProduct(s.D);
    rep.y_eq = Vector::Zero(k_eq);
    rep.y_ineq = Vector::Zero(m - k_eq);
    return rep;
  }

  if (opts.polish) {
    // Guess the active set from the ADMM iterate and solve the equality-constrained QP on it.
    std::vector<Index> active;
    std::vector<double> target;
    std::vector<int> side;  // 0 equality, -1 lower, +1 upper
    for (Index i = 0; i < m; ++i) {
      if (s.l[i] == s.u[i]) {
        active.push_back(i);
        target.push_back(s.u[i]);
        side.push_back(0);
      } else if (z[i] - s.l[i] < -y[i]) {
        active.push_back(i);
        target.push_back(s.l[i]);
        side.push_back(-1);
      } else if (s.u[i] - z[i] < y[i]) {
        active.push_back(i);
        target.push_back(s.u[i]);
        side.push_back(1);
      }
    }
    std::vector<Triplet> t;
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (SparseMatrix::InnerIterator it(s.K, active[a]); it; ++it) t.emplace_back(static_cast<Index>(a), it.col(), it.value());
    }
    SparseMatrix k_act(static_cast<Index>(active.size()), d);
    k_act.setFromTriplets(t.begin(), t.end());
    const linalg::LinearMap amap(k_act, kmap.dense());
    linalg::SymmetricMatrix h;
    h.dense = kmap.dense();
    if (h.dense) {
      h.full = DenseMatrix(s.P);
    } else {
      linalg::ColMajorSparse eye(d, d);
      eye.setIdentity();
      h.lower = linalg::ColMajorSparse(s.P) + 0.0 * eye;
      h.lower.makeCompressed();
    }
    linalg::KktSolver kkt;
    const Vector b_act = Eigen::Map<const Vector>(target.data(), static_cast<Index>(target.size()));
    if (kkt.factorize(h, amap, Vector::Zero(k_act.rows()), 1e-7)) {
      const Vector sol = kkt.solve(-s.q, b_act, 12);
      const Vector xp = sol.head(d);
      Vector yp = Vector::Zero(m);
      bool signs_ok = sol.allFinite();
      for (std::size_t a = 0; a < active.size(); ++a) {
        const double ya = sol[d + static_cast<Index>(a)];
        yp[active[a]] = ya;
        if (side[a] == -1 && ya > opts.eps) signs_ok = false;
        if (side[a] == 1 && ya < -opts.eps) signs_ok = false;
      }
      if (signs_ok) {
        const Vector kxp = kmap.apply(xp);
        const Vector zp = clip(kxp, s.l, s.u);
        const detail::Residuals rp = residuals(xp, zp, yp);
        const detail::Residuals ra = residuals(x, z, y);
        if (std::max(rp.primal, rp.dual) <= std::max({ra.primal, ra.dual, opts.eps})) {
          x = xp;
          y = yp;
          z = zp;
          rep.polished = true;
          converged = converged || std::max(rp.primal, rp.dual) <= opts.eps;
        }
      }
    }
  }

  rep.x_star = x.cwiseProduct(s.D);
  const Vector y_unscaled = y.cwiseProduct(s.E) / s.c;
  rep.y_eq = y_unscaled.head(k_eq);
  rep.y_ineq = y_unscaled.tail(m - k_eq);
  fill_kkt_residuals(qp, rep);
  if (converged) rep.status = SubsolverStatus::Solved;
  return rep;
}

}  // namespace pricekit::subsolvers
