#pragma once

#include "pricekit/model/profit.hpp"

#include <chrono>

namespace pricekit {

inline constexpr Index kBruteForceMaxFreeDims = 4;

/// Exhaustive search over a lattice of the feasible set. Equalities are eliminated through an
/// orthonormal null-space basis N, pi = pi0 + N z, and the lattice covers the bounding box of z over
/// the price box; lattice points violating any row are skipped. Accuracy is O(box width / points).
inline SolveResult brute_force(const PricingInstance& inst, int grid_points_per_dim) {
  const auto t0 = std::chrono::steady_clock::now();
  require(grid_points_per_dim >= 3, ErrorCode::InvalidArgument, "brute force needs at least 3 grid points per dimension");
  require(!inst.policy, ErrorCode::PreconditionViolated, "brute force searches prices directly; remove the policy");
  const Index n = inst.n();
  const PriceConstraintSet& pc = inst.constraints;
  for (Index i = 0; i < n; ++i) {
    require(std::isfinite(pc.pi_min()[i]) && std::isfinite(pc.pi_max()[i]), ErrorCode::PreconditionViolated,
            "brute force needs a finite box", i);
  }

  Vector pi0 = Vector::Zero(n);
  DenseMatrix basis = DenseMatrix::Identity(n, n);
  bool equalities_consistent = true;
  if (pc.A.rows() > 0) {
    const DenseMatrix a(pc.A);
    const Eigen::CompleteOrthogonalDecomposition<DenseMatrix> cod(a);
    pi0 = cod.solve(pc.b);
    equalities_consistent = linalg::inf_norm(a * pi0 - pc.b) <= 1e-9 * (1.0 + linalg::inf_norm(pc.b));
    const Eigen::JacobiSVD<DenseMatrix> svd(a, Eigen::ComputeFullV);
    const Index rank = svd.rank();
    basis = svd.matrixV().rightCols(n - rank);
  }
  const Index k = basis.cols();
  require(k <= kBruteForceMaxFreeDims, ErrorCode::TooLarge,
          "brute force supports at most " + std::to_string(kBruteForceMaxFreeDims) + " free dimensions, got " +
              std::to_string(k));

  // Bounding box of z = N^T (pi - pi0) over the price box.
  Vector zlo = Vector::Zero(k);
  Vector zhi = Vector::Zero(k);
  const bool identity_basis = pc.A.rows() == 0;
  if (identity_basis) {
    zlo = pc.pi_min();
    zhi = pc.pi_max();
  } else {
    for (Index j = 0; j < k; ++j) {
      for (Index i = 0; i < n; ++i) {
        const double a = basis(i, j) * (pc.pi_min()[i] - pi0[i]);
        const double b = basis(i, j) * (pc.pi_max()[i] - pi0[i]);
        zlo[j] += std::min(a, b);
        zhi[j] += std::max(a, b);
      }
    }
  }

  const DenseMatrix e(inst.E.entries());
  const DenseMatrix f(pc.F);
  const double feas_tol = 1e-9;
  auto feasible = [&](const Vector& pi) {
    if (((pc.pi_min() - pi).array() > feas_tol).any() || ((pi - pc.pi_max()).array() > feas_tol).any()) return false;
    if (f.rows() > 0 && ((f * pi - pc.g).array() > feas_tol).any()) return false;
    return true;
  };
  auto value = [&](const Vector& pi) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double d = e.row(i).dot(pi);
      if (std::abs(d + pi[i]) > kMaxExponent || std::abs(d) > kMaxExponent) return -kInf;
      total += inst.r_nom[i] * std::exp(d + pi[i]) - inst.kappa_nom[i] * std::exp(d);
    }
    return total;
  };

  SolveResult res;
  res.method = "brute_force";
  res.iterations = 1;
  double best = -kInf;
  Vector best_pi;
  if (equalities_consistent) {
    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    Vector z(k);
    Vector pi(n);
    const int g = grid_points_per_dim;
    while (true) {
      for (Index j = 0; j < k; ++j) {
        // Endpoints are hit exactly so clipped optima lie on the lattice.
        const int t = idx[static_cast<std::size_t>(j)];
        z[j] = t == g - 1 ? zhi[j] : zlo[j] + (zhi[j] - zlo[j]) * static_cast<double>(t) / (g - 1);
      }
      pi = identity_basis ? z : Vector(pi0 + basis * z);
      if (feasible(pi)) {
        const double v = value(pi);
        if (v > best) {
          best = v;
          best_pi = pi;
        }
      }
      Index j = 0;
      while (j < k && ++idx[static_cast<std::size_t>(j)] == g) idx[static_cast<std::size_t>(j++)] = 0;
      if (j == k) break;
    }
  }
  if (best_pi.size() == 0) {
    res.status = SolveStatus::Infeasible;
    res.message = "no lattice point satisfies the constraints";
    res.pi_star = Vector::Zero(n);
    res.delta_star = Vector::Zero(n);
  } else {
    res.status = SolveStatus::Converged;
    res.pi_star = best_pi;
    res.delta_star = demand_change(inst.E, best_pi);
    res.profit_trajectory = {best};
  }
  res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace pricekit
