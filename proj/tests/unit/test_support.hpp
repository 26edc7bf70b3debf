#pragma once

#include "pricekit/core/types.hpp"

#include <Eigen/Dense>

#include <gtest/gtest.h>

#include <functional>
#include <random>

namespace pricekit::test {

/// Q diag(λ) Qᵀ with λ in [0.5, 5].
inline DenseMatrix random_spd(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.5, 5.0);
  DenseMatrix g(d, d);
  for (Index i = 0; i < g.size(); ++i) g.data()[i] = nd(rng);
  const Eigen::HouseholderQR<DenseMatrix> qr(g);
  const DenseMatrix q = qr.householderQ();
  Vector lam(d);
  for (auto& v : lam) v = ud(rng);
  return q * lam.asDiagonal() * q.transpose();
}

/// Solves [P Aᵀ; A 0] [x; y] = [-q; b] by full-pivot LU.
inline Vector dense_kkt_solution(const DenseMatrix& P, const Vector& q, const DenseMatrix& A, const Vector& b) {
  const Index d = P.rows();
  const Index k = A.rows();
  DenseMatrix K = DenseMatrix::Zero(d + k, d + k);
  K.topLeftCorner(d, d) = P;
  K.bottomLeftCorner(k, d) = A;
  K.topRightCorner(d, k) = A.transpose();
  Vector rhs(d + k);
  rhs << -q, b;
  return K.fullPivLu().solve(rhs).head(d);
}

/// Minimum of 1/2 xᵀPx + qᵀx over {Aeq x = beq, F x <= g} for strictly convex P, by enumerating
/// every subset of inequality rows treated as equalities and keeping the feasible candidates.
inline double enumerate_active_sets(const DenseMatrix& P, const Vector& q, const DenseMatrix& Aeq, const Vector& beq,
                                    const DenseMatrix& F, const Vector& g) {
  const Index d = P.rows();
  const Index l = F.rows();
  double best = kInf;
  for (unsigned mask = 0; mask < (1u << l); ++mask) {
    std::vector<Index> act;
    for (Index i = 0; i < l; ++i)
      if (mask & (1u << i)) act.push_back(i);
    const Index k = Aeq.rows() + static_cast<Index>(act.size());
    if (k > d) continue;
    DenseMatrix A(k, d);
    Vector b(k);
    A.topRows(Aeq.rows()) = Aeq;
    b.head(Aeq.rows()) = beq;
    for (std::size_t j = 0; j < act.size(); ++j) {
      A.row(Aeq.rows() + j) = F.row(act[j]);
      b[Aeq.rows() + j] = g[act[j]];
    }
    if (k > 0 && Eigen::FullPivLU<DenseMatrix>(A).rank() < k) continue;
    const Vector x = dense_kkt_solution(P, q, A, b);
    if (Aeq.rows() > 0 && (Aeq * x - beq).lpNorm<Eigen::Infinity>() > 1e-9) continue;
    if (l > 0 && ((F * x - g).array() > 1e-9).any()) continue;
    best = std::min(best, 0.5 * x.dot(P * x) + q.dot(x));
  }
  return best;
}

/// Runs f and checks that it throws pricekit::Error with the given code.
inline void expect_error(ErrorCode code, const std::function<void()>& f) {
  try {
    f();
    ADD_FAILURE() << "expected error: " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace pricekit::test
