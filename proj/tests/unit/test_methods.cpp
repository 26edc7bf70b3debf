#include "pricekit/datagen/fixtures.hpp"
#include "pricekit/datagen/generate.hpp"
#include "pricekit/methods/solve.hpp"
#include "pricekit/model/builders.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

namespace pricekit {
namespace {

using test::expect_error;

const double kLog12 = std::log(1.2);

DenseMatrix pair_matrix() {
  DenseMatrix e(2, 2);
  e << -1.0, 0.5, 0.2, -2.0;
  return e;
}

double relative_gap(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::vector<SolveResult> all_methods(const PricingInstance& inst, SolveOptions opts = {}) {
  std::vector<SolveResult> out;
  for (Method m : {Method::CCP, Method::QMM, Method::PGD}) {
    opts.method = m;
    out.push_back(solve(inst, opts));
  }
  return out;
}

// Oracle: 1-D grid search of r e^{(1+E) pi} - kappa e^{E pi}.
double scalar_grid_argmax(double e, double r, double kappa, double lo, double hi, int points) {
  double best = -kInf;
  double arg = lo;
  for (int k = 0; k < points; ++k) {
    const double pi = lo + (hi - lo) * k / (points - 1);
    const double p = r * std::exp((1.0 + e) * pi) - kappa * std::exp(e * pi);
    if (p > best) {
      best = p;
      arg = pi;
    }
  }
  return arg;
}

TEST(DeltaMax, DiagonalSignSplit) {
  const Vector d = compute_delta_max(ElasticityMatrix::diagonal(Vector::Constant(1, -2.0)), Vector::Constant(1, -0.2),
                                     Vector::Constant(1, 0.2));
  EXPECT_NEAR(d[0], 0.4, 1e-15);
}

TEST(DeltaMax, ZeroMatrix) {
  const Vector d = compute_delta_max(ElasticityMatrix::from_dense(DenseMatrix::Zero(3, 3)), Vector::Constant(3, -0.2),
                                     Vector::Constant(3, 0.2));
  EXPECT_EQ(d, Vector::Zero(3));
}

TEST(DeltaMax, CoupledMatchesVertexEnumeration) {
  const DenseMatrix e = pair_matrix();
  const Vector d = compute_delta_max(ElasticityMatrix::from_dense(e), Vector::Constant(2, -0.2), Vector::Constant(2, 0.2));
  Vector oracle = Vector::Constant(2, -kInf);
  for (double a : {-0.2, 0.2}) {
    for (double b : {-0.2, 0.2}) {
      oracle = oracle.cwiseMax(e * (Vector(2) << a, b).finished());
    }
  }
  EXPECT_NEAR(d[0], 0.3, 1e-15);
  EXPECT_NEAR(d[1], 0.44, 1e-15);
  EXPECT_NEAR((d - oracle).norm(), 0.0, 1e-15);
}

TEST(DeltaMax, InfiniteBoundRejected) {
  expect_error(ErrorCode::PreconditionViolated, [] {
    compute_delta_max(ElasticityMatrix::diagonal(-Vector::Ones(1)), Vector::Constant(1, -kInf), Vector::Ones(1));
  });
}

TEST(UpdateBeta, ClosedFormValues) {
  const Vector beta = update_beta((Vector(3) << 1.0, 2.0, 0.0).finished(), Vector::Zero(3));
  EXPECT_NEAR(beta[0], std::exp(1.0) - 2.0, 1e-15);
  EXPECT_NEAR(beta[0], 0.718282, 1e-6);
  EXPECT_NEAR(beta[1], (std::exp(2.0) - 3.0) / 4.0, 1e-15);
  EXPECT_NEAR(beta[1], 1.097264, 1e-6);
  EXPECT_EQ(beta[2], 0.5);
}

TEST(UpdateBeta, SeriesBranchIsContinuous) {
  // Both branches agree near the switch at 1e-6.
  EXPECT_NEAR(minorizer_curvature(0.999999e-6), minorizer_curvature(1.000001e-6), 1e-10);
  EXPECT_NEAR(minorizer_curvature(1e-7), 0.5 + 1e-7 / 6.0, 1e-15);
}

TEST(UpdateBeta, DeltaHatAboveMaxRejected) {
  expect_error(ErrorCode::PreconditionViolated,
               [] { update_beta(Vector::Constant(1, 0.1), Vector::Constant(1, 0.2)); });
}

TEST(Majorizer, DominatesAndTouches) {
  Xoshiro256 rng(77);
  for (int k = 0; k < 200; ++k) {
    const double dh = rng.uniform(-1.0, 1.0);
    const double dm = dh + rng.uniform(1e-3, 5.0);
    const double beta = update_beta(Vector::Constant(1, dm), Vector::Constant(1, dh))[0];
    for (int g = 0; g <= 100; ++g) {
      const double d = dh - 5.0 + (dm - dh + 5.0) * g / 100.0;
      EXPECT_GE(majorizer(d, dh, beta) - std::exp(d), -1e-12);
    }
    EXPECT_NEAR(majorizer(dh, dh, beta), std::exp(dh), 1e-12);
    EXPECT_NEAR(majorizer(dm, dh, beta), std::exp(dm), 1e-9 * std::exp(dm));
  }
}

TEST(Surrogates, MinorizeTrueProfitDifferences) {
  GenConfig cfg;
  cfg.n = 20;
  cfg.m = 0;
  cfg.seed = 12;
  const PricingInstance inst = generate_instance(cfg);
  const Vector dmax = compute_delta_max(inst.E, inst.constraints.pi_min(), inst.constraints.pi_max());
  Xoshiro256 rng(13);
  auto sample = [&] {
    Vector pi(inst.n());
    for (Index i = 0; i < pi.size(); ++i) pi[i] = rng.uniform(-kLog12, kLog12);
    return pi;
  };
  for (int k = 0; k < 50; ++k) {
    const Vector hat = sample();
    methods::Iterate at;
    at.pi = hat;
    at.delta = demand_change(inst.E, hat);
    const MinorizerState st = methods::minorizer_state(at, dmax);
    const double p_hat = profit(inst, hat);
    for (int j = 0; j < 10; ++j) {
      const Vector pi = sample();
      const double truth = profit(inst, pi) - p_hat;
      EXPECT_LE(methods::ccp_surrogate(inst, hat, pi) - methods::ccp_surrogate(inst, hat, hat), truth + 1e-8);
      EXPECT_LE(methods::qmm_surrogate(inst, st, pi) - methods::qmm_surrogate(inst, st, hat), truth + 1e-8);
    }
  }
}

TEST(Surrogates, QmmSubproblemMatchesSurrogate) {
  // The QP objective is minus the surrogate up to a constant.
  const PricingInstance inst = fixture("pair-substitutes");
  const methods::Lowered low = methods::lower_instance(inst, Lowering::Full);
  const Vector dmax = compute_delta_max(inst.E, inst.constraints.pi_min(), inst.constraints.pi_max());
  methods::Iterate at;
  at.pi = (Vector(2) << 0.05, -0.1).finished();
  at.delta = demand_change(inst.E, at.pi);
  const MinorizerState st = methods::minorizer_state(at, dmax);
  const subsolvers::QPProblem qp = methods::qmm_subproblem(inst, low, st);
  auto qp_value = [&](const Vector& pi) {
    const Vector x = linalg::vconcat({&pi, &static_cast<const Vector&>(demand_change(inst.E, pi))});
    return 0.5 * x.dot(qp.P * x) + qp.q.dot(x);
  };
  const Vector a = (Vector(2) << 0.1, 0.1).finished();
  const Vector b = (Vector(2) << -0.15, 0.02).finished();
  EXPECT_NEAR(qp_value(a) - qp_value(b),
              -(methods::qmm_surrogate(inst, st, a) - methods::qmm_surrogate(inst, st, b)), 1e-12);
}

TEST(Ccp, PinnedPricesOneIteration) {
  const PricingInstance inst = fixture("pinned");
  const SolveResult r = solve_ccp(inst);
  ASSERT_EQ(r.status, SolveStatus::Converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_LT(linalg::inf_norm(r.pi_star), 1e-8);
  EXPECT_NEAR(r.final_profit(), (inst.r_nom - inst.kappa_nom).sum(), 1e-8);
}

TEST(Qmm, PinnedPrices) {
  const PricingInstance inst = fixture("pinned");
  const SolveResult r = solve_qmm(inst);
  ASSERT_EQ(r.status, SolveStatus::Converged);
  EXPECT_NEAR(r.final_profit(), (inst.r_nom - inst.kappa_nom).sum(), 1e-8);
}

TEST(Pgd, PinnedPrices) {
  const PricingInstance inst = fixture("pinned");
  const SolveResult r = solve_pgd(inst);
  ASSERT_EQ(r.status, SolveStatus::Converged);
  EXPECT_NEAR(r.final_profit(), (inst.r_nom - inst.kappa_nom).sum(), 1e-8);
}

TEST(Analytic, InelasticGoesToUpperBound) {
  PricingInstance inst = fixture("scalar-clipped");
  inst.E = ElasticityMatrix::diagonal(Vector::Constant(1, -1.0));
  for (double ratio : {0.2, 0.9, 1.5}) {
    inst.kappa_nom[0] = ratio;
    EXPECT_EQ(solve_diagonal_analytic(inst).pi_star[0], kLog12);
  }
}

TEST(Analytic, ClippedExample) {
  const PricingInstance inst = fixture("scalar-clipped");
  const SolveResult r = solve_diagonal_analytic(inst);
  EXPECT_EQ(r.status, SolveStatus::Converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_NEAR(std::log(0.9 * 2.0), 0.587787, 1e-6);
  EXPECT_NEAR(r.pi_star[0], 0.182322, 1e-6);
  EXPECT_NEAR(r.pi_star[0], scalar_grid_argmax(-2.0, 1.0, 0.9, -kLog12, kLog12, 20001), 1e-4);
}

TEST(Analytic, InteriorExample) {
  const PricingInstance inst = fixture("scalar-interior");
  const SolveResult r = solve_diagonal_analytic(inst);
  EXPECT_NEAR(r.pi_star[0], std::log(1.35), 1e-15);
  EXPECT_NEAR(r.pi_star[0], 0.300105, 1e-6);
  EXPECT_NEAR(r.pi_star[0], scalar_grid_argmax(-3.0, 1.0, 0.9, -0.4, 0.4, 80001), 2e-5);
}

TEST(Analytic, ElasticPositiveTakesBetterEndpoint) {
  // E > 0 makes profit convex in pi on the line, so the maximizer is an endpoint.
  PricingInstance inst = fixture("scalar-clipped");
  for (double e : {0.3, 2.0}) {
    for (double ratio : {0.5, 0.9, 3.0}) {
      inst.E = ElasticityMatrix::diagonal(Vector::Constant(1, e));
      inst.kappa_nom[0] = ratio;
      const double oracle = scalar_grid_argmax(e, 1.0, ratio, -kLog12, kLog12, 2001);
      EXPECT_NEAR(solve_diagonal_analytic(inst).pi_star[0], oracle, 1e-12) << e << " " << ratio;
    }
  }
}

TEST(Analytic, Preconditions) {
  PricingInstance coupled = fixture("pair-substitutes");
  expect_error(ErrorCode::PreconditionViolated, [&] { solve_diagonal_analytic(coupled); });
  PricingInstance rows = fixture("diag-10");
  rows.constraints.add_equality_rows(linalg::identity(10), Vector::Zero(10));
  expect_error(ErrorCode::PreconditionViolated, [&] { solve_diagonal_analytic(rows); });
}

TEST(AllMethods, Diag10MatchesAnalytic) {
  const PricingInstance inst = fixture("diag-10");
  const double exact = solve_diagonal_analytic(inst).final_profit();
  for (const SolveResult& r : all_methods(inst)) {
    EXPECT_EQ(r.status, SolveStatus::Converged) << r.method;
    EXPECT_LE(relative_gap(r.final_profit(), exact), 1e-3) << r.method;
  }
}

TEST(AllMethods, PairMatchesGridOracle) {
  const PricingInstance inst = fixture("pair-substitutes");
  const SolveResult grid = brute_force(inst, 401);
  const auto rs = all_methods(inst);
  for (const SolveResult& r : rs) {
    EXPECT_LE(relative_gap(r.final_profit(), grid.final_profit()), 2e-3) << r.method;
  }
  EXPECT_LE(relative_gap(rs[1].final_profit(), rs[0].final_profit()), 1e-3);
}

TEST(AllMethods, GeneratedPolicyInstancesFeasibleAndMonotone) {
  for (Index n : {20, 40}) {
    GenConfig cfg;
    cfg.n = n;
    cfg.m = n / 5;
    cfg.seed = 31;
    const PricingInstance inst = generate_instance(cfg);
    const auto rs = all_methods(inst);
    for (const SolveResult& r : rs) {
      ASSERT_EQ(r.status, SolveStatus::Converged) << r.method;
      ASSERT_TRUE(r.theta_star.has_value());
      EXPECT_TRUE(is_feasible(inst, r.pi_star, r.theta_star, 1e-6)) << r.method;
      EXPECT_LE(linalg::inf_norm(r.delta_star - demand_change(inst.E, r.pi_star)), 1e-9);
      for (std::size_t k = 1; k < r.profit_trajectory.size(); ++k) {
        EXPECT_GE(r.profit_trajectory[k] - r.profit_trajectory[k - 1], -1e-9 * std::abs(r.profit_trajectory[k - 1]));
      }
      EXPECT_EQ(r.profit_trajectory.size(), static_cast<std::size_t>(r.iterations) + 1);
    }
    EXPECT_LE(relative_gap(rs[0].final_profit(), rs[1].final_profit()), 2e-3);
  }
}

TEST(AllMethods, LoweringModesAgree) {
  GenConfig cfg;
  cfg.n = 20;
  cfg.m = 4;
  cfg.seed = 8;
  const PricingInstance inst = generate_instance(cfg);
  for (Method m : {Method::CCP, Method::QMM}) {
    SolveOptions full;
    full.method = m;
    full.lowering = Lowering::Full;
    SolveOptions elim = full;
    elim.lowering = Lowering::Eliminated;
    const SolveResult a = solve(inst, full);
    const SolveResult b = solve(inst, elim);
    ASSERT_EQ(a.status, SolveStatus::Converged);
    ASSERT_EQ(b.status, SolveStatus::Converged);
    EXPECT_LE(relative_gap(a.final_profit(), b.final_profit()), 1e-3) << to_string(m);
  }
}

TEST(AllMethods, GeneralRowsRespected) {
  // Demand cap plus an inter-price row on a coupled instance without a policy.
  GenConfig cfg;
  cfg.n = 10;
  cfg.m = 0;
  cfg.seed = 4;
  PricingInstance inst = generate_instance(cfg);
  const RowBlock cap = demand_limits_to_rows(inst.E, Vector::Constant(10, -0.05), Vector::Constant(10, kInf));
  inst.constraints.add_inequality_rows(cap.rows, cap.rhs);
  SparseMatrix row(1, 10);
  row.insert(0, 0) = 1.0;
  row.insert(0, 1) = -1.0;
  inst.constraints.add_equality_rows(row, Vector::Constant(1, 0.02));
  for (const SolveResult& r : all_methods(inst)) {
    ASSERT_EQ(r.status, SolveStatus::Converged) << r.method;
    EXPECT_TRUE(is_feasible(inst.constraints, r.pi_star, 1e-6)) << r.method;
  }
}

TEST(AllMethods, InitializationFromFeasibleStart) {
  const PricingInstance inst = fixture("pair-substitutes");
  SolveOptions opts;
  opts.pi_init = (Vector(2) << -0.1, 0.15).finished();
  const double base = solve_qmm(inst).final_profit();
  for (const SolveResult& r : all_methods(inst, opts)) {
    EXPECT_NEAR(r.profit_trajectory.front(), profit(inst, *opts.pi_init), 1e-12);
    EXPECT_LE(relative_gap(r.final_profit(), base), 1e-3) << r.method;
  }
}

TEST(AllMethods, RandomInitsAreFeasible) {
  GenConfig cfg;
  cfg.n = 20;
  cfg.m = 4;
  cfg.seed = 3;
  const PricingInstance inst = generate_instance(cfg);
  Xoshiro256 rng(99);
  for (int k = 0; k < 10; ++k) {
    const methods::FeasiblePoint p = methods::random_feasible_init(inst, rng);
    ASSERT_TRUE(p.theta.has_value());
    EXPECT_TRUE(is_feasible(inst, p.pi, p.theta, 1e-6));
  }
}

TEST(AllMethods, InfeasibleInstanceReportsStatus) {
  PricingInstance inst = fixture("pair-substitutes");
  SparseMatrix rows(2, 2);
  rows.insert(0, 0) = 1.0;
  rows.insert(1, 0) = 1.0;
  inst.constraints.add_equality_rows(rows, (Vector(2) << 0.1, -0.1).finished());
  for (const SolveResult& r : all_methods(inst)) EXPECT_EQ(r.status, SolveStatus::Infeasible) << r.method;
}

TEST(AllMethods, MaxIterationsReported) {
  const PricingInstance inst = fixture("diag-10");
  SolveOptions opts;
  opts.max_outer_iters = 1;
  opts.pgd_max_iters = 1;
  for (const SolveResult& r : all_methods(inst, opts)) {
    EXPECT_EQ(r.status, SolveStatus::MaxIterations) << r.method;
    EXPECT_EQ(r.iterations, 1);
  }
}

TEST(SolveOptionsType, RejectsNonpositiveTolerance) {
  SolveOptions opts;
  opts.rel_tol = 0.0;
  expect_error(ErrorCode::InvalidArgument, [&] { solve(fixture("diag-10"), opts); });
}

TEST(Qmm, MissingBoxRejected) {
  PricingInstance inst = fixture("scalar-clipped");
  inst.constraints.upper[0] = kInf;
  expect_error(ErrorCode::PreconditionViolated, [&] { solve_qmm(inst); });
}

TEST(BruteForce, ScalarClippedHitsUpperBound) {
  const SolveResult r = brute_force(fixture("scalar-clipped"), 1001);
  EXPECT_EQ(r.pi_star[0], kLog12);
  EXPECT_EQ(r.pi_star[0], solve_diagonal_analytic(fixture("scalar-clipped")).pi_star[0]);
}

TEST(BruteForce, EmptyLatticeIsInfeasible) {
  PricingInstance inst = fixture("pair-substitutes");
  SparseMatrix row(2, 2);
  row.insert(0, 0) = 1.0;
  row.insert(1, 0) = -1.0;
  inst.constraints.add_inequality_rows(row, (Vector(2) << -0.1, -0.1).finished());  // pi_0 <= -0.1 and pi_0 >= 0.1
  EXPECT_EQ(brute_force(inst, 51).status, SolveStatus::Infeasible);
}

TEST(BruteForce, EqualityRowsReduceDimension) {
  // Free dimension 1 after pi_0 = pi_1.
  PricingInstance inst = fixture("pair-substitutes");
  SparseMatrix row(1, 2);
  row.insert(0, 0) = 1.0;
  row.insert(0, 1) = -1.0;
  inst.constraints.add_equality_rows(row, Vector::Zero(1));
  const SolveResult r = brute_force(inst, 2001);
  ASSERT_EQ(r.status, SolveStatus::Converged);
  EXPECT_NEAR(r.pi_star[0], r.pi_star[1], 1e-12);
  EXPECT_LE(relative_gap(solve_qmm(inst).final_profit(), r.final_profit()), 1e-3);
}

TEST(BruteForce, RejectsLargeAndCoarse) {
  GenConfig cfg;
  cfg.n = 10;
  cfg.m = 0;
  expect_error(ErrorCode::TooLarge, [&] { brute_force(generate_instance(cfg), 3); });
  expect_error(ErrorCode::InvalidArgument, [&] { brute_force(fixture("pair-substitutes"), 2); });
}

}  // namespace
}  // namespace pricekit
