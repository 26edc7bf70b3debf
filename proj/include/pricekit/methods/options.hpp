#pragma once

#include "pricekit/subsolvers/problems.hpp"

#include <cstdint>
#include <optional>

namespace pricekit {

enum class Method { CCP, QMM, PGD };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::CCP: return "ccp";
    case Method::QMM: return "qmm";
    case Method::PGD: return "pgd";
  }
  return "unknown";
}

/// How the policy enters the subproblems. Full keeps (pi, delta, theta) with pi = C theta as
/// equality rows; Eliminated substitutes pi = C theta and delta = E C theta. Auto picks
/// Eliminated when a policy has m < n/2 parameters.
enum class Lowering { Auto, Full, Eliminated };

struct SolveOptions {
  Method method = Method::QMM;
  double rel_tol = 1e-3;
  int max_outer_iters = 50;
  /// Iteration cap of the projected-gradient baseline, which takes many cheap steps.
  int pgd_max_iters = 2000;
  double pgd_gradient_tol = 1e-6;
  std::optional<Vector> pi_init;
  std::optional<Vector> theta_init;
  subsolvers::QpOptions qp;
  subsolvers::SmoothOptions smooth;
  std::uint64_t seed = 0;
  Lowering lowering = Lowering::Auto;

  void validate() const {
    require(rel_tol > 0.0 && std::isfinite(rel_tol), ErrorCode::InvalidArgument, "rel_tol must be positive");
    require(max_outer_iters > 0 && pgd_max_iters > 0, ErrorCode::InvalidArgument, "iteration limits must be positive");
  }
};

/// Linearization point of the quadratic minorizer.
struct MinorizerState {
  Vector pi_hat;
  Vector delta_hat;
  Vector beta;
  Vector delta_max;
};

}  // namespace pricekit
