#pragma once

#include "pricekit/model/instance.hpp"

#include <string>

namespace pricekit {

/// Upper bound on E pi over the box: (E)_+ pi_max - (E)_- pi_min.
inline Vector compute_delta_max(const ElasticityMatrix& E, const Vector& pi_min, const Vector& pi_max) {
  const Index n = E.size();
  require(pi_min.size() == n && pi_max.size() == n, ErrorCode::DimensionMismatch, "box bounds and E");
  for (Index i = 0; i < n; ++i) {
    require(std::isfinite(pi_min[i]) && std::isfinite(pi_max[i]), ErrorCode::PreconditionViolated,
            "the quadratic minorizer needs a finite box; product " + std::to_string(i) + " is unbounded", i);
    require(pi_min[i] <= pi_max[i], ErrorCode::Infeasible, "empty box at index " + std::to_string(i), i);
  }
  Vector out = Vector::Zero(n);
  const SparseMatrix& e = E.entries();
  for (Index i = 0; i < n; ++i) {
    for (SparseMatrix::InnerIterator it(e, i); it; ++it) {
      const double v = it.value();
      out[i] += v > 0.0 ? v * pi_max[it.col()] : v * pi_min[it.col()];
    }
  }
  return out;
}

/// (e^b - b - 1) / b^2, with the series 1/2 + b/6 below 1e-6.
inline double minorizer_curvature(double b) {
  if (b < 1e-6) return 0.5 + b / 6.0;
  return (std::expm1(b) - b) / (b * b);
}

/// Slack allowed on delta_hat <= delta_max for rounding in E pi.
inline constexpr double kDeltaMaxRounding = 1e-10;

inline Vector update_beta(const Vector& delta_max, const Vector& delta_hat) {
  require(delta_max.size() == delta_hat.size(), ErrorCode::DimensionMismatch, "delta_max and delta_hat");
  Vector beta(delta_max.size());
  for (Index i = 0; i < beta.size(); ++i) {
    const double b = delta_max[i] - delta_hat[i];
    if (!(b >= -kDeltaMaxRounding * (1.0 + std::abs(delta_max[i])))) {
      throw Error(ErrorCode::PreconditionViolated,
                  "delta_hat exceeds delta_max at index " + std::to_string(i), i);
    }
    beta[i] = minorizer_curvature(std::max(b, 0.0));
  }
  return beta;
}

/// e^{delta_hat} (1 + (delta - delta_hat) + beta (delta - delta_hat)^2), which bounds e^delta from
/// above for delta <= delta_max.
inline double majorizer(double delta, double delta_hat, double beta) {
  const double s = delta - delta_hat;
  return std::exp(delta_hat) * (1.0 + s + beta * s * s);
}

}  // namespace pricekit
