#pragma once

#include "pricekit/core/rng.hpp"
#include "pricekit/methods/lowering.hpp"

namespace pricekit::methods {

/// Random feasible start: a uniform sample of the price box moved to the nearest feasible point.
inline FeasiblePoint random_feasible_init(const PricingInstance& inst, Xoshiro256& rng,
                                          const subsolvers::QpOptions& opts = {}) {
  const PriceConstraintSet& pc = inst.constraints;
  Vector pi(inst.n());
  for (Index i = 0; i < pi.size(); ++i) pi[i] = rng.uniform(pc.pi_min()[i], pc.pi_max()[i]);
  return nearest_feasible(inst, pi, opts);
}

}  // namespace pricekit::methods
