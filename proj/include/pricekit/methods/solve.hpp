#pragma once

#include "pricekit/methods/analytic.hpp"
#include "pricekit/methods/brute_force.hpp"
#include "pricekit/methods/ccp.hpp"
#include "pricekit/methods/init.hpp"
#include "pricekit/methods/pgd.hpp"
#include "pricekit/methods/qmm.hpp"

namespace pricekit {

inline SolveResult solve(const PricingInstance& inst, const SolveOptions& opts = {}) {
  switch (opts.method) {
    case Method::CCP: return solve_ccp(inst, opts);
    case Method::QMM: return solve_qmm(inst, opts);
    case Method::PGD: return solve_pgd(inst, opts);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown method");
}

}  // namespace pricekit
