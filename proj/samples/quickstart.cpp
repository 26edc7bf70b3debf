// Builds a three-product instance by hand, solves it with every method and prints the prices.
#include "pricekit/pricekit.hpp"

#include <cstdio>

int main() {
  using namespace pricekit;

  // Products 0 and 1 are substitutes; product 2 is independent.
  DenseMatrix e(3, 3);
  e << -2.0, 0.4, 0.0,
       0.3, -1.8, 0.0,
       0.0, 0.0, -3.0;

  PricingInstance inst;
  inst.E = ElasticityMatrix::from_dense(e);
  inst.r_nom = Vector{{2.0, 1.5, 4.0}};
  inst.kappa_nom = 0.85 * inst.r_nom;
  inst.constraints = PriceConstraintSet::box(3, std::log(1.25));  // prices move at most 25%

  const ValidationReport rep = validate_instance(inst);
  if (!rep.ok()) {
    std::fprintf(stderr, "invalid instance: %s\n", rep.findings.front().message.c_str());
    return 1;
  }

  std::printf("nominal profit %.6f\n", profit(inst, Vector::Zero(3)));
  for (Method m : {Method::CCP, Method::QMM, Method::PGD}) {
    SolveOptions opts;
    opts.method = m;
    const SolveResult r = solve(inst, opts);
    std::printf("%-4s %-10s profit %.6f after %d iterations; price factors", to_string(m), to_string(r.status),
                r.final_profit(), r.iterations);
    for (Index i = 0; i < inst.n(); ++i) std::printf(" %.4f", std::exp(r.pi_star[i]));
    std::printf("\n");
  }
  return 0;
}
