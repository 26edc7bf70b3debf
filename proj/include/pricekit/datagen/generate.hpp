#pragma once

#include "pricekit/core/rng.hpp"
#include "pricekit/model/builders.hpp"

#include <cstdint>
#include <string>
#include <utility>

namespace pricekit {

/// Random instance configuration. Every range is sampled uniformly.
struct GenConfig {
  Index n = 20;
  Index m = 4;  // policy parameters; 0 for free prices
  Index block_size = 10;
  std::pair<double, double> self_elasticity_range{-3.0, -1.0};
  std::pair<double, double> cross_elasticity_range{-0.05, 0.05};
  std::pair<double, double> revenue_range{1.0, 5.0};
  double margin = 0.10;
  double price_change_limit = 0.20;
  std::uint64_t seed = 0;

  void validate() const {
    require(n > 0, ErrorCode::InvalidArgument, "n must be positive");
    require(m >= 0, ErrorCode::InvalidArgument, "m must be nonnegative");
    require(block_size > 0, ErrorCode::InvalidArgument, "block size must be positive");
    require(n % block_size == 0, ErrorCode::InvalidArgument,
            "n must be a multiple of the block size: " + std::to_string(n) + " is not divisible by " +
                std::to_string(block_size));
    auto ordered = [](const std::pair<double, double>& r) {
      return std::isfinite(r.first) && std::isfinite(r.second) && r.first <= r.second;
    };
    require(ordered(self_elasticity_range) && ordered(cross_elasticity_range) && ordered(revenue_range),
            ErrorCode::InvalidArgument, "ranges must be finite and ordered");
    require(revenue_range.first > 0.0, ErrorCode::InvalidArgument, "revenues must be positive");
    require(margin > 0.0 && margin < 1.0, ErrorCode::InvalidArgument, "margin must lie in (0, 1)");
    require(price_change_limit > 0.0 && std::isfinite(price_change_limit), ErrorCode::InvalidArgument,
            "price change limit must be positive");
  }
};

/// Substreams of the seeded generator, in this order: E diagonal, E off-diagonal (block by block,
/// row-major inside a block), r_nom, policy attributes (column-major).
inline PricingInstance generate_instance(const GenConfig& cfg) {
  cfg.validate();
  const Xoshiro256 root(cfg.seed);
  Xoshiro256 diag_rng = root.substream(0);
  Xoshiro256 cross_rng = root.substream(1);
  Xoshiro256 revenue_rng = root.substream(2);
  Xoshiro256 attr_rng = root.substream(3);

  const Index n = cfg.n;
  const Index bs = cfg.block_size;
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n * bs));
  for (Index i = 0; i < n; ++i) {
    t.emplace_back(i, i, diag_rng.uniform(cfg.self_elasticity_range.first, cfg.self_elasticity_range.second));
  }
  for (Index b0 = 0; b0 < n; b0 += bs) {
    for (Index i = b0; i < b0 + bs; ++i) {
      for (Index j = b0; j < b0 + bs; ++j) {
        if (i == j) continue;
        t.emplace_back(i, j, cross_rng.uniform(cfg.cross_elasticity_range.first, cfg.cross_elasticity_range.second));
      }
    }
  }
  SparseMatrix e(n, n);
  e.setFromTriplets(t.begin(), t.end());

  PricingInstance inst;
  inst.E = ElasticityMatrix(std::move(e));
  inst.r_nom.resize(n);
  for (Index i = 0; i < n; ++i) inst.r_nom[i] = revenue_rng.uniform(cfg.revenue_range.first, cfg.revenue_range.second);
  inst.kappa_nom = (1.0 - cfg.margin) * inst.r_nom;
  inst.constraints = PriceConstraintSet::box(n, std::log1p(cfg.price_change_limit));
  if (cfg.m > 0) {
    DenseMatrix attributes(n, cfg.m);
    for (Index j = 0; j < cfg.m; ++j) {
      for (Index i = 0; i < n; ++i) attributes(i, j) = attr_rng.normal();
    }
    inst.policy = build_policy(PolicyKind::Affine, attributes);
  }
  return inst;
}

}  // namespace pricekit
