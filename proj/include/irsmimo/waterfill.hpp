#pragma once

#include "irsmimo/core.hpp"

#include <algorithm>
#include <limits>

namespace irsmimo {

struct WaterfillResult {
  RVector allocation;  // z_q
  double threshold = 0.0;  // mu
  RVector sigma_sq;
};

/// z_q = [mu - 1/(gamma sigma_q^2)]^+ with sum z_q = budget; mu found by bisection.
///
/// The search runs on nu = mu - min_q 1/(gamma sigma_q^2) in [0, budget], which keeps
/// full precision when the inverse gains are large compared to the budget.
inline WaterfillResult waterfill(const RVector& sigma_sq, double gamma, double budget = 1.0) {
  require(gamma > 0.0, "waterfill: SNR must be positive");
  require(budget > 0.0, "waterfill: budget must be positive");
  const Index q_count = sigma_sq.size();
  const double inf = std::numeric_limits<double>::infinity();

  RVector inv(q_count);
  double base = inf;
  for (Index q = 0; q < q_count; ++q) {
    require(sigma_sq(q) >= 0.0, "waterfill: negative eigen-gain");
    inv(q) = sigma_sq(q) > 0.0 ? 1.0 / (gamma * sigma_sq(q)) : inf;
    base = std::min(base, inv(q));
  }
  if (!std::isfinite(base)) throw NumericalError("waterfill: no usable eigenchannel");

  const RVector gap = inv.array() - base;  // >= 0, inf for dead channels
  auto fill = [&](double nu) {
    RVector z(q_count);
    for (Index q = 0; q < q_count; ++q) z(q) = std::max(nu - gap(q), 0.0);
    return z;
  };

  double lo = 0.0;
  double hi = budget;  // the strongest channel alone absorbs nu
  double nu = hi;
  for (int it = 0; it < 400; ++it) {
    nu = 0.5 * (lo + hi);
    const double s = fill(nu).sum();
    if (std::abs(s - budget) <= 1e-13 * budget) break;
    if (s > budget) {
      hi = nu;
    } else {
      lo = nu;
    }
  }
  return {fill(nu), base + nu, sigma_sq};
}

}  // namespace irsmimo
