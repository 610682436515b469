#pragma once

#include <Eigen/Core>

#include <cmath>

namespace ical {

/// Shannon entropy in nats, with 0 ln 0 := 0.
template <typename Derived>
typename Derived::Scalar entropy(const Eigen::DenseBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  Scalar h(0);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const Scalar v = p.derived().coeff(i);
    if (v > Scalar(0)) h -= v * std::log(v);
  }
  return h;
}

/// Lowest index attaining the maximum.
template <typename Derived>
Eigen::Index argmax_first(const Eigen::DenseBase<Derived>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v.derived().coeff(i) > v.derived().coeff(best)) best = i;
  return best;
}

}  // namespace ical
