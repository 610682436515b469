#pragma once

// Empirical dHSIC (biased V-statistic) over kernel matrices.
//
//   dHSIC = 1/m^2      sum_{a,b} prod_j K^j(a,b)
//         + 1/m^{2d}   prod_j sum_{a,b} K^j(a,b)
//         - 2/m^{d+1}  sum_a prod_j sum_b K^j(a,b)
//
// Every term is linear in each kernel, so the statistic is additive in any one
// kernel argument with the others held fixed. The value is defined as 0 when
// m < 2d.

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "ical/kernels.hpp"

namespace ical {

template <typename Scalar>
struct DhsicStatistic {
  Scalar value = 0;
  Eigen::Index d = 0;
  Eigen::Index m = 0;
  bool degenerate = false;  // m < 2d, value forced to 0
};

namespace detail {

template <typename Scalar>
Scalar clamp_noise(Scalar v) {
  return (v < Scalar(0) && v > Scalar(-1e-10)) ? Scalar(0) : v;
}

template <typename Scalar>
void check_dhsic_args(std::span<const KernelMatrix<Scalar>> ks) {
  if (ks.size() < 2) throw InvalidInput("dhsic: need at least 2 kernels");
  const Eigen::Index m = ks.front().rows();
  for (const auto& k : ks) {
    if (k.rows() != m || k.cols() != m) throw InvalidInput("dhsic: kernel sizes differ");
    if (!k.allFinite()) throw InvalidInput("dhsic: non-finite kernel entry");
  }
}

}  // namespace detail

/// General d-variable estimator, O(d m^2).
template <typename Scalar>
DhsicStatistic<Scalar> dhsic(std::span<const KernelMatrix<Scalar>> ks) {
  detail::check_dhsic_args(ks);
  const auto d = static_cast<Eigen::Index>(ks.size());
  const Eigen::Index m = ks.front().rows();
  DhsicStatistic<Scalar> out{Scalar(0), d, m, m < 2 * d};
  if (out.degenerate) return out;

  const Scalar n = static_cast<Scalar>(m);
  KernelMatrix<Scalar> joint = ks.front();
  Scalar marginal = ks.front().sum() / (n * n);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> cross = ks.front().rowwise().sum() / n;
  for (Eigen::Index j = 1; j < d; ++j) {
    joint.array() *= ks[j].array();
    marginal *= ks[j].sum() / (n * n);
    cross.array() *= (ks[j].rowwise().sum() / n).array();
  }
  out.value = detail::clamp_noise(joint.sum() / (n * n) + marginal - Scalar(2) * cross.sum() / n);
  return out;
}

template <typename Scalar>
DhsicStatistic<Scalar> dhsic(const std::vector<KernelMatrix<Scalar>>& ks) {
  return dhsic(std::span<const KernelMatrix<Scalar>>(ks));
}

/// Double-centered copy H K H with H = I - 11^T/m.
template <typename Derived>
KernelMatrix<typename Derived::Scalar> center(const Eigen::MatrixBase<Derived>& k) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> col_mean = k.colwise().mean();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> row_mean = k.rowwise().mean();
  const Scalar grand = col_mean.mean();
  KernelMatrix<Scalar> c = k;
  c.colwise() -= row_mean;
  c.rowwise() -= col_mean;
  c.array() += grand;
  return c;
}

/// Two-variable statistic tr(K H L H) / m^2. Agrees with dhsic({K, L}).
template <typename DerivedK, typename DerivedL>
DhsicStatistic<typename DerivedK::Scalar> hsic2(const Eigen::MatrixBase<DerivedK>& k,
                                                const Eigen::MatrixBase<DerivedL>& l) {
  using Scalar = typename DerivedK::Scalar;
  const Eigen::Index m = k.rows();
  if (k.cols() != m || l.rows() != m || l.cols() != m) throw InvalidInput("hsic2: kernel sizes differ");
  if (!k.allFinite() || !l.allFinite()) throw InvalidInput("hsic2: non-finite kernel entry");
  DhsicStatistic<Scalar> out{Scalar(0), 2, m, m < 4};
  if (out.degenerate) return out;
  const Scalar n = static_cast<Scalar>(m);
  out.value = detail::clamp_noise(center(k).cwiseProduct(l).sum() / (n * n));
  return out;
}

/// Permutation p-value for dependence between K and L: the fraction of
/// simultaneous row/column permutations of L whose statistic reaches the
/// observed one, with +1 smoothing in numerator and denominator.
template <typename Scalar>
Scalar permutation_pvalue(const KernelMatrix<Scalar>& k, const KernelMatrix<Scalar>& l, int n_perms,
                          std::uint64_t rng_seed) {
  if (n_perms < 1) throw InvalidInput("permutation_pvalue: n_perms must be >= 1");
  const Scalar observed = hsic2(k, l).value;
  const Eigen::Index m = k.rows();
  const KernelMatrix<Scalar> kc = center(k);

  std::mt19937_64 rng(rng_seed);
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic> perm(m);
  perm.setIdentity();
  int hits = 0;
  KernelMatrix<Scalar> lp(m, m);
  for (int p = 0; p < n_perms; ++p) {
    std::shuffle(perm.indices().data(), perm.indices().data() + m, rng);
    lp = perm * l * perm.transpose();
    const Scalar stat = kc.cwiseProduct(lp).sum() / static_cast<Scalar>(m * m);
    if (stat >= observed) ++hits;
  }
  return static_cast<Scalar>(hits + 1) / static_cast<Scalar>(n_perms + 1);
}

}  // namespace ical
