#pragma once

#include <Eigen/Core>
#include <cmath>

namespace myo {

/// Rank-one update of an upper-triangular Cholesky factor.
///
/// On return `upper` satisfies R'^T R' = R^T R + x x^T. `x` is used as
/// workspace and left in an unspecified state. Runs in O(d^2) with one
/// Givens-style rotation per diagonal entry; the diagonal stays positive.
///
/// Follows the Eigen convention for writable expression arguments: pass a
/// matrix, a Block, or a Map.
template <typename DerivedR, typename DerivedX>
void cholesky_rank_one_update(const Eigen::MatrixBase<DerivedR>& upper_,
                              const Eigen::MatrixBase<DerivedX>& x_) {
  using Scalar = typename DerivedR::Scalar;
  using std::hypot;
  auto& upper = const_cast<Eigen::MatrixBase<DerivedR>&>(upper_);
  auto& x = const_cast<Eigen::MatrixBase<DerivedX>&>(x_);
  const Eigen::Index d = upper.rows();
  eigen_assert(upper.cols() == d && x.size() == d);

  for (Eigen::Index k = 0; k < d; ++k) {
    const Scalar xk = x(k);
    if (xk == Scalar(0)) continue;  // rotation would be the identity
    const Scalar rkk = upper(k, k);
    const Scalar r = hypot(rkk, xk);
    const Scalar c = r / rkk;
    const Scalar s = xk / rkk;
    upper(k, k) = r;
    for (Eigen::Index j = k + 1; j < d; ++j) {
      const Scalar rkj = (upper(k, j) + s * x(j)) / c;
      x(j) = c * x(j) - s * rkj;
      upper(k, j) = rkj;
    }
  }
}

}  // namespace myo
