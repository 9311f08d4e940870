#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include "myo/error.hpp"
#include "myo/rng.hpp"

namespace myo {

/// Random Fourier features for the Gaussian kernel
///
///     k(x, x') = exp(-gamma * ||x - x'||^2),
///
/// phi(x)_j = sqrt(2/M) * cos(w_j . x + b_j) with w_j ~ N(0, 2*gamma*I) and
/// b_j ~ U[0, 2*pi). <phi(x), phi(x')> is an unbiased estimate of k(x, x').
/// Frozen after construction.
template <typename Scalar = double>
class RandomFeatureMap {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Index = Eigen::Index;

  static RandomFeatureMap build(Index input_dim, Index output_dim, Scalar gamma,
                                std::uint64_t seed) {
    if (input_dim < 1) throw InvalidArgument("random features: input_dim must be >= 1");
    if (output_dim < 1) throw InvalidArgument("random features: output_dim must be >= 1");
    if (!(gamma > 0) || !std::isfinite(static_cast<double>(gamma)))
      throw InvalidArgument("random features: gamma must be finite and > 0");

    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 * static_cast<double>(gamma)));
    Matrix freq(output_dim, input_dim);
    for (Index j = 0; j < output_dim; ++j)
      for (Index i = 0; i < input_dim; ++i) freq(j, i) = static_cast<Scalar>(normal(rng));

    constexpr double two_pi = 2.0 * std::numbers::pi;
    Vector offsets(output_dim);
    for (Index j = 0; j < output_dim; ++j) {
      // 53 random bits -> [0, 1), strictly below 2*pi after scaling
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      double b = u * two_pi;
      if (b >= two_pi) b = std::nextafter(two_pi, 0.0);
      offsets(j) = static_cast<Scalar>(b);
    }
    return RandomFeatureMap(std::move(freq), std::move(offsets), gamma, seed);
  }

  /// Reassembles a stored map. Throws on inconsistent shapes.
  RandomFeatureMap(Matrix frequencies, Vector offsets, Scalar gamma, std::uint64_t seed)
      : frequencies_(std::move(frequencies)), offsets_(std::move(offsets)),
        gamma_(gamma), seed_(seed),
        scale_(std::sqrt(Scalar(2) / static_cast<Scalar>(frequencies_.rows()))) {
    if (frequencies_.rows() < 1 || frequencies_.cols() < 1 ||
        offsets_.size() != frequencies_.rows())
      throw DimensionError("random features: inconsistent frequency/offset shapes");
    if (!(gamma_ > 0)) throw InvalidArgument("random features: gamma must be > 0");
  }

  Index input_dim() const { return frequencies_.cols(); }
  Index output_dim() const { return frequencies_.rows(); }
  Scalar gamma() const { return gamma_; }
  std::uint64_t seed() const { return seed_; }
  const Matrix& frequencies() const { return frequencies_; }
  const Vector& offsets() const { return offsets_; }

  template <typename Derived>
  Vector map(const Eigen::MatrixBase<Derived>& x) const {
    if (x.size() != input_dim())
      throw DimensionError("random features: expected input of dim " +
                           std::to_string(input_dim()) + ", got " +
                           std::to_string(x.size()));
    Vector z = frequencies_ * x.derived().template cast<Scalar>() + offsets_;
    return scale_ * z.array().cos().matrix();
  }

  /// Maps every row of `X` (n x m) to an n x M matrix.
  template <typename Derived>
  Matrix map_rows(const Eigen::MatrixBase<Derived>& X) const {
    if (X.cols() != input_dim())
      throw DimensionError("random features: expected rows of dim " +
                           std::to_string(input_dim()) + ", got " +
                           std::to_string(X.cols()));
    Matrix z = X.derived().template cast<Scalar>() * frequencies_.transpose();
    z.rowwise() += offsets_.transpose();
    return scale_ * z.array().cos().matrix();
  }

 private:
  Matrix frequencies_;  // M x m
  Vector offsets_;      // M
  Scalar gamma_;
  std::uint64_t seed_;
  Scalar scale_;
};

/// Exact Gaussian kernel value exp(-gamma * ||x - y||^2).
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar gaussian_kernel(const Eigen::MatrixBase<DerivedA>& x,
                                          const Eigen::MatrixBase<DerivedB>& y,
                                          typename DerivedA::Scalar gamma) {
  using std::exp;
  return exp(-gamma * (x - y).squaredNorm());
}

}  // namespace myo
