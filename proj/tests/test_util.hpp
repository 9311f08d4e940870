#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

namespace testutil {

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                                double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

inline std::vector<int> labels(std::size_t n, int classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, classes - 1);
  std::vector<int> y(n);
  for (auto& v : y) v = u(rng);
  return y;
}

inline Eigen::MatrixXd one_hot(const std::vector<int>& y, Eigen::Index classes) {
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(y.size()), classes);
  for (std::size_t i = 0; i < y.size(); ++i) Y(static_cast<Eigen::Index>(i), y[i]) = 1.0;
  return Y;
}

inline double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

// Direct dense solve of (X'X + lambda I) W = X'Y through a full-pivot LU,
// deliberately unrelated to the Cholesky paths under test.
inline Eigen::MatrixXd normal_equations(const Eigen::MatrixXd& X, const std::vector<int>& y,
                                        Eigen::Index classes, double lambda) {
  const Eigen::MatrixXd A =
      X.transpose() * X + lambda * Eigen::MatrixXd::Identity(X.cols(), X.cols());
  return A.fullPivLu().solve(X.transpose() * one_hot(y, classes));
}

// Amplitude of a steady-state sinusoid: RMS * sqrt(2) over whole periods.
inline double steady_amplitude(const Eigen::VectorXd& y, Eigen::Index from) {
  const Eigen::VectorXd tail = y.tail(y.size() - from);
  return std::sqrt(tail.squaredNorm() / static_cast<double>(tail.size())) * std::sqrt(2.0);
}

inline Eigen::VectorXd sinusoid(double hz, double fs, Eigen::Index n, double phase = 0.0) {
  Eigen::VectorXd x(n);
  for (Eigen::Index t = 0; t < n; ++t)
    x(t) = std::sin(2.0 * 3.14159265358979323846 * hz * static_cast<double>(t) / fs + phase);
  return x;
}

}  // namespace testutil
