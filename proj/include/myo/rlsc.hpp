#pragma once

// Regularized least squares classification, one-vs-all with one-hot targets.
//
//     W = (X^T X + lambda I)^-1 X^T Y,     label(x) = argmax_j (W^T x)_j
//
// The incremental form keeps the upper Cholesky factor R of X^T X + lambda I
// and the accumulator b = X^T Y, and folds in one example at a time with a
// rank-one factor update, so after k updates W_k equals the batch solution on
// the same k examples.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include "myo/cholesky_update.hpp"
#include "myo/error.hpp"

namespace myo {

namespace detail {

inline void check_lambda(double lambda) {
  if (!(lambda > 0) || !std::isfinite(lambda))
    throw InvalidArgument("lambda must be finite and > 0");
}

inline void check_label(int label, Eigen::Index classes) {
  if (label < 0 || label >= classes)
    throw InvalidArgument("label " + std::to_string(label) + " outside [0, " +
                          std::to_string(classes) + ")");
}

}  // namespace detail

/// Index of the largest entry; ties resolve to the lowest index.
template <typename Derived>
int argmax_lowest(const Eigen::MatrixBase<Derived>& scores) {
  int best = 0;
  for (Eigen::Index j = 1; j < scores.size(); ++j)
    if (scores(j) > scores(best)) best = static_cast<int>(j);
  return best;
}

/// argmax of W^T x, lowest class id on ties.
template <typename DerivedW, typename DerivedX>
int predict_label(const Eigen::MatrixBase<DerivedW>& weights,
                  const Eigen::MatrixBase<DerivedX>& x) {
  if (x.size() != weights.rows())
    throw DimensionError("predict: feature dim " + std::to_string(x.size()) +
                         " does not match model dim " + std::to_string(weights.rows()));
  using Scalar = typename DerivedW::Scalar;
  int best = 0;
  Scalar best_score = weights.col(0).dot(x);
  for (Eigen::Index j = 1; j < weights.cols(); ++j) {
    const Scalar s = weights.col(j).dot(x);
    if (s > best_score) {
      best_score = s;
      best = static_cast<int>(j);
    }
  }
  return best;
}

template <typename Scalar = double>
struct RlscSolution {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix weights;      // d x c
  Matrix factor;       // d x d upper triangular, R^T R = X^T X + lambda I
  Matrix accumulator;  // d x c, X^T Y
  Scalar lambda{};
  std::uint64_t samples = 0;
};

/// Batch RLSC through a Cholesky factorization of X^T X + lambda I.
template <typename Scalar = double, typename DerivedX>
RlscSolution<Scalar> train_rlsc(const Eigen::MatrixBase<DerivedX>& X,
                                std::span<const int> labels, Eigen::Index classes,
                                Scalar lambda) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  detail::check_lambda(static_cast<double>(lambda));
  if (classes < 1) throw InvalidArgument("classes must be >= 1");
  if (X.rows() < 1) throw InvalidArgument("train_rlsc needs at least one sample");
  if (static_cast<Eigen::Index>(labels.size()) != X.rows())
    throw DimensionError("train_rlsc: label count does not match sample count");
  if (!X.allFinite()) throw NumericalError("train_rlsc: non-finite features");
  for (int y : labels) detail::check_label(y, classes);

  const Eigen::Index d = X.cols();
  Matrix gram = Matrix::Identity(d, d) * lambda;
  gram.template selfadjointView<Eigen::Lower>().rankUpdate(
      X.derived().template cast<Scalar>().transpose());

  Matrix acc = Matrix::Zero(d, classes);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    acc.col(labels[static_cast<std::size_t>(i)]) +=
        X.row(i).transpose().template cast<Scalar>();

  Eigen::LLT<Matrix, Eigen::Lower> llt(gram);
  if (llt.info() != Eigen::Success)
    throw NumericalError("train_rlsc: Cholesky factorization failed");

  RlscSolution<Scalar> out;
  out.weights = llt.solve(acc);
  out.factor = llt.matrixU();
  out.accumulator = std::move(acc);
  out.lambda = lambda;
  out.samples = static_cast<std::uint64_t>(X.rows());
  return out;
}

/// Exactly-incremental RLSC state (R, b, W).
///
/// Invariants: R is upper triangular with a positive diagonal,
/// R^T R = lambda I + sum_k x_k x_k^T, and W = R^-1 R^-T b whenever
/// `weights_current()` is true. A failed update leaves the state untouched.
template <typename Scalar = double>
class IncrementalRlsc {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Index = Eigen::Index;

  /// R = sqrt(lambda) I, b = 0, W = 0.
  IncrementalRlsc(Index dim, Index classes, Scalar lambda)
      : lambda_(lambda) {
    detail::check_lambda(static_cast<double>(lambda));
    if (dim < 1 || classes < 1) throw InvalidArgument("dim and classes must be >= 1");
    using std::sqrt;
    factor_ = Matrix::Identity(dim, dim) * sqrt(lambda);
    accumulator_ = Matrix::Zero(dim, classes);
    weights_ = Matrix::Zero(dim, classes);
    work_.resize(dim);
  }

  /// Continues from a batch solution; the result is as if every batch sample
  /// had been fed through update().
  static IncrementalRlsc from_solution(const RlscSolution<Scalar>& s) {
    return from_parts(s.factor, s.accumulator, s.lambda, s.samples);
  }

  /// Rebuilds a state from stored parts; validates shape and the factor
  /// invariants, then recomputes W.
  static IncrementalRlsc from_parts(Matrix factor, Matrix accumulator, Scalar lambda,
                                    std::uint64_t samples_seen) {
    if (factor.rows() != factor.cols() || factor.rows() != accumulator.rows())
      throw DimensionError("incremental RLSC: inconsistent factor/accumulator shapes");
    IncrementalRlsc st(factor.rows(), accumulator.cols(), lambda);
    if (!factor.allFinite() || !accumulator.allFinite())
      throw NumericalError("incremental RLSC: non-finite stored state");
    for (Index i = 0; i < factor.rows(); ++i) {
      if (!(factor(i, i) > 0))
        throw NumericalError("incremental RLSC: factor diagonal must be positive");
      for (Index j = 0; j < i; ++j)
        if (factor(i, j) != Scalar(0))
          throw NumericalError("incremental RLSC: factor is not upper triangular");
    }
    st.factor_ = std::move(factor);
    st.accumulator_ = std::move(accumulator);
    st.samples_seen_ = samples_seen;
    st.solve_weights();
    return st;
  }

  /// One step: b += x e_y^T, R <- CholeskyUpdate(R, x), W <- R^-1 R^-T b.
  template <typename Derived>
  void update(const Eigen::MatrixBase<Derived>& x, int label) {
    check_example(x, label);
    apply(x, label);
    solve_weights();
  }

  /// Folds in every row of X, solving for W once at the end. Validates all
  /// rows before touching the state.
  template <typename Derived>
  void update_many(const Eigen::MatrixBase<Derived>& X, std::span<const int> labels) {
    if (static_cast<Index>(labels.size()) != X.rows())
      throw DimensionError("update_many: label count does not match row count");
    for (Index i = 0; i < X.rows(); ++i)
      check_example(X.row(i), labels[static_cast<std::size_t>(i)]);
    for (Index i = 0; i < X.rows(); ++i)
      apply(X.row(i).transpose(), labels[static_cast<std::size_t>(i)]);
    if (X.rows() > 0) solve_weights();
  }

  /// W = R^-1 (R^T)^-1 b via two triangular solves.
  void solve_weights() {
    weights_ = factor_.template triangularView<Eigen::Upper>().transpose().solve(accumulator_);
    factor_.template triangularView<Eigen::Upper>().solveInPlace(weights_);
  }

  template <typename Derived>
  int predict(const Eigen::MatrixBase<Derived>& x) const {
    return predict_label(weights_, x);
  }

  Index dim() const { return factor_.rows(); }
  Index classes() const { return accumulator_.cols(); }
  Scalar lambda() const { return lambda_; }
  std::uint64_t samples_seen() const { return samples_seen_; }
  const Matrix& factor() const { return factor_; }
  const Matrix& accumulator() const { return accumulator_; }
  const Matrix& weights() const { return weights_; }

 private:
  template <typename Derived>
  void check_example(const Eigen::MatrixBase<Derived>& x, int label) const {
    if (x.size() != dim())
      throw DimensionError("incremental RLSC: expected example of dim " +
                           std::to_string(dim()) + ", got " + std::to_string(x.size()));
    detail::check_label(label, classes());
    if (!x.allFinite()) throw NumericalError("incremental RLSC: non-finite example");
  }

  template <typename Derived>
  void apply(const Eigen::MatrixBase<Derived>& x, int label) {
    work_ = x.derived().template cast<Scalar>();
    accumulator_.col(label) += work_;
    cholesky_rank_one_update(factor_, work_);
    ++samples_seen_;
  }

  Matrix factor_;
  Matrix accumulator_;
  Matrix weights_;
  Vector work_;
  Scalar lambda_;
  std::uint64_t samples_seen_ = 0;
};

}  // namespace myo
