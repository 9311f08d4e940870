#pragma once

#include <Eigen/Dense>
#include <span>

namespace myo {

/// Linear discriminant analysis with a pooled within-class covariance.
///
/// A ridge of 1e-6 * trace(S) / d is always added to the pooled covariance S;
/// when S itself is numerically singular a warning is emitted. Classes absent
/// from the training set are never predicted.
class Lda {
 public:
  explicit Lda(Eigen::Index classes = 0) : classes_(classes) {}

  void fit(const Eigen::Ref<const Eigen::MatrixXd>& X, std::span<const int> labels);
  int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd scores(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  Eigen::Index classes() const { return classes_; }
  double jitter() const { return jitter_; }
  bool covariance_was_singular() const { return singular_; }

 private:
  Eigen::Index classes_;
  Eigen::MatrixXd coef_;       // d x c
  Eigen::VectorXd intercept_;  // c
  double jitter_ = 0;
  bool singular_ = false;
};

}  // namespace myo
