#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace myo {

/// Brute-force Euclidean k-nearest-neighbours with majority vote.
/// Equal distances resolve to the lower training index; equal vote counts to
/// the lowest class id.
class Knn {
 public:
  Knn() = default;
  Knn(Eigen::Index k, Eigen::Index classes);

  void fit(const Eigen::Ref<const Eigen::MatrixXd>& X, std::span<const int> labels);
  int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Indices of the `count` nearest training rows, closest first.
  std::vector<Eigen::Index> neighbours(const Eigen::Ref<const Eigen::VectorXd>& x,
                                       Eigen::Index count) const;

  Eigen::Index k() const { return k_; }
  Eigen::Index classes() const { return classes_; }
  Eigen::Index stored() const { return points_.cols(); }

 private:
  Eigen::Index k_ = 1;
  Eigen::Index classes_ = 0;
  Eigen::MatrixXd points_;  // d x n, one training sample per column
  std::vector<int> labels_;
};

/// Vote among labelled neighbours; ties go to the lowest class id.
int majority_label(std::span<const int> neighbour_labels, Eigen::Index classes);

}  // namespace myo
