#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace myo {

/// Gaussian-kernel PCA fitted on a (possibly subsampled) frame set.
struct KpcaModel {
  Eigen::MatrixXd train;          // fitted frames, one per row
  std::vector<Eigen::Index> kept; // their row indices in the input
  double gamma = 0;
  Eigen::VectorXd eigenvalues;    // centered-kernel eigenvalues, descending
  Eigen::MatrixXd eigenvectors;   // unit-norm, one component per column
  Eigen::MatrixXd alphas;         // eigenvectors / sqrt(eigenvalue)
  Eigen::VectorXd kernel_means;   // mean of each training kernel column
  double kernel_mean = 0;
  Eigen::MatrixXd train_coords;   // fit-time coordinates of `train`

  Eigen::Index components() const { return eigenvalues.size(); }
};

/// Gaussian kernel matrix exp(-gamma * |a_i - b_j|^2).
Eigen::MatrixXd gaussian_gram(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double gamma);

/// Fits on at most `cap` frames; larger inputs are subsampled with `seed` and
/// a warning is issued. Each component's sign is fixed so its largest-
/// magnitude eigenvector entry is positive.
KpcaModel kpca_fit(const Eigen::MatrixXd& frames, double gamma, Eigen::Index cap = 8000,
                   std::uint64_t seed = 0, Eigen::Index components = 2);

/// Coordinates of arbitrary frames in the fitted component space.
Eigen::MatrixXd kpca_project(const KpcaModel& model, const Eigen::MatrixXd& frames);

}  // namespace myo
