#include "myo/kpca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "myo/error.hpp"
#include "myo/rng.hpp"

namespace myo {

namespace {

using Eigen::Index;

// Dense eigensolver below this size, block subspace iteration above.
constexpr Index kDenseLimit = 2000;

struct TopEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

TopEigen top_dense(const Eigen::MatrixXd& K, Index count) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
  if (eig.info() != Eigen::Success) throw NumericalError("KPCA eigendecomposition failed");
  TopEigen out;
  out.values = eig.eigenvalues().tail(count).reverse();
  out.vectors = eig.eigenvectors().rightCols(count).rowwise().reverse();
  return out;
}

// Subspace iteration with Rayleigh-Ritz on a symmetric positive
// semi-definite matrix.
TopEigen top_subspace(const Eigen::MatrixXd& K, Index count, std::uint64_t seed) {
  const Index n = K.rows();
  const Index block = std::min<Index>(n, count + 8);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd Q(n, block);
  for (Index j = 0; j < block; ++j)
    for (Index i = 0; i < n; ++i) Q(i, j) = normal(rng);
  Q = Eigen::HouseholderQR<Eigen::MatrixXd>(Q).householderQ() * Eigen::MatrixXd::Identity(n, block);

  for (int iter = 0; iter < 1000; ++iter) {
    const Eigen::MatrixXd Z = K * Q;
    Eigen::MatrixXd H = Q.transpose() * Z;
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
    const Eigen::MatrixXd V = eig.eigenvectors().rowwise().reverse();
    const Eigen::VectorXd theta = eig.eigenvalues().reverse();
    const Eigen::MatrixXd U = Q * V;
    const Eigen::MatrixXd KU = Z * V;
    const double scale = std::max(theta(0), 1e-300);
    bool done = true;
    for (Index c = 0; c < count; ++c)
      if ((KU.col(c) - theta(c) * U.col(c)).norm() > 1e-11 * scale) done = false;
    if (done) return {theta.head(count), U.leftCols(count)};
    Q = Eigen::HouseholderQR<Eigen::MatrixXd>(KU).householderQ() *
        Eigen::MatrixXd::Identity(n, block);
  }
  throw NumericalError("KPCA subspace iteration did not converge");
}

}  // namespace

Eigen::MatrixXd gaussian_gram(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double gamma) {
  if (A.cols() != B.cols()) throw DimensionError("gaussian_gram: column mismatch");
  const Eigen::VectorXd a2 = A.rowwise().squaredNorm();
  const Eigen::VectorXd b2 = B.rowwise().squaredNorm();
  Eigen::MatrixXd D = -2.0 * (A * B.transpose());
  D.colwise() += a2;
  D.rowwise() += b2.transpose();
  return (-gamma * D.array().max(0.0)).exp().matrix();
}

KpcaModel kpca_fit(const Eigen::MatrixXd& frames, double gamma, Index cap, std::uint64_t seed,
                   Index components) {
  if (!(gamma > 0) || !std::isfinite(gamma)) throw InvalidArgument("KPCA gamma must be > 0");
  if (cap < 2) throw InvalidArgument("KPCA frame cap must be >= 2");
  if (components < 1) throw InvalidArgument("KPCA needs at least one component");
  if (frames.rows() <= components)
    throw InvalidArgument("KPCA needs more frames than components");
  if (!frames.allFinite()) throw InvalidArgument("KPCA frames must be finite");

  KpcaModel m;
  m.gamma = gamma;
  m.kept.resize(static_cast<std::size_t>(frames.rows()));
  std::iota(m.kept.begin(), m.kept.end(), Index{0});
  if (frames.rows() > cap) {
    warn("KPCA: subsampling " + std::to_string(frames.rows()) + " frames to " +
         std::to_string(cap));
    Rng rng(derive_seed(seed, "kpca-subsample"));
    std::shuffle(m.kept.begin(), m.kept.end(), rng);
    m.kept.resize(static_cast<std::size_t>(cap));
    std::sort(m.kept.begin(), m.kept.end());
  }
  m.train.resize(static_cast<Index>(m.kept.size()), frames.cols());
  for (std::size_t i = 0; i < m.kept.size(); ++i) m.train.row(static_cast<Index>(i)) = frames.row(m.kept[i]);
  if (m.train.rows() <= components)
    throw InvalidArgument("KPCA needs more frames than components");

  Eigen::MatrixXd K = gaussian_gram(m.train, m.train, gamma);
  const Index n = K.rows();
  m.kernel_means = K.colwise().mean().transpose();
  m.kernel_mean = m.kernel_means.mean();
  K.colwise() -= m.kernel_means;
  K.rowwise() -= m.kernel_means.transpose();
  K.array() += m.kernel_mean;
  K = 0.5 * (K + K.transpose()).eval();

  TopEigen top = n <= kDenseLimit ? top_dense(K, components)
                                  : top_subspace(K, components, derive_seed(seed, "kpca-iter"));
  K.resize(0, 0);

  const double floor = 1e-12 * std::max(1.0, top.values(0));
  m.eigenvalues = top.values;
  m.eigenvectors = top.vectors;
  m.alphas.resize(n, components);
  for (Index c = 0; c < components; ++c) {
    Index at = 0;
    m.eigenvectors.col(c).cwiseAbs().maxCoeff(&at);
    if (m.eigenvectors(at, c) < 0) m.eigenvectors.col(c) *= -1.0;
    if (m.eigenvalues(c) <= floor) {
      warn("KPCA: component " + std::to_string(c + 1) + " has a vanishing eigenvalue");
      m.eigenvalues(c) = std::max(m.eigenvalues(c), 0.0);
      m.alphas.col(c).setZero();
    } else {
      m.alphas.col(c) = m.eigenvectors.col(c) / std::sqrt(m.eigenvalues(c));
    }
  }
  m.train_coords = m.eigenvectors * m.eigenvalues.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  for (Index c = 0; c < components; ++c)
    if (m.alphas.col(c).isZero(0)) m.train_coords.col(c).setZero();
  return m;
}

Eigen::MatrixXd kpca_project(const KpcaModel& m, const Eigen::MatrixXd& frames) {
  if (frames.cols() != m.train.cols())
    throw DimensionError("kpca_project: frame dim " + std::to_string(frames.cols()) +
                         " does not match fitted dim " + std::to_string(m.train.cols()));
  Eigen::MatrixXd out(frames.rows(), m.components());
  constexpr Index kChunk = 1024;
  for (Index start = 0; start < frames.rows(); start += kChunk) {
    const Index len = std::min(kChunk, frames.rows() - start);
    Eigen::MatrixXd k = gaussian_gram(frames.middleRows(start, len), m.train, m.gamma);
    const Eigen::VectorXd row_means = k.rowwise().mean();
    k.colwise() -= row_means;
    k.rowwise() -= m.kernel_means.transpose();
    k.array() += m.kernel_mean;
    out.middleRows(start, len) = k * m.alphas;
  }
  return out;
}

}  // namespace myo
