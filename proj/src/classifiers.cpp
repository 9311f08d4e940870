#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "myo/classifier.hpp"
#include "myo/error.hpp"
#include "myo/knn.hpp"
#include "myo/lda.hpp"
#include "myo/majority_vote.hpp"

namespace myo {

using Eigen::Index;

namespace {

void check_training_set(const Eigen::Ref<const Eigen::MatrixXd>& X,
                        std::span<const int> labels, Index classes, const char* who) {
  if (X.rows() < 1) throw InvalidArgument(std::string(who) + ": empty training set");
  if (static_cast<Index>(labels.size()) != X.rows())
    throw DimensionError(std::string(who) + ": label count does not match row count");
  if (!X.allFinite()) throw NumericalError(std::string(who) + ": non-finite features");
  for (int y : labels) detail::check_label(y, classes);
}

}  // namespace

// ---------------------------------------------------------------- kNN

Knn::Knn(Index k, Index classes) : k_(k), classes_(classes) {
  if (k < 1) throw InvalidArgument("kNN: k must be >= 1");
  if (classes < 1) throw InvalidArgument("kNN: classes must be >= 1");
}

void Knn::fit(const Eigen::Ref<const Eigen::MatrixXd>& X, std::span<const int> labels) {
  check_training_set(X, labels, classes_, "kNN");
  points_ = X.transpose();
  labels_.assign(labels.begin(), labels.end());
}

std::vector<Index> Knn::neighbours(const Eigen::Ref<const Eigen::VectorXd>& x,
                                   Index count) const {
  if (points_.cols() == 0) throw InvalidArgument("kNN: model is not fitted");
  if (x.size() != points_.rows())
    throw DimensionError("kNN: query dim " + std::to_string(x.size()) +
                         " does not match training dim " + std::to_string(points_.rows()));
  const Eigen::VectorXd dist = (points_.colwise() - x).colwise().squaredNorm().transpose();
  std::vector<Index> order(static_cast<std::size_t>(points_.cols()));
  std::iota(order.begin(), order.end(), Index{0});
  const auto take = std::min<Index>(count, points_.cols());
  std::partial_sort(order.begin(), order.begin() + take, order.end(),
                    [&](Index a, Index b) {
                      return dist(a) < dist(b) || (dist(a) == dist(b) && a < b);
                    });
  order.resize(static_cast<std::size_t>(take));
  return order;
}

int Knn::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const auto nn = neighbours(x, k_);
  std::vector<int> votes(static_cast<std::size_t>(classes_), 0);
  for (Index i : nn) ++votes[static_cast<std::size_t>(labels_[static_cast<std::size_t>(i)])];
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

int majority_label(std::span<const int> neighbour_labels, Index classes) {
  std::vector<int> votes(static_cast<std::size_t>(classes), 0);
  for (int y : neighbour_labels) {
    detail::check_label(y, classes);
    ++votes[static_cast<std::size_t>(y)];
  }
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

// ---------------------------------------------------------------- LDA

void Lda::fit(const Eigen::Ref<const Eigen::MatrixXd>& X, std::span<const int> labels) {
  check_training_set(X, labels, classes_, "LDA");
  const Index n = X.rows();
  const Index d = X.cols();

  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(d, classes_);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(classes_);
  for (Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    means.col(y) += X.row(i).transpose();
    counts(y) += 1;
  }
  Index present = 0;
  for (Index c = 0; c < classes_; ++c)
    if (counts(c) > 0) {
      means.col(c) /= counts(c);
      ++present;
    }

  Eigen::MatrixXd centered(n, d);
  for (Index i = 0; i < n; ++i)
    centered.row(i) = X.row(i) - means.col(labels[static_cast<std::size_t>(i)]).transpose();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
  cov /= static_cast<double>(std::max<Index>(n - present, 1));

  const double trace = cov.trace();
  jitter_ = trace > 0 ? 1e-6 * trace / static_cast<double>(d) : 1e-6;

  Eigen::LDLT<Eigen::MatrixXd> plain(cov);
  singular_ = plain.info() != Eigen::Success || !(plain.rcond() > 1e-12);
  if (singular_)
    warn("LDA: within-class covariance is singular; relying on ridge jitter " +
         std::to_string(jitter_));

  cov.diagonal().array() += jitter_;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw NumericalError("LDA: regularized covariance is not positive definite");

  coef_ = llt.solve(means);
  intercept_.resize(classes_);
  for (Index c = 0; c < classes_; ++c) {
    if (counts(c) > 0) {
      intercept_(c) = -0.5 * means.col(c).dot(coef_.col(c)) +
                      std::log(counts(c) / static_cast<double>(n));
    } else {
      coef_.col(c).setZero();
      intercept_(c) = -std::numeric_limits<double>::infinity();
    }
  }
}

Eigen::VectorXd Lda::scores(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (coef_.size() == 0) throw InvalidArgument("LDA: model is not fitted");
  if (x.size() != coef_.rows()) throw DimensionError("LDA: query dimension mismatch");
  return coef_.transpose() * x + intercept_;
}

int Lda::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return argmax_lowest(scores(x));
}

// ---------------------------------------------------------------- vote filter

MajorityVote::MajorityVote(std::size_t window) : window_(window), ring_(window) {
  if (window < 1) throw InvalidArgument("majority vote window must be >= 1");
}

int MajorityVote::push(int label) {
  ring_[head_] = label;
  head_ = (head_ + 1) % window_;
  filled_ = std::min(filled_ + 1, window_);

  // Count with a small linear scan; windows are short.
  int best_count = 0;
  std::vector<std::pair<int, int>> counts;  // (label, count)
  for (std::size_t i = 0; i < filled_; ++i) {
    const int y = ring_[i];
    auto it = std::find_if(counts.begin(), counts.end(), [y](auto& p) { return p.first == y; });
    if (it == counts.end())
      counts.emplace_back(y, 1);
    else
      ++it->second;
  }
  for (auto& [y, n] : counts) best_count = std::max(best_count, n);

  std::optional<int> lowest;
  bool previous_is_mode = false;
  for (auto& [y, n] : counts) {
    if (n != best_count) continue;
    if (last_ && *last_ == y) previous_is_mode = true;
    if (!lowest || y < *lowest) lowest = y;
  }
  last_ = previous_is_mode ? *last_ : *lowest;
  return *last_;
}

void MajorityVote::reset() {
  head_ = 0;
  filled_ = 0;
  last_.reset();
}

std::vector<int> MajorityVote::contents() const {
  std::vector<int> out;
  const std::size_t start = filled_ < window_ ? 0 : head_;
  for (std::size_t i = 0; i < filled_; ++i) out.push_back(ring_[(start + i) % window_]);
  return out;
}

// ---------------------------------------------------------------- methods

std::string_view to_string(Method m) {
  switch (m) {
    case Method::rlsc: return "rlsc";
    case Method::rf_rlsc: return "rf-rlsc";
    case Method::rlsc_incr: return "rlsc-incr";
    case Method::rf_rlsc_incr: return "rf-rlsc-incr";
    case Method::knn: return "knn";
    case Method::lda: return "lda";
  }
  return "?";
}

std::vector<Method> all_methods() {
  return {Method::rlsc, Method::rf_rlsc, Method::rlsc_incr,
          Method::rf_rlsc_incr, Method::knn, Method::lda};
}

Method parse_method(std::string_view s) {
  for (Method m : all_methods())
    if (to_string(m) == s) return m;
  throw InvalidArgument("unknown method '" + std::string(s) +
                        "' (expected rlsc, rf-rlsc, rlsc-incr, rf-rlsc-incr, knn or lda)");
}

bool is_incremental(Method m) { return m == Method::rlsc_incr || m == Method::rf_rlsc_incr; }

bool uses_random_features(Method m) { return m == Method::rf_rlsc || m == Method::rf_rlsc_incr; }

bool is_rlsc_family(Method m) {
  return m == Method::rlsc || m == Method::rf_rlsc || is_incremental(m);
}

std::vector<int> Classifier::predict_rows(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
  std::vector<int> out(static_cast<std::size_t>(X.rows()));
  Eigen::VectorXd row(X.cols());
  for (Index i = 0; i < X.rows(); ++i) {
    row = X.row(i).transpose();
    out[static_cast<std::size_t>(i)] = predict(row);
  }
  return out;
}

void Classifier::update(const Eigen::Ref<const Eigen::MatrixXd>&, std::span<const int>) {
  throw InvalidArgument("method '" + std::string(to_string(method())) +
                        "' does not support incremental updates");
}

// ---------------------------------------------------------------- RLSC wrapper

RlscClassifier::RlscClassifier(Method method, double lambda, Index input_dim, Index classes,
                               std::optional<RandomFeatureMap<double>> feature_map)
    : method_(method), input_dim_(input_dim), map_(std::move(feature_map)),
      state_(map_ ? map_->output_dim() : input_dim, classes, lambda) {
  if (!is_rlsc_family(method)) throw InvalidArgument("RlscClassifier: not an RLSC method");
  if (uses_random_features(method) != map_.has_value())
    throw InvalidArgument("RlscClassifier: feature map presence does not match method");
  if (map_ && map_->input_dim() != input_dim)
    throw DimensionError("RlscClassifier: feature map input dim mismatch");
}

RlscClassifier::RlscClassifier(Method method, IncrementalRlsc<double> state, Index input_dim,
                               std::optional<RandomFeatureMap<double>> feature_map)
    : method_(method), input_dim_(input_dim), map_(std::move(feature_map)),
      state_(std::move(state)) {
  if (!is_rlsc_family(method)) throw InvalidArgument("RlscClassifier: not an RLSC method");
  if (uses_random_features(method) != map_.has_value())
    throw InvalidArgument("RlscClassifier: feature map presence does not match method");
  const Index expected = map_ ? map_->output_dim() : input_dim;
  if (state_.dim() != expected || (map_ && map_->input_dim() != input_dim))
    throw DimensionError("RlscClassifier: stored state dimension mismatch");
}

Eigen::MatrixXd RlscClassifier::features(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
  if (X.cols() != input_dim_)
    throw DimensionError("RLSC: input dim " + std::to_string(X.cols()) +
                         " does not match model dim " + std::to_string(input_dim_));
  if (map_) return map_->map_rows(X);
  return X;
}

void RlscClassifier::fit(const Eigen::Ref<const Eigen::MatrixXd>& X,
                         std::span<const int> labels) {
  check_training_set(X, labels, classes(), "RLSC");
  const Eigen::MatrixXd Z = features(X);
  if (is_incremental(method_)) {
    IncrementalRlsc<double> fresh(state_.dim(), state_.classes(), state_.lambda());
    fresh.update_many(Z, labels);
    state_ = std::move(fresh);
  } else {
    state_ = IncrementalRlsc<double>::from_solution(
        train_rlsc<double>(Z, labels, state_.classes(), state_.lambda()));
  }
}

void RlscClassifier::update(const Eigen::Ref<const Eigen::MatrixXd>& X,
                            std::span<const int> labels) {
  if (!supports_update()) Classifier::update(X, labels);
  if (X.rows() == 0) return;
  state_.update_many(features(X), labels);
}

int RlscClassifier::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != input_dim_)
    throw DimensionError("RLSC: input dim " + std::to_string(x.size()) +
                         " does not match model dim " + std::to_string(input_dim_));
  if (map_) return predict_label(state_.weights(), map_->map(x));
  return predict_label(state_.weights(), x);
}

std::vector<int> RlscClassifier::predict_rows(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
  const Eigen::MatrixXd scores = features(X) * state_.weights();
  std::vector<int> out(static_cast<std::size_t>(X.rows()));
  for (Index i = 0; i < X.rows(); ++i)
    out[static_cast<std::size_t>(i)] = argmax_lowest(scores.row(i));
  return out;
}

// ---------------------------------------------------------------- kNN / LDA wrappers

namespace {

class KnnClassifier final : public Classifier {
 public:
  KnnClassifier(Index k, Index input_dim, Index classes)
      : knn_(k, classes), input_dim_(input_dim) {}
  Method method() const override { return Method::knn; }
  Index input_dim() const override { return input_dim_; }
  Index classes() const override { return knn_.classes(); }
  void fit(const Eigen::Ref<const Eigen::MatrixXd>& X, std::span<const int> labels) override {
    if (X.cols() != input_dim_) throw DimensionError("kNN: input dim mismatch");
    knn_.fit(X, labels);
  }
  int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const override {
    return knn_.predict(x);
  }

 private:
  Knn knn_;
  Index input_dim_;
};

class LdaClassifier final : public Classifier {
 public:
  LdaClassifier(Index input_dim, Index classes) : lda_(classes), input_dim_(input_dim) {}
  Method method() const override { return Method::lda; }
  Index input_dim() const override { return input_dim_; }
  Index classes() const override { return lda_.classes(); }
  void fit(const Eigen::Ref<const Eigen::MatrixXd>& X, std::span<const int> labels) override {
    if (X.cols() != input_dim_) throw DimensionError("LDA: input dim mismatch");
    lda_.fit(X, labels);
  }
  int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const override {
    return lda_.predict(x);
  }

 private:
  Lda lda_;
  Index input_dim_;
};

}  // namespace

std::unique_ptr<Classifier> make_classifier(Method method, const Hyperparams& params,
                                            Index input_dim, Index classes) {
  if (input_dim < 1 || classes < 1)
    throw InvalidArgument("make_classifier: input_dim and classes must be >= 1");
  switch (method) {
    case Method::rlsc:
    case Method::rlsc_incr:
      return std::make_unique<RlscClassifier>(method, params.lambda, input_dim, classes);
    case Method::rf_rlsc:
    case Method::rf_rlsc_incr:
      return std::make_unique<RlscClassifier>(
          method, params.lambda, input_dim, classes,
          RandomFeatureMap<double>::build(input_dim, params.rf_dim, params.gamma,
                                          params.rf_seed));
    case Method::knn:
      return std::make_unique<KnnClassifier>(params.k, input_dim, classes);
    case Method::lda:
      return std::make_unique<LdaClassifier>(input_dim, classes);
  }
  throw InvalidArgument("make_classifier: unknown method");
}

}  // namespace myo
