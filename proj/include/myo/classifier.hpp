#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "myo/random_features.hpp"
#include "myo/rlsc.hpp"

namespace myo {

enum class Method { rlsc, rf_rlsc, rlsc_incr, rf_rlsc_incr, knn, lda };

std::string_view to_string(Method m);
/// Accepts the CLI spellings: rlsc, rf-rlsc, rlsc-incr, rf-rlsc-incr, knn, lda.
Method parse_method(std::string_view s);
std::vector<Method> all_methods();

bool is_incremental(Method m);
bool uses_random_features(Method m);
bool is_rlsc_family(Method m);

struct Hyperparams {
  double lambda = 1.0;
  double gamma = 0.1;
  Eigen::Index rf_dim = 500;
  Eigen::Index k = 1;
  std::uint64_t rf_seed = 0;

  bool operator==(const Hyperparams&) const = default;
};

/// Runtime-polymorphic classifier used by the evaluation harness.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual Method method() const = 0;
  virtual Eigen::Index input_dim() const = 0;
  virtual Eigen::Index classes() const = 0;

  virtual void fit(const Eigen::Ref<const Eigen::MatrixXd>& X, std::span<const int> labels) = 0;
  virtual int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;
  virtual std::vector<int> predict_rows(const Eigen::Ref<const Eigen::MatrixXd>& X) const;

  virtual bool supports_update() const { return false; }
  /// Folds new labelled rows into the model. Throws unless supports_update().
  virtual void update(const Eigen::Ref<const Eigen::MatrixXd>& X, std::span<const int> labels);

  /// RLSC weights (feature dim x classes); empty for other methods.
  virtual Eigen::MatrixXd weights() const { return {}; }
};

/// RLSC and RF-RLSC, batch or incremental. Always carries the full
/// (R, b, W) state so a trained model can be stored and later updated.
class RlscClassifier final : public Classifier {
 public:
  RlscClassifier(Method method, double lambda, Eigen::Index input_dim, Eigen::Index classes,
                 std::optional<RandomFeatureMap<double>> feature_map = std::nullopt);
  /// Reassembles a stored model.
  RlscClassifier(Method method, IncrementalRlsc<double> state, Eigen::Index input_dim,
                 std::optional<RandomFeatureMap<double>> feature_map);

  Method method() const override { return method_; }
  Eigen::Index input_dim() const override { return input_dim_; }
  Eigen::Index classes() const override { return state_.classes(); }

  void fit(const Eigen::Ref<const Eigen::MatrixXd>& X, std::span<const int> labels) override;
  int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  std::vector<int> predict_rows(const Eigen::Ref<const Eigen::MatrixXd>& X) const override;

  bool supports_update() const override { return is_incremental(method_); }
  void update(const Eigen::Ref<const Eigen::MatrixXd>& X, std::span<const int> labels) override;

  Eigen::MatrixXd weights() const override { return state_.weights(); }
  const IncrementalRlsc<double>& state() const { return state_; }
  const std::optional<RandomFeatureMap<double>>& feature_map() const { return map_; }
  /// Input rows mapped into the space the linear model sees.
  Eigen::MatrixXd features(const Eigen::Ref<const Eigen::MatrixXd>& X) const;

 private:
  Method method_;
  Eigen::Index input_dim_;
  std::optional<RandomFeatureMap<double>> map_;
  IncrementalRlsc<double> state_;
};

std::unique_ptr<Classifier> make_classifier(Method method, const Hyperparams& params,
                                            Eigen::Index input_dim, Eigen::Index classes);

}  // namespace myo
