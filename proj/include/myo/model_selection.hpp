#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "myo/classifier.hpp"
#include "myo/dataset.hpp"

namespace myo::modelsel {

using Eigen::Index;

/// `count` values log-spaced over [lo, hi], both ends included.
std::vector<double> logspace(double lo, double hi, std::size_t count);
std::vector<Index> integer_range(Index first, Index last, Index step = 1);

/// Candidate values per hyperparameter. Only the axes a method uses are
/// enumerated; the others are ignored.
struct Grid {
  std::vector<double> lambda;
  std::vector<double> gamma;
  std::vector<Index> rf_dim;
  std::vector<Index> k;

  /// 50 log-spaced lambdas in [1e-4, 1e3], 50 gammas in [5e-4, 50],
  /// M in {10, 20, ..., 1000}, k in {1, ..., 49}.
  static Grid defaults();

  void validate(Method method) const;
  /// Grid points in lexicographic order (lambda, gamma, M, k).
  std::vector<Hyperparams> points(Method method, std::uint64_t rf_seed) const;
};

struct CvResult {
  Hyperparams params;
  std::vector<double> fold_accuracy;
  double mean = 0;
  double std = 0;  // population standard deviation over folds
  double score = 0;
  bool failed = false;
  std::string error;
};

/// mean - 2 * std over fold accuracies.
CvResult summarize_folds(const Hyperparams& params, std::vector<double> fold_accuracy);

struct SearchResult {
  Hyperparams best;
  std::size_t best_index = 0;
  std::vector<CvResult> table;
};

/// Stratified k-fold partition. When some class has fewer samples than
/// folds, falls back to an unstratified split and warns.
std::vector<std::vector<Index>> kfold_split(std::span<const int> labels, Index classes,
                                            Index folds, std::uint64_t seed);

/// True when `a` should be preferred over `b` at equal score:
/// smaller M, then larger lambda, then smaller k.
bool simpler_than(const Hyperparams& a, const Hyperparams& b, Method method);

/// Index of the best row: highest score, ties by complexity, then table order.
std::size_t pick_best(std::span<const CvResult> table, Method method);

/// Cross-validates every grid point. Throws NumericalError if every point
/// failed.
SearchResult grid_search(const data::LabeledSet& data, Method method, const Grid& grid,
                         Index folds, std::uint64_t seed, std::uint64_t rf_seed = 0);

/// Smallest M whose score is within `margin` of the best score.
Index pick_smallest_within_margin(std::span<const Index> dims, std::span<const double> scores,
                                  double margin);

struct RfDimensionResult {
  Index rf_dim = 0;
  std::vector<CvResult> table;
};

RfDimensionResult select_rf_dimension(const data::LabeledSet& data,
                                      std::span<const Index> dims, double lambda,
                                      double gamma, Index folds, std::uint64_t seed,
                                      double margin = 0.01, std::uint64_t rf_seed = 0,
                                      Method method = Method::rf_rlsc);

struct SelectionOptions {
  Grid grid = Grid::defaults();
  Index folds = 10;
  std::uint64_t seed = 0;
  std::uint64_t rf_seed = 0;
  double rf_margin = 0.01;
  /// (lambda, gamma) used while choosing M; defaults to the grid midpoints.
  std::optional<double> provisional_lambda;
  std::optional<double> provisional_gamma;
};

/// Full selection for one method. Random-feature methods choose M first at
/// provisional (lambda, gamma), then search (lambda, gamma) at that M; the
/// returned table holds both stages, M stage first.
SearchResult select_hyperparameters(const data::LabeledSet& data, Method method,
                                    const SelectionOptions& options);

/// Tab-separated table, one row per grid point.
std::string format_cv_table(std::span<const CvResult> table, Method method);

}  // namespace myo::modelsel
