#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "myo/benchmark.hpp"
#include "myo/classifier.hpp"
#include "myo/dataset.hpp"
#include "myo/model_selection.hpp"

namespace myo::eval {

using Eigen::Index;

struct ProtocolOptions {
  Method method = Method::rlsc;
  /// Fixed hyperparameters; when empty they are selected by cross-validation
  /// on the first day's training split and frozen afterwards.
  std::optional<Hyperparams> params;
  modelsel::SelectionOptions selection;
  data::SplitPlan plan;
  /// Root seed; cross-validation and random-feature seeds derive from it.
  std::uint64_t seed = 0;
  /// Time every test prediction individually (slower).
  bool time_predictions = false;
};

struct DayResult {
  Index position = 0;  // 0-based place in the day order
  int day = 0;
  Index correct = 0;
  Index total = 0;
  double accuracy = 0;
  Eigen::MatrixXi confusion;  // rows: true class, cols: predicted
  /// Majority vote over each test repetition's frames.
  Index rep_correct = 0;
  Index rep_total = 0;
  double rep_accuracy = 0;
  // Session row indices per role, kept for leakage audits.
  std::vector<Index> train_rows, update_rows, test_rows;
};

struct ProtocolRun {
  int subject = 0;
  std::vector<int> order;  // day ids, first is the training day
  data::Setting setting = data::Setting::batch;
  Method method = Method::rlsc;
  Hyperparams params;
  bool selected = false;  // params came from cross-validation
  std::vector<DayResult> days;
  Eigen::MatrixXd final_weights;
  LatencyStats latency;
};

/// Hyperparameters for `options` on a training set: the fixed ones, or the
/// cross-validated choice.
Hyperparams resolve_params(const data::LabeledSet& train, const ProtocolOptions& options);

/// Sessions must be given in the order they are visited.
ProtocolRun run_protocol(std::span<const data::FrameSession> ordered_sessions,
                         data::Setting setting, const ProtocolOptions& options);
ProtocolRun run_batch_protocol(std::span<const data::FrameSession> ordered_sessions,
                               const ProtocolOptions& options);
/// Throws InvalidArgument for methods that cannot be updated.
ProtocolRun run_incremental_protocol(std::span<const data::FrameSession> ordered_sessions,
                                     const ProtocolOptions& options);

/// One run per day order. Each order lists day ids present in `sessions`.
/// Selected hyperparameters are cached per training day.
std::vector<ProtocolRun> run_permutations(std::span<const data::FrameSession> sessions,
                                          std::span<const std::vector<int>> orders,
                                          data::Setting setting, const ProtocolOptions& options);

struct DifferenceSample {
  int subject = 0;
  std::vector<int> order;
  Index position = 0;
  int day = 0;
  double difference = 0;
};

struct PositionSummary {
  Index position = 0;
  Index count = 0;
  double mean = 0, min = 0, q25 = 0, median = 0, q75 = 0, max = 0;
};

struct DifferenceDistribution {
  std::vector<DifferenceSample> samples;
  std::vector<PositionSummary> per_position;
};

/// acc(a) - acc(b), paired by (subject, day order, position). Every run must
/// have exactly one partner.
DifferenceDistribution accuracy_difference_distribution(std::span<const ProtocolRun> a,
                                                        std::span<const ProtocolRun> b);

/// One row per subject x order x day x method; header only for no runs.
std::string emit_report(std::span<const ProtocolRun> runs);
/// Mean accuracy per (method, setting, position).
std::string emit_summary(std::span<const ProtocolRun> runs);
std::string format_differences(const DifferenceDistribution& d);

}  // namespace myo::eval
