#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "myo/classifier.hpp"

namespace myo {

/// Per-prediction wall time, nanoseconds.
struct LatencyStats {
  double median_ns = 0;
  double p99_ns = 0;
  double mean_ns = 0;
  Eigen::Index samples = 0;
};

/// Nearest-rank quantile of unsorted data, q in [0, 1].
double quantile(std::vector<double> values, double q);
LatencyStats summarize_latency(std::vector<double> ns);

struct NamedModel {
  std::string name;
  const Classifier* model = nullptr;
};

struct BenchmarkEntry {
  std::string name;
  LatencyStats stats;
};

/// Times single-frame predictions: `warmup` untimed passes over `frames`,
/// then `repeats` timed passes. Every model sees the same frames in the same
/// order.
std::vector<BenchmarkEntry> latency_benchmark(std::span<const NamedModel> models,
                                              const Eigen::MatrixXd& frames,
                                              Eigen::Index repeats, Eigen::Index warmup = 1);

std::string format_benchmark(std::span<const BenchmarkEntry> entries);

}  // namespace myo
