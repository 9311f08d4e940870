#include "myo/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "myo/error.hpp"
#include "myo/text_format.hpp"

namespace myo {

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  if (!(q >= 0 && q <= 1)) throw InvalidArgument("quantile level must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return values[rank - 1];
}

LatencyStats summarize_latency(std::vector<double> ns) {
  LatencyStats s;
  s.samples = static_cast<Eigen::Index>(ns.size());
  if (ns.empty()) return s;
  s.mean_ns = std::accumulate(ns.begin(), ns.end(), 0.0) / static_cast<double>(ns.size());
  s.median_ns = quantile(ns, 0.5);
  s.p99_ns = quantile(std::move(ns), 0.99);
  return s;
}

std::vector<BenchmarkEntry> latency_benchmark(std::span<const NamedModel> models,
                                              const Eigen::MatrixXd& frames,
                                              Eigen::Index repeats, Eigen::Index warmup) {
  if (models.empty()) throw InvalidArgument("latency benchmark needs at least one model");
  if (repeats < 1) throw InvalidArgument("latency benchmark needs repeats >= 1");
  if (warmup < 0) throw InvalidArgument("warmup passes must be >= 0");
  if (frames.rows() == 0) throw InvalidArgument("latency benchmark needs at least one frame");
  using clock = std::chrono::steady_clock;

  std::vector<BenchmarkEntry> out;
  volatile int sink = 0;
  for (const auto& m : models) {
    if (m.model == nullptr) throw InvalidArgument("latency benchmark: null model '" + m.name + "'");
    if (m.model->input_dim() != frames.cols())
      throw DimensionError("latency benchmark: model '" + m.name + "' expects dim " +
                           std::to_string(m.model->input_dim()));
    std::vector<Eigen::VectorXd> rows(static_cast<std::size_t>(frames.rows()));
    for (Eigen::Index i = 0; i < frames.rows(); ++i) rows[static_cast<std::size_t>(i)] = frames.row(i);

    for (Eigen::Index w = 0; w < warmup; ++w)
      for (const auto& x : rows) sink = sink + m.model->predict(x);

    std::vector<double> ns;
    ns.reserve(static_cast<std::size_t>(repeats) * rows.size());
    for (Eigen::Index r = 0; r < repeats; ++r)
      for (const auto& x : rows) {
        const auto t0 = clock::now();
        sink = sink + m.model->predict(x);
        const auto t1 = clock::now();
        ns.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
      }
    out.push_back({m.name, summarize_latency(std::move(ns))});
  }
  return out;
}

std::string format_benchmark(std::span<const BenchmarkEntry> entries) {
  std::string out = "# myoadapt-bench v1\nmodel\tmedian_ns\tp99_ns\tmean_ns\tsamples\n";
  for (const auto& e : entries) {
    out += e.name + '\t' + text::format_double(e.stats.median_ns) + '\t' +
           text::format_double(e.stats.p99_ns) + '\t' + text::format_double(e.stats.mean_ns) +
           '\t' + std::to_string(e.stats.samples) + '\n';
  }
  return out;
}

}  // namespace myo
