#include "myo/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "myo/error.hpp"
#include "myo/knn.hpp"
#include "myo/random_features.hpp"
#include "myo/rlsc.hpp"
#include "myo/rng.hpp"
#include "myo/text_format.hpp"

namespace myo::modelsel {

namespace {

constexpr double kFailedScore = -std::numeric_limits<double>::infinity();

void check_increasing(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw InvalidArgument(std::string("grid axis '") + name + "' is empty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0) || !std::isfinite(v[i]))
      throw InvalidArgument(std::string("grid axis '") + name + "' needs finite positive values");
    if (i > 0 && !(v[i] > v[i - 1]))
      throw InvalidArgument(std::string("grid axis '") + name + "' must be strictly increasing");
  }
}

void check_increasing(const std::vector<Index>& v, const char* name) {
  if (v.empty()) throw InvalidArgument(std::string("grid axis '") + name + "' is empty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 1) throw InvalidArgument(std::string("grid axis '") + name + "' needs values >= 1");
    if (i > 0 && v[i] <= v[i - 1])
      throw InvalidArgument(std::string("grid axis '") + name + "' must be strictly increasing");
  }
}

struct FoldData {
  std::vector<std::vector<Index>> folds;
  std::vector<std::vector<Index>> train;  // complement of each fold, ascending
};

FoldData make_folds(const data::LabeledSet& d, Index folds, std::uint64_t seed) {
  FoldData fd;
  fd.folds = kfold_split(d.labels, d.classes, folds, seed);
  for (const auto& f : fd.folds) {
    std::vector<char> in(static_cast<std::size_t>(d.size()), 0);
    for (Index i : f) in[static_cast<std::size_t>(i)] = 1;
    std::vector<Index> rest;
    for (Index i = 0; i < d.size(); ++i)
      if (!in[static_cast<std::size_t>(i)]) rest.push_back(i);
    fd.train.push_back(std::move(rest));
  }
  return fd;
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& X, const std::vector<Index>& idx) {
  Eigen::MatrixXd out(static_cast<Index>(idx.size()), X.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = X.row(idx[i]);
  return out;
}

std::vector<int> labels_of(const std::vector<int>& y, const std::vector<Index>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (Index i : idx) out.push_back(y[static_cast<std::size_t>(i)]);
  return out;
}

// Fold accuracies of RLSC for every lambda at one feature configuration.
// Per-fold Gram blocks are computed once; each training Gram is the sum of
// the other folds' blocks, diagonalized once so every lambda costs only a
// rescaling.
std::vector<std::vector<double>> rlsc_fold_accuracies(const Eigen::MatrixXd& features,
                                                      const data::LabeledSet& d,
                                                      const FoldData& fd,
                                                      const std::vector<double>& lambdas) {
  const Index dim = features.cols();
  const Eigen::MatrixXd Y = d.one_hot();
  const std::size_t nf = fd.folds.size();
  std::vector<Eigen::MatrixXd> gram(nf), cross(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    const Eigen::MatrixXd Pf = rows_of(features, fd.folds[f]);
    const Eigen::MatrixXd Yf = rows_of(Y, fd.folds[f]);
    gram[f] = Eigen::MatrixXd::Zero(dim, dim);
    gram[f].selfadjointView<Eigen::Lower>().rankUpdate(Pf.transpose());
    gram[f].triangularView<Eigen::StrictlyUpper>() = gram[f].transpose();
    cross[f] = Pf.transpose() * Yf;
  }

  std::vector<std::vector<double>> acc(lambdas.size(), std::vector<double>(nf, 0.0));
  for (std::size_t f = 0; f < nf; ++f) {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(dim, d.classes);
    for (std::size_t g = 0; g < nf; ++g) {
      if (g == f) continue;
      G += gram[g];
      B += cross[g];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of Gram failed");
    const Eigen::MatrixXd P = rows_of(features, fd.folds[f]) * eig.eigenvectors();
    const Eigen::MatrixXd Q = eig.eigenvectors().transpose() * B;
    const Eigen::VectorXd& s = eig.eigenvalues();
    const auto& fold = fd.folds[f];
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
      const Eigen::ArrayXd shrink = (s.array() + lambdas[l]).inverse();
      if (!shrink.allFinite() || (shrink <= 0).any())
        throw NumericalError("lambda too small for this Gram matrix");
      const Eigen::MatrixXd scores = P * (shrink.matrix().asDiagonal() * Q);
      Index correct = 0;
      for (std::size_t i = 0; i < fold.size(); ++i)
        if (argmax_lowest(scores.row(static_cast<Index>(i))) ==
            d.labels[static_cast<std::size_t>(fold[i])])
          ++correct;
      acc[l][f] = static_cast<double>(correct) / static_cast<double>(fold.size());
    }
  }
  return acc;
}

// Fold accuracies of kNN for every k; neighbour lists are computed once up
// to the largest k.
std::vector<std::vector<double>> knn_fold_accuracies(const data::LabeledSet& d,
                                                     const FoldData& fd,
                                                     const std::vector<Index>& ks) {
  const Index kmax = *std::max_element(ks.begin(), ks.end());
  const std::size_t nf = fd.folds.size();
  std::vector<std::vector<double>> acc(ks.size(), std::vector<double>(nf, 0.0));
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& train = fd.train[f];
    const auto& fold = fd.folds[f];
    if (kmax > static_cast<Index>(train.size()))
      throw InvalidArgument("k = " + std::to_string(kmax) + " exceeds the " +
                            std::to_string(train.size()) + " training samples of a fold");
    const auto train_labels = labels_of(d.labels, train);
    Knn knn(1, d.classes);
    knn.fit(rows_of(d.X, train), train_labels);
    std::vector<Index> correct(ks.size(), 0);
    std::vector<int> votes;
    for (Index i : fold) {
      const auto nn = knn.neighbours(d.X.row(i).transpose(), kmax);
      votes.clear();
      for (Index j : nn) votes.push_back(train_labels[static_cast<std::size_t>(j)]);
      for (std::size_t a = 0; a < ks.size(); ++a)
        if (majority_label(std::span<const int>(votes.data(), static_cast<std::size_t>(ks[a])),
                           d.classes) == d.labels[static_cast<std::size_t>(i)])
          ++correct[a];
    }
    for (std::size_t a = 0; a < ks.size(); ++a)
      acc[a][f] = static_cast<double>(correct[a]) / static_cast<double>(fold.size());
  }
  return acc;
}

std::vector<double> generic_fold_accuracies(const data::LabeledSet& d, const FoldData& fd,
                                            Method method, const Hyperparams& p) {
  std::vector<double> acc;
  for (std::size_t f = 0; f < fd.folds.size(); ++f) {
    auto model = make_classifier(method, p, d.X.cols(), d.classes);
    model->fit(rows_of(d.X, fd.train[f]), labels_of(d.labels, fd.train[f]));
    const auto pred = model->predict_rows(rows_of(d.X, fd.folds[f]));
    Index correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
      if (pred[i] == d.labels[static_cast<std::size_t>(fd.folds[f][i])]) ++correct;
    acc.push_back(static_cast<double>(correct) / static_cast<double>(pred.size()));
  }
  return acc;
}

CvResult failed_result(const Hyperparams& p, const std::string& why) {
  CvResult r;
  r.params = p;
  r.failed = true;
  r.error = why;
  r.mean = r.std = std::numeric_limits<double>::quiet_NaN();
  r.score = kFailedScore;
  return r;
}

}  // namespace

std::vector<double> logspace(double lo, double hi, std::size_t count) {
  if (!(lo > 0) || !(hi > lo) || count < 1)
    throw InvalidArgument("logspace needs 0 < lo < hi and count >= 1");
  if (count == 1) return {lo};
  std::vector<double> out(count);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<Index> integer_range(Index first, Index last, Index step) {
  if (step < 1 || last < first) throw InvalidArgument("integer_range: empty or invalid range");
  std::vector<Index> out;
  for (Index v = first; v <= last; v += step) out.push_back(v);
  return out;
}

Grid Grid::defaults() {
  Grid g;
  g.lambda = logspace(1e-4, 1e3, 50);
  g.gamma = logspace(5e-4, 50.0, 50);
  g.rf_dim = integer_range(10, 1000, 10);
  g.k = integer_range(1, 49);
  return g;
}

void Grid::validate(Method method) const {
  if (is_rlsc_family(method)) check_increasing(lambda, "lambda");
  if (uses_random_features(method)) {
    check_increasing(gamma, "gamma");
    check_increasing(rf_dim, "rf_dim");
  }
  if (method == Method::knn) check_increasing(k, "k");
}

std::vector<Hyperparams> Grid::points(Method method, std::uint64_t rf_seed) const {
  validate(method);
  Hyperparams base;
  base.rf_seed = rf_seed;
  std::vector<Hyperparams> out;
  if (method == Method::lda) return {base};
  if (method == Method::knn) {
    for (Index kk : k) {
      auto p = base;
      p.k = kk;
      out.push_back(p);
    }
    return out;
  }
  for (double l : lambda) {
    if (!uses_random_features(method)) {
      auto p = base;
      p.lambda = l;
      out.push_back(p);
      continue;
    }
    for (double g : gamma)
      for (Index m : rf_dim) {
        auto p = base;
        p.lambda = l;
        p.gamma = g;
        p.rf_dim = m;
        out.push_back(p);
      }
  }
  return out;
}

CvResult summarize_folds(const Hyperparams& params, std::vector<double> fold_accuracy) {
  if (fold_accuracy.empty()) throw InvalidArgument("summarize_folds: no folds");
  CvResult r;
  r.params = params;
  const double n = static_cast<double>(fold_accuracy.size());
  r.mean = std::accumulate(fold_accuracy.begin(), fold_accuracy.end(), 0.0) / n;
  double ss = 0;
  for (double a : fold_accuracy) ss += (a - r.mean) * (a - r.mean);
  r.std = std::sqrt(ss / n);
  r.score = r.mean - 2.0 * r.std;
  r.fold_accuracy = std::move(fold_accuracy);
  return r;
}

std::vector<std::vector<Index>> kfold_split(std::span<const int> labels, Index classes,
                                            Index folds, std::uint64_t seed) {
  const auto n = static_cast<Index>(labels.size());
  if (folds < 2) throw InvalidArgument("kfold_split: folds must be >= 2");
  if (n < folds)
    throw InvalidArgument("kfold_split: " + std::to_string(n) + " samples cannot fill " +
                          std::to_string(folds) + " folds");
  std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(classes));
  for (Index i = 0; i < n; ++i) {
    detail::check_label(labels[static_cast<std::size_t>(i)], classes);
    by_class[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(i);
  }
  bool stratify = true;
  for (const auto& c : by_class)
    if (!c.empty() && static_cast<Index>(c.size()) < folds) stratify = false;

  Rng rng(seed);
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(folds));
  if (!stratify) {
    warn("kfold_split: a class has fewer samples than folds; using unstratified folds");
    std::vector<Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Index{0});
    std::shuffle(all.begin(), all.end(), rng);
    for (Index i = 0; i < n; ++i)
      out[static_cast<std::size_t>(i % folds)].push_back(all[static_cast<std::size_t>(i)]);
  } else {
    // Deal each shuffled class round-robin, continuing where the previous
    // class stopped so fold sizes stay within one of each other.
    Index next = 0;
    for (auto& c : by_class) {
      std::shuffle(c.begin(), c.end(), rng);
      for (Index i : c) {
        out[static_cast<std::size_t>(next)].push_back(i);
        next = (next + 1) % folds;
      }
    }
  }
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

bool simpler_than(const Hyperparams& a, const Hyperparams& b, Method method) {
  if (uses_random_features(method) && a.rf_dim != b.rf_dim) return a.rf_dim < b.rf_dim;
  if (is_rlsc_family(method) && a.lambda != b.lambda) return a.lambda > b.lambda;
  if (method == Method::knn && a.k != b.k) return a.k < b.k;
  return false;
}

std::size_t pick_best(std::span<const CvResult> table, Method method) {
  std::size_t best = table.size();
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i].failed) continue;
    if (best == table.size() || table[i].score > table[best].score ||
        (table[i].score == table[best].score &&
         simpler_than(table[i].params, table[best].params, method)))
      best = i;
  }
  if (best == table.size()) throw NumericalError("every grid point failed");
  return best;
}

SearchResult grid_search(const data::LabeledSet& data, Method method, const Grid& grid,
                         Index folds, std::uint64_t seed, std::uint64_t rf_seed) {
  if (data.size() == 0) throw InvalidArgument("grid_search: empty data set");
  const auto points = grid.points(method, rf_seed);
  const FoldData fd = make_folds(data, folds, seed);

  SearchResult out;
  out.table.resize(points.size());
  if (is_rlsc_family(method)) {
    // Group points sharing a feature map; lambda varies fastest inside each.
    std::map<std::pair<double, Index>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto key = uses_random_features(method)
                           ? std::pair{points[i].gamma, points[i].rf_dim}
                           : std::pair{0.0, Index{0}};
      groups[key].push_back(i);
    }
    for (const auto& [key, members] : groups) {
      std::vector<double> lambdas;
      for (auto i : members) lambdas.push_back(points[i].lambda);
      try {
        Eigen::MatrixXd features = data.X;
        if (uses_random_features(method))
          features = RandomFeatureMap<double>::build(data.X.cols(), key.second, key.first, rf_seed)
                         .map_rows(data.X);
        const auto acc = rlsc_fold_accuracies(features, data, fd, lambdas);
        for (std::size_t j = 0; j < members.size(); ++j)
          out.table[members[j]] = summarize_folds(points[members[j]], acc[j]);
      } catch (const std::exception& e) {
        for (auto i : members) out.table[i] = failed_result(points[i], e.what());
      }
    }
  } else if (method == Method::knn) {
    std::vector<Index> ks;
    for (const auto& p : points) ks.push_back(p.k);
    try {
      const auto acc = knn_fold_accuracies(data, fd, ks);
      for (std::size_t i = 0; i < points.size(); ++i)
        out.table[i] = summarize_folds(points[i], acc[i]);
    } catch (const std::exception&) {
      // Retry point by point so small k values still get scored.
      for (std::size_t i = 0; i < points.size(); ++i) {
        try {
          out.table[i] = summarize_folds(points[i], knn_fold_accuracies(data, fd, {ks[i]})[0]);
        } catch (const std::exception& e2) {
          out.table[i] = failed_result(points[i], e2.what());
        }
      }
    }
  } else {
    for (std::size_t i = 0; i < points.size(); ++i) {
      try {
        out.table[i] = summarize_folds(points[i],
                                       generic_fold_accuracies(data, fd, method, points[i]));
      } catch (const std::exception& e) {
        out.table[i] = failed_result(points[i], e.what());
      }
    }
  }

  if (std::all_of(out.table.begin(), out.table.end(), [](const CvResult& r) { return r.failed; })) {
    std::string msg = "grid search failed at every grid point:";
    for (const auto& r : out.table) {
      msg += "\n  lambda=" + text::format_double(r.params.lambda) +
             " gamma=" + text::format_double(r.params.gamma) +
             " M=" + std::to_string(r.params.rf_dim) + " k=" + std::to_string(r.params.k) +
             ": " + r.error;
    }
    throw NumericalError(msg);
  }
  out.best_index = pick_best(out.table, method);
  out.best = out.table[out.best_index].params;
  return out;
}

Index pick_smallest_within_margin(std::span<const Index> dims, std::span<const double> scores,
                                  double margin) {
  if (dims.empty() || dims.size() != scores.size())
    throw InvalidArgument("pick_smallest_within_margin: need one score per dimension");
  if (!(margin >= 0)) throw InvalidArgument("margin must be >= 0");
  double best = kFailedScore;
  for (double s : scores) best = std::max(best, s);
  if (best == kFailedScore) throw NumericalError("every random-feature dimension failed");
  Index pick = -1;
  for (std::size_t i = 0; i < dims.size(); ++i)
    if (scores[i] >= best - margin && (pick < 0 || dims[i] < pick)) pick = dims[i];
  return pick;
}

RfDimensionResult select_rf_dimension(const data::LabeledSet& data,
                                      std::span<const Index> dims, double lambda,
                                      double gamma, Index folds, std::uint64_t seed,
                                      double margin, std::uint64_t rf_seed, Method method) {
  if (!uses_random_features(method))
    throw InvalidArgument("select_rf_dimension: method has no random features");
  Grid g;
  g.lambda = {lambda};
  g.gamma = {gamma};
  g.rf_dim.assign(dims.begin(), dims.end());
  auto search = grid_search(data, method, g, folds, seed, rf_seed);
  std::vector<Index> ms;
  std::vector<double> scores;
  for (const auto& r : search.table) {
    ms.push_back(r.params.rf_dim);
    scores.push_back(r.score);
  }
  return {pick_smallest_within_margin(ms, scores, margin), std::move(search.table)};
}

SearchResult select_hyperparameters(const data::LabeledSet& data, Method method,
                                    const SelectionOptions& o) {
  if (!uses_random_features(method))
    return grid_search(data, method, o.grid, o.folds, o.seed, o.rf_seed);
  o.grid.validate(method);
  const double lambda0 = o.provisional_lambda.value_or(o.grid.lambda[o.grid.lambda.size() / 2]);
  const double gamma0 = o.provisional_gamma.value_or(o.grid.gamma[o.grid.gamma.size() / 2]);
  auto stage1 = select_rf_dimension(data, o.grid.rf_dim, lambda0, gamma0, o.folds, o.seed,
                                    o.rf_margin, o.rf_seed, method);
  Grid g = o.grid;
  g.rf_dim = {stage1.rf_dim};
  auto stage2 = grid_search(data, method, g, o.folds, o.seed, o.rf_seed);
  SearchResult out;
  out.best = stage2.best;
  out.best_index = stage1.table.size() + stage2.best_index;
  out.table = std::move(stage1.table);
  out.table.insert(out.table.end(), stage2.table.begin(), stage2.table.end());
  return out;
}

std::string format_cv_table(std::span<const CvResult> table, Method method) {
  std::size_t nf = 0;
  for (const auto& r : table) nf = std::max(nf, r.fold_accuracy.size());
  std::string out = "# myoadapt-cv v1 method=" + std::string(to_string(method)) + "\n";
  out += "lambda\tgamma\trf_dim\tk";
  for (std::size_t f = 0; f < nf; ++f) out += "\tfold" + std::to_string(f + 1);
  out += "\tmean\tstd\tscore\tstatus\n";
  const bool rl = is_rlsc_family(method), rf = uses_random_features(method);
  for (const auto& r : table) {
    out += rl ? text::format_double(r.params.lambda) : "-";
    out += '\t';
    out += rf ? text::format_double(r.params.gamma) : "-";
    out += '\t';
    out += rf ? std::to_string(r.params.rf_dim) : "-";
    out += '\t';
    out += method == Method::knn ? std::to_string(r.params.k) : "-";
    for (std::size_t f = 0; f < nf; ++f) {
      out += '\t';
      out += f < r.fold_accuracy.size() ? text::format_double(r.fold_accuracy[f]) : "-";
    }
    for (double v : {r.mean, r.std, r.score}) {
      out += '\t';
      out += r.failed ? "-" : text::format_double(v);
    }
    out += '\t';
    if (r.failed) {
      std::string why = r.error;
      std::replace(why.begin(), why.end(), '\t', ' ');
      std::replace(why.begin(), why.end(), '\n', ' ');
      out += "failed: " + why;
    } else {
      out += "ok";
    }
    out += '\n';
  }
  return out;
}

}  // namespace myo::modelsel
