#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "myo/error.hpp"
#include "myo/knn.hpp"
#include "myo/model_selection.hpp"
#include "test_util.hpp"

using namespace myo;
using namespace myo::modelsel;
using Eigen::Index;
using Eigen::MatrixXd;

namespace {

data::LabeledSet blob_set(Index per_class, Index d, Index classes, std::uint64_t seed,
                          double spread = 0.6) {
  data::LabeledSet s;
  s.classes = classes;
  s.X = testutil::gaussian(per_class * classes, d, seed, spread);
  for (Index c = 0; c < classes; ++c)
    for (Index i = 0; i < per_class; ++i) {
      s.X(c * per_class + i, c % d) += 2.0;
      s.labels.push_back(static_cast<int>(c));
    }
  s.rows.resize(static_cast<std::size_t>(s.X.rows()));
  std::iota(s.rows.begin(), s.rows.end(), Index{0});
  return s;
}

// Classes lie on one ray at radii 1, 2, 3 plus a constant feature. A linear
// model separates them only through the constant; heavy shrinkage pushes
// the weights towards class sums, which put every sample in the outermost
// class.
data::LabeledSet ray_set(std::uint64_t seed) {
  data::LabeledSet s;
  s.classes = 3;
  const Index per = 40;
  s.X.resize(3 * per, 4);
  const MatrixXd noise = testutil::gaussian(3 * per, 3, seed, 0.08);
  for (Index c = 0; c < 3; ++c)
    for (Index i = 0; i < per; ++i) {
      const Index r = c * per + i;
      s.X(r, 0) = static_cast<double>(c + 1) + noise(r, 0);
      s.X(r, 1) = noise(r, 1);
      s.X(r, 2) = noise(r, 2);
      s.X(r, 3) = 1.0;
      s.labels.push_back(static_cast<int>(c));
    }
  s.rows.resize(static_cast<std::size_t>(s.X.rows()));
  std::iota(s.rows.begin(), s.rows.end(), Index{0});
  return s;
}

MatrixXd take(const MatrixXd& X, const std::vector<Index>& idx) {
  MatrixXd out(static_cast<Index>(idx.size()), X.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = X.row(idx[i]);
  return out;
}

std::vector<Index> complement(const std::vector<Index>& fold, Index n) {
  std::vector<Index> out;
  for (Index i = 0; i < n; ++i)
    if (!std::binary_search(fold.begin(), fold.end(), i)) out.push_back(i);
  return out;
}

}  // namespace

TEST_CASE("logspace and integer ranges") {
  const auto l = logspace(1e-4, 1e3, 50);
  REQUIRE(l.size() == 50);
  CHECK(l.front() == 1e-4);
  CHECK(l.back() == 1e3);
  for (std::size_t i = 1; i < l.size(); ++i)
    CHECK(l[i] / l[i - 1] == doctest::Approx(std::pow(1e7, 1.0 / 49.0)));
  CHECK(integer_range(10, 1000, 10).size() == 100);
  CHECK(integer_range(1, 49).back() == 49);

  const Grid g = Grid::defaults();
  CHECK(g.lambda.size() == 50);
  CHECK(g.gamma.front() == 5e-4);
  CHECK(g.gamma.back() == 50.0);
  CHECK(g.rf_dim.front() == 10);
  CHECK(g.rf_dim.back() == 1000);
  CHECK(g.k.size() == 49);
}

TEST_CASE("grid validation") {
  Grid g = Grid::defaults();
  CHECK_NOTHROW(g.validate(Method::rf_rlsc));
  g.lambda = {};
  CHECK_THROWS_AS(g.validate(Method::rlsc), InvalidArgument);
  g = Grid::defaults();
  g.lambda = {1.0, 0.5};
  CHECK_THROWS_AS(g.validate(Method::rlsc), InvalidArgument);
  g = Grid::defaults();
  g.gamma = {};
  CHECK_NOTHROW(g.validate(Method::rlsc));
  CHECK_THROWS_AS(g.validate(Method::rf_rlsc), InvalidArgument);
  CHECK(Grid::defaults().points(Method::rlsc, 0).size() == 50);
  CHECK(Grid::defaults().points(Method::knn, 0).size() == 49);
  CHECK(Grid::defaults().points(Method::lda, 0).size() == 1);
}

TEST_CASE("stratified folds: 70 samples, 7 classes, 10 folds") {
  std::vector<int> y;
  for (int c = 0; c < 7; ++c)
    for (int i = 0; i < 10; ++i) y.push_back(c);
  const auto folds = kfold_split(y, 7, 10, 3);
  REQUIRE(folds.size() == 10);
  std::set<Index> all;
  for (const auto& f : folds) {
    CHECK(f.size() == 7);
    std::set<int> classes;
    for (Index i : f) classes.insert(y[static_cast<std::size_t>(i)]);
    CHECK(classes.size() == 7);
    for (Index i : f) CHECK(all.insert(i).second);
  }
  CHECK(all.size() == 70);
  CHECK(kfold_split(y, 7, 10, 3) == folds);
  CHECK(kfold_split(y, 7, 10, 4) != folds);
}

TEST_CASE("fold partition property over random label sets") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t n = 20 + seed * 7;
    const auto y = testutil::labels(n, 4, seed);
    const Index k = 2 + static_cast<Index>(seed % 9);
    ScopedWarningCapture cap;
    const auto folds = kfold_split(y, 4, k, seed);
    REQUIRE(static_cast<Index>(folds.size()) == k);
    std::vector<int> seen(n, 0);
    std::size_t smallest = n, largest = 0;
    for (const auto& f : folds) {
      CHECK(std::is_sorted(f.begin(), f.end()));
      for (Index i : f) ++seen[static_cast<std::size_t>(i)];
      smallest = std::min(smallest, f.size());
      largest = std::max(largest, f.size());
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; }));
    CHECK(largest - smallest <= 1);
  }
}

TEST_CASE("small classes fall back to unstratified folds with a warning") {
  std::vector<int> y(30, 0);
  y[0] = 1;
  ScopedWarningCapture cap;
  const auto folds = kfold_split(y, 2, 5, 1);
  CHECK(folds.size() == 5);
  CHECK(!cap.messages().empty());
  CHECK_THROWS_AS(kfold_split(std::vector<int>(3, 0), 1, 5, 1), InvalidArgument);
  CHECK_THROWS_AS(kfold_split(y, 2, 1, 1), InvalidArgument);
}

TEST_CASE("score is mean minus two population standard deviations") {
  const auto d = blob_set(20, 5, 4, 1, 1.5);
  Grid g;
  g.lambda = logspace(1e-3, 1e2, 6);
  const auto res = grid_search(d, Method::rlsc, g, 5, 7);
  for (const auto& r : res.table) {
    REQUIRE(r.fold_accuracy.size() == 5);
    double m = 0;
    for (double a : r.fold_accuracy) m += a;
    m /= 5;
    double v = 0;
    for (double a : r.fold_accuracy) v += (a - m) * (a - m);
    const double sd = std::sqrt(v / 5);
    CHECK(r.mean == doctest::Approx(m).epsilon(1e-14));
    CHECK(r.std == doctest::Approx(sd).epsilon(1e-12));
    CHECK(r.score == doctest::Approx(m - 2 * sd).epsilon(1e-12));
    for (double a : r.fold_accuracy) CHECK((a >= 0 && a <= 1));
  }
}

TEST_CASE("RLSC fold accuracies match per-fold training from scratch") {
  const auto d = blob_set(25, 6, 4, 5, 1.4);
  Grid g;
  g.lambda = logspace(1e-2, 1e2, 5);
  const auto res = grid_search(d, Method::rlsc, g, 5, 11);
  const auto folds = kfold_split(d.labels, d.classes, 5, 11);
  for (std::size_t p = 0; p < g.lambda.size(); ++p)
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const auto train = complement(folds[f], d.size());
      std::vector<int> yt;
      for (Index i : train) yt.push_back(d.labels[static_cast<std::size_t>(i)]);
      const MatrixXd W = testutil::normal_equations(take(d.X, train), yt, 4, g.lambda[p]);
      Index correct = 0;
      for (Index i : folds[f]) {
        Eigen::VectorXd s = W.transpose() * d.X.row(i).transpose();
        Index best;
        s.maxCoeff(&best);
        correct += best == d.labels[static_cast<std::size_t>(i)];
      }
      CHECK(res.table[p].fold_accuracy[f] ==
            doctest::Approx(static_cast<double>(correct) / static_cast<double>(folds[f].size())));
    }
}

TEST_CASE("kNN fold accuracies match per-fold training from scratch") {
  const auto d = blob_set(15, 3, 3, 8, 1.5);
  Grid g;
  g.k = {1, 3, 4, 7};
  const auto res = grid_search(d, Method::knn, g, 5, 2);
  const auto folds = kfold_split(d.labels, d.classes, 5, 2);
  for (std::size_t p = 0; p < g.k.size(); ++p)
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const auto train = complement(folds[f], d.size());
      std::vector<int> yt;
      for (Index i : train) yt.push_back(d.labels[static_cast<std::size_t>(i)]);
      Knn knn(g.k[p], 3);
      knn.fit(take(d.X, train), yt);
      Index correct = 0;
      for (Index i : folds[f])
        correct += knn.predict(d.X.row(i).transpose()) == d.labels[static_cast<std::size_t>(i)];
      CHECK(res.table[p].fold_accuracy[f] ==
            doctest::Approx(static_cast<double>(correct) / static_cast<double>(folds[f].size())));
    }
}

TEST_CASE("single-point grid selects that point") {
  const auto d = blob_set(10, 4, 3, 2);
  Grid g;
  g.lambda = {0.3};
  CHECK(grid_search(d, Method::rlsc, g, 5, 1).best.lambda == 0.3);
  g.k = {5};
  CHECK(grid_search(d, Method::knn, g, 5, 1).best.k == 5);
}

TEST_CASE("tie-breaking prefers simpler models") {
  Hyperparams a, b;
  a.rf_dim = 100;
  b.rf_dim = 200;
  CHECK(simpler_than(a, b, Method::rf_rlsc));
  CHECK(!simpler_than(b, a, Method::rf_rlsc));
  a.rf_dim = b.rf_dim;
  a.lambda = 10.0;
  b.lambda = 1.0;
  CHECK(simpler_than(a, b, Method::rlsc));
  Hyperparams k1, k5;
  k1.k = 1;
  k5.k = 5;
  CHECK(simpler_than(k1, k5, Method::knn));

  std::vector<CvResult> table(3);
  table[0].params.lambda = 1.0;
  table[0].score = 0.9;
  table[1].params.lambda = 10.0;
  table[1].score = 0.9;
  table[2].params.lambda = 100.0;
  table[2].score = 0.95;
  table[2].failed = true;
  CHECK(pick_best(table, Method::rlsc) == 1);
  for (auto& r : table) r.failed = true;
  CHECK_THROWS_AS(pick_best(table, Method::rlsc), NumericalError);
}

TEST_CASE("every failing grid point is reported") {
  const auto d = blob_set(4, 3, 3, 2);
  Grid g;
  g.k = {20, 30};  // more neighbours than any fold's training set holds
  try {
    grid_search(d, Method::knn, g, 3, 1);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("k=20") != std::string::npos);
    CHECK(msg.find("k=30") != std::string::npos);
  }
}

TEST_CASE("smallest dimension within a margin of the best score") {
  std::vector<Index> dims;
  std::vector<double> scores;
  for (Index m = 10; m <= 1000; m += 10) {
    dims.push_back(m);
    scores.push_back(0.9 - 0.5 * std::exp(-static_cast<double>(m) / 80.0));
  }
  // Oracle: scan for the first dimension clearing best - margin.
  const double best = *std::max_element(scores.begin(), scores.end());
  for (double margin : {0.0, 0.001, 0.01, 0.1}) {
    Index want = -1;
    for (std::size_t i = 0; i < dims.size() && want < 0; ++i)
      if (scores[i] >= best - margin) want = dims[i];
    CHECK(pick_smallest_within_margin(dims, scores, margin) == want);
  }
  CHECK(pick_smallest_within_margin(dims, scores, 0.0) == 1000);

  const std::vector<Index> one{500};
  const std::vector<double> s{0.2};
  CHECK(pick_smallest_within_margin(one, s, 0.01) == 500);
  CHECK_THROWS_AS(pick_smallest_within_margin(one, s, -1.0), InvalidArgument);
}

TEST_CASE("random-feature dimension selection on data") {
  const auto d = blob_set(15, 4, 3, 6);
  const std::vector<Index> one{500};
  CHECK(select_rf_dimension(d, one, 0.1, 0.1, 5, 1).rf_dim == 500);
  const std::vector<Index> dims{10, 50, 200};
  const auto r = select_rf_dimension(d, dims, 0.1, 0.1, 5, 1, 0.01, 3);
  CHECK(r.table.size() == 3);
  CHECK(std::find(dims.begin(), dims.end(), r.rf_dim) != dims.end());
}

TEST_CASE("two-stage selection for random-feature methods") {
  const auto d = blob_set(12, 4, 3, 9);
  SelectionOptions o;
  o.grid.lambda = logspace(1e-3, 1e1, 3);
  o.grid.gamma = logspace(1e-2, 1.0, 3);
  o.grid.rf_dim = {20, 60};
  o.folds = 4;
  o.seed = 5;
  o.rf_seed = 6;
  const auto res = select_hyperparameters(d, Method::rf_rlsc, o);
  CHECK(res.table.size() == 2 + 9);
  CHECK(res.table[0].params.lambda == o.grid.lambda[1]);
  CHECK(res.table[0].params.gamma == o.grid.gamma[1]);
  for (std::size_t i = 2; i < res.table.size(); ++i)
    CHECK(res.table[i].params.rf_dim == res.best.rf_dim);
  CHECK(res.table[res.best_index].params == res.best);
  CHECK(res.best.rf_seed == 6);
}

TEST_CASE("grid search is a pure function of its inputs") {
  const auto d = blob_set(12, 5, 4, 3, 1.2);
  Grid g;
  g.lambda = logspace(1e-3, 1e2, 4);
  g.gamma = logspace(1e-2, 1.0, 3);
  g.rf_dim = {30, 60};
  for (Method m : {Method::rlsc, Method::rf_rlsc, Method::knn, Method::lda}) {
    g.k = {1, 3};
    const auto a = grid_search(d, m, g, 4, 9, 2);
    const auto b = grid_search(d, m, g, 4, 9, 2);
    CHECK(format_cv_table(a.table, m) == format_cv_table(b.table, m));
  }
}

TEST_CASE("cv table layout") {
  const auto d = blob_set(10, 3, 3, 4);
  Grid g;
  g.lambda = {0.1, 1.0};
  const auto res = grid_search(d, Method::rlsc, g, 3, 1);
  const std::string t = format_cv_table(res.table, Method::rlsc);
  CHECK(t.rfind("# myoadapt-cv v1", 0) == 0);
  CHECK(t.find("lambda\tgamma\trf_dim\tk\tfold1\tfold2\tfold3\tmean\tstd\tscore\tstatus") !=
        std::string::npos);
  CHECK(std::count(t.begin(), t.end(), '\n') == 4);
}

TEST_CASE("selected lambda sits strictly inside the grid") {
  const auto d = ray_set(4);
  Grid g;
  g.lambda = Grid::defaults().lambda;
  const auto res = grid_search(d, Method::rlsc, g, 10, 3);
  CHECK(res.best_index > 0);
  CHECK(res.best_index + 1 < g.lambda.size());
  // Accuracy rises to the optimum and collapses beyond it.
  CHECK(res.table.back().mean < res.table[res.best_index].mean - 0.2);
}

TEST_CASE("cross-validation does not leak the held-out fold") {
  // A canary column equal to the label makes every fold trivially separable;
  // without it the noisy blobs are hard, so accuracy must drop.
  auto d = blob_set(20, 4, 4, 12, 2.5);
  data::LabeledSet canary = d;
  canary.X.conservativeResize(Eigen::NoChange, 5);
  for (Index i = 0; i < d.size(); ++i)
    canary.X(i, 4) = 10.0 * static_cast<double>(d.labels[static_cast<std::size_t>(i)]);
  for (Method m : {Method::knn, Method::lda}) {
    Grid g;
    g.k = {1};
    const double with = grid_search(canary, m, g, 5, 1).table[0].mean;
    const double without = grid_search(d, m, g, 5, 1).table[0].mean;
    CHECK(with > 0.99);
    CHECK(without < with - 0.2);
  }
}
