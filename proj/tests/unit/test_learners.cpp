#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "rtm/error.hpp"
#include "rtm/learners.hpp"
#include "rtm/model_io.hpp"
#include "rtm/random.hpp"

using namespace rtm;

namespace {

MatrixXd randomMatrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.gaussian();
  return m;
}

VectorXd linearTarget(Rng& rng, const MatrixXd& X, double noise) {
  VectorXd w(X.cols());
  for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = rng.uniform(-2, 2);
  VectorXd y = X * w;
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += noise * rng.gaussian();
  return y;
}

MatrixXd standardize(const MatrixXd& X) {
  MatrixXd Z = X;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double m = X.col(j).mean();
    double v = 0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) v += (X(i, j) - m) * (X(i, j) - m);
    const double s = std::sqrt(v / static_cast<double>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) Z(i, j) = (X(i, j) - m) / s;
  }
  return Z;
}

std::string serialized(const TrainedModel& m) {
  TokenWriter w;
  writeModel(w, m);
  return w.str();
}

}  // namespace

TEST_CASE("scaler inverts and centers constant columns") {
  Rng rng(1);
  MatrixXd X = randomMatrix(rng, 20, 4);
  X.col(2).setConstant(3.0);
  const Scaler s = Scaler::fit(X);
  const MatrixXd Z = s.transform(X);
  CHECK((s.inverse(Z) - X).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(Z.col(2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(std::abs(Z.col(0).mean()) < 1e-12);
  CHECK(std::sqrt(Z.col(0).squaredNorm() / 20.0) == doctest::Approx(1.0));
}

TEST_CASE("ridge on an exact line") {
  MatrixXd X(2, 1);
  X << 1, 2;
  VectorXd y(2);
  y << 2, 4;
  const auto m = trainRidge(X, y, 0.0);
  MatrixXd q(1, 1);
  q << 3;
  CHECK(m.predict(q)(0) == doctest::Approx(6.0).epsilon(1e-12));

  const auto flat = trainRidge(X, y, 1e9);
  CHECK(flat.predict(q)(0) == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("ridge matches an iterative minimizer on random problems") {
  Rng rng(2);
  for (int problem = 0; problem < 20; ++problem) {
    const MatrixXd X = randomMatrix(rng, 10, 5);
    const VectorXd y = linearTarget(rng, X, 0.3);
    const double lambda = std::pow(10.0, rng.uniform(-2, 2));
    const auto m = trainRidge(X, y, lambda);
    const VectorXd coef = std::get<RidgeModel>(m.learner).coef;
    const VectorXd ref = oracle::ridgeGradientDescent(standardize(X), y, lambda);
    CHECK((coef - ref).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("ridge predictions ignore column scaling") {
  Rng rng(3);
  const MatrixXd X = randomMatrix(rng, 30, 4);
  const VectorXd y = linearTarget(rng, X, 0.1);
  MatrixXd Xs = X;
  Xs.col(0) *= 1000.0;
  Xs.col(3) *= 0.001;
  const VectorXd a = trainRidge(X, y, 1.0).predict(X);
  const VectorXd b = trainRidge(Xs, y, 1.0).predict(Xs);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("knn neighbours and ties") {
  Rng rng(4);
  const MatrixXd X = randomMatrix(rng, 12, 3);
  const VectorXd y = linearTarget(rng, X, 0.0);
  const auto one = trainKNN(X, y, 1);
  CHECK((one.predict(X) - y).cwiseAbs().maxCoeff() == 0.0);
  const auto all = trainKNN(X, y, 12);
  const VectorXd p = all.predict(randomMatrix(rng, 5, 3));
  for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(p(i) == doctest::Approx(y.mean()));

  MatrixXd two(2, 1);
  two << 0, 2;
  VectorXd t(2);
  t << 10, 20;
  MatrixXd mid(1, 1);
  mid << 1;
  CHECK(trainKNN(two, t, 1).predict(mid)(0) == 10.0);
}

TEST_CASE("extra trees") {
  Rng rng(5);
  const MatrixXd X = randomMatrix(rng, 40, 3);
  const VectorXd c = VectorXd::Constant(40, 0.7);
  const auto flat = trainExtraTrees(X, c, ModelSpec::extraTrees(1, 20, 9));
  CHECK((flat.predict(randomMatrix(rng, 10, 3)).array() - 0.7).abs().maxCoeff() < 1e-15);

  const VectorXd y = linearTarget(rng, X, 0.2);
  const auto a = trainExtraTrees(X, y, ModelSpec::extraTrees(2, 30, 17));
  const auto b = trainExtraTrees(X, y, ModelSpec::extraTrees(2, 30, 17));
  CHECK(serialized(a) == serialized(b));
  CHECK(a.predict(X) == b.predict(X));
  const auto other = trainExtraTrees(X, y, ModelSpec::extraTrees(2, 30, 18));
  CHECK(serialized(a) != serialized(other));

  // 1-D step function
  MatrixXd S(200, 1);
  VectorXd sy(200);
  for (int i = 0; i < 200; ++i) {
    S(i, 0) = rng.uniform();
    sy(i) = (S(i, 0) > 0.5 ? 1.0 : 0.0) + 0.1 * rng.gaussian();
  }
  MatrixXd St(100, 1);
  VectorXd syt(100);
  for (int i = 0; i < 100; ++i) {
    St(i, 0) = rng.uniform();
    syt(i) = (St(i, 0) > 0.5 ? 1.0 : 0.0) + 0.1 * rng.gaussian();
  }
  const auto step = trainExtraTrees(S, sy, ModelSpec::extraTrees(3, 200, 1));
  const double mse = (step.predict(St) - syt).squaredNorm() / 100.0;
  const double var = (syt.array() - syt.mean()).square().mean();
  CHECK(mse < var);

  const auto leaves = trainExtraTrees(X, y, ModelSpec::extraTrees(5, 5, 3));
  for (const auto& tree : std::get<ExtraTreesModel>(leaves.learner).trees) {
    for (const auto& node : tree) {
      if (node.feature < 0) continue;
      // each split keeps at least minLeaf rows on both sides
      CHECK(node.left > 0);
      CHECK(node.right > 0);
    }
  }
}

TEST_CASE("adaboost") {
  MatrixXd X(6, 1);
  X << 1, 2, 3, 4, 5, 6;
  VectorXd step(6);
  step << 0, 0, 0, 1, 1, 1;
  const auto exact = trainAdaBoostR2(X, step, ModelSpec::adaBoost(10));
  const auto& ada = std::get<AdaBoostModel>(exact.learner);
  CHECK(ada.trainingMae.front() == 0.0);
  CHECK(ada.stumps.size() == 1);
  CHECK((exact.predict(X) - step).cwiseAbs().maxCoeff() == 0.0);

  const auto flat = trainAdaBoostR2(X, VectorXd::Constant(6, 2.5), ModelSpec::adaBoost(10));
  CHECK((flat.predict(X).array() - 2.5).abs().maxCoeff() == 0.0);

  Rng rng(6);
  MatrixXd L(80, 1);
  VectorXd ly(80);
  for (int i = 0; i < 80; ++i) {
    L(i, 0) = rng.uniform(0, 1);
    ly(i) = 2.0 * L(i, 0) + 0.05 * rng.gaussian();
  }
  const auto noisy = trainAdaBoostR2(L, ly, ModelSpec::adaBoost(30));
  const auto& mae = std::get<AdaBoostModel>(noisy.learner).trainingMae;
  REQUIRE(mae.size() >= 10);
  // resampling makes single rounds noisy, so check the fitted trend
  double sx = 0, sy = 0, sxy = 0, sxx = 0;
  const double k = static_cast<double>(mae.size());
  for (std::size_t i = 0; i < mae.size(); ++i) {
    const double t = static_cast<double>(i);
    sx += t;
    sy += mae[i];
    sxy += t * mae[i];
    sxx += t * t;
  }
  CHECK((k * sxy - sx * sy) / (k * sxx - sx * sx) < 0.0);
  CHECK(mae.back() < mae.front());
  const auto again = trainAdaBoostR2(L, ly, ModelSpec::adaBoost(30));
  CHECK(again.predict(L) == noisy.predict(L));
}

TEST_CASE("recursive feature elimination") {
  Rng rng(7);
  const MatrixXd X = randomMatrix(rng, 40, 6);
  const VectorXd y = linearTarget(rng, X, 0.1);
  CHECK(selectFeatures(X, y, 6) == std::vector<int>{0, 1, 2, 3, 4, 5});
  for (int j = 0; j < 6; ++j) CHECK(selectFeatures(X, X.col(j), 1) == std::vector<int>{j});
  const auto three = selectFeatures(X, y, 3);
  CHECK(three.size() == 3);
  CHECK(std::is_sorted(three.begin(), three.end()));
  CHECK(selectFeatures(X, y, 3) == three);
}

TEST_CASE("partial least squares") {
  Rng rng(8);
  MatrixXd one = randomMatrix(rng, 25, 1);
  const VectorXd y1 = 3.0 * one.col(0);
  const auto p1 = fitPLS(one, y1, 1);
  const MatrixXd t1 = p1.transform(one);
  const VectorXd z = standardize(one).col(0);
  CHECK(std::abs(std::abs(t1.col(0).normalized().dot(z.normalized())) - 1.0) < 1e-12);

  const MatrixXd X = randomMatrix(rng, 50, 5);
  const VectorXd y = linearTarget(rng, X, 0.5);
  const auto pls = fitPLS(X, y, 5);
  const MatrixXd T = pls.transform(X);
  for (Eigen::Index a = 0; a < T.cols(); ++a)
    for (Eigen::Index b = a + 1; b < T.cols(); ++b) CHECK(std::abs(T.col(a).dot(T.col(b))) < 1e-8);

  const MatrixXd Q = randomMatrix(rng, 10, 5);
  const VectorXd ols = oracle::olsPredict(X, y, Q);
  CHECK((pls.predict(Q) - ols).cwiseAbs().maxCoeff() < 1e-6);
  const auto viaRidge = train(ModelSpec::ridge(0.0).withPLS(5), X, y);
  CHECK((viaRidge.predict(Q) - ols).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("fold assignment partitions rows") {
  for (std::size_t n : {7u, 20u, 100u, 101u, 499u}) {
    CvOptions opt;
    opt.seed = n;
    const auto f = foldAssignment(n, opt);
    std::vector<int> sizes(7, 0);
    for (int x : f) {
      REQUIRE(x >= 0);
      REQUIRE(x < 7);
      ++sizes[static_cast<std::size_t>(x)];
    }
    CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
    CHECK(std::accumulate(sizes.begin(), sizes.end(), 0) == static_cast<int>(n));
    CHECK(foldAssignment(n, opt) == f);
  }
  CvOptions grouped;
  for (int i = 0; i < 30; ++i) grouped.groups.push_back(i / 2);
  const auto g = foldAssignment(30, grouped);
  for (int i = 0; i < 30; i += 2) CHECK(g[static_cast<std::size_t>(i)] == g[static_cast<std::size_t>(i + 1)]);
  CvOptions tooFew;
  CHECK_THROWS_AS(foldAssignment(1, tooFew), Error);
}

TEST_CASE("cross-validation with exact twins scores zero") {
  Rng rng(9);
  const MatrixXd base = randomMatrix(rng, 15, 3);
  const VectorXd by = linearTarget(rng, base, 0.3);
  MatrixXd X(45, 3);
  VectorXd y(45);
  for (int c = 0; c < 3; ++c) {
    X.middleRows(15 * c, 15) = base;
    y.segment(15 * c, 15) = by;
  }
  // find a seed where every row has a twin outside its own fold
  CvOptions opt;
  for (opt.seed = 0;; ++opt.seed) {
    const auto f = foldAssignment(45, opt);
    bool ok = true;
    for (int i = 0; i < 15 && ok; ++i) {
      std::set<int> folds{f[static_cast<std::size_t>(i)], f[static_cast<std::size_t>(i + 15)], f[static_cast<std::size_t>(i + 30)]};
      ok = folds.size() == 3;
    }
    if (ok) break;
  }
  const auto cv = crossValidate(ModelSpec::knn(1), X, y, opt);
  CHECK(cv.meanMAE == 0.0);
  CHECK(cv.foldScores.size() == 7);
  CHECK(crossValidate(ModelSpec::knn(1), X, y, opt).foldScores == cv.foldScores);
  for (std::size_t f = 0; f < cv.trainRows.size(); ++f)
    for (int r : cv.trainRows[f]) CHECK(cv.foldOf[static_cast<std::size_t>(r)] != static_cast<int>(f));
}

TEST_CASE("grid search ranking and top-k averaging") {
  Rng rng(10);
  const MatrixXd X = randomMatrix(rng, 60, 4);
  const VectorXd y = linearTarget(rng, X, 0.2);
  CvOptions opt;
  opt.seed = 3;

  const auto single = gridSearch({ModelSpec::ridge(1.0)}, X, y, opt);
  CHECK(single.size() == 1);

  const std::vector<ModelSpec> grid{ModelSpec::ridge(0.1), ModelSpec::knn(3), ModelSpec::ridge(1.0)};
  const auto ranked = gridSearch(grid, X, y, opt);
  CHECK(ranked.size() == 3);
  for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].cv.score <= ranked[i].cv.score);
  auto withDominated = grid;
  withDominated.push_back(ModelSpec::ridge(1e9));
  CHECK(gridSearch(withDominated, X, y, opt)[0].spec == ranked[0].spec);

  opt.jobs = 3;
  const auto parallel = gridSearch(grid, X, y, opt);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    CHECK(parallel[i].spec == ranked[i].spec);
    CHECK(parallel[i].cv.score == ranked[i].cv.score);
  }

  const std::vector<ModelSpec> twins{ModelSpec::ridge(5.0), ModelSpec::ridge(5.0).withFS(4)};
  const auto tied = gridSearch(twins, X, y, opt);
  CHECK(tied[0].spec == twins[0]);

  const MatrixXd Q = randomMatrix(rng, 8, 4);
  const VectorXd best = train(ranked[0].spec, X, y).predict(Q);
  CHECK(averageTopK(ranked, 1, X, y, Q) == best);
  const VectorXd second = train(ranked[1].spec, X, y).predict(Q);
  CHECK((averageTopK(ranked, 2, X, y, Q) - (best + second) / 2.0).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((averageTopK(tied, 2, X, y, Q) - train(twins[0], X, y).predict(Q)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(topKOutOfFold(ranked, 1) == ranked[0].cv.outOfFold);

  opt.metric = RankMetric::NegPearson;
  const auto byR = crossValidate(ModelSpec::ridge(1.0), X, y, opt);
  CHECK(byR.score < -0.5);
}

TEST_CASE("grid expansion") {
  GridConfig cfg;
  const auto full = expandGrid(cfg, 41);
  CHECK(full.size() == 14 * 6);
  CHECK(full[0] == ModelSpec::ridge(0.01));
  CHECK(full[1] == ModelSpec::ridge(0.01).withFS(8));
  std::set<std::string> seen;
  for (const auto& s : full) seen.insert(s.describe());
  CHECK(seen.size() == full.size());

  cfg.learners = {LearnerKind::Ridge};
  cfg.lambdas = {1.0};
  cfg.fsSizes = {8, 16, 41};
  cfg.plsDims = {2};
  cfg.fsPls = true;
  const auto small = expandGrid(cfg, 10);
  // none, FS(8), PLS(2), FS(8)+PLS(2)
  CHECK(small.size() == 4);
}

TEST_CASE("learner argument checks") {
  Rng rng(11);
  const MatrixXd X = randomMatrix(rng, 10, 2);
  const VectorXd y = linearTarget(rng, X, 0.1);
  CHECK_THROWS_AS(trainRidge(X, y, -1.0), Error);
  CHECK_THROWS_AS(trainRidge(X, VectorXd::Zero(9), 1.0), Error);
  MatrixXd bad = X;
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(trainRidge(bad, y, 1.0), Error);
  CHECK_THROWS_AS(trainRidge(X, y, 1.0).predict(MatrixXd::Zero(2, 3)), Error);
  CHECK_THROWS_AS(gridSearch({}, X, y, {}), Error);
}
