#include <cmath>
#include <numeric>

#include "doctest.h"
#include "rtm/error.hpp"
#include "rtm/random.hpp"
#include "rtm/stacking.hpp"

using namespace rtm;

namespace {

PairedMatrix randomPaired(Rng& rng, Eigen::Index n, Eigen::Index d) {
  PairedMatrix m;
  m.a.resize(n, d);
  m.b.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    m.ids.push_back("i" + std::to_string(i));
    for (Eigen::Index j = 0; j < d; ++j) {
      m.a(i, j) = rng.uniform();
      m.b(i, j) = rng.uniform();
    }
  }
  return m;
}

StackConfig smallConfig() {
  StackConfig cfg;
  cfg.baseGrid = {ModelSpec::ridge(0.1), ModelSpec::ridge(10.0), ModelSpec::knn(5)};
  cfg.finalGrid = {ModelSpec::ridge(1.0), ModelSpec::knn(3)};
  cfg.topK = 2;
  cfg.cv.seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("combination features") {
  const auto c = comboFeatures(0.2, 0.8);
  CHECK(c[0] == 0.2);
  CHECK(c[1] == 0.8);
  CHECK(c[2] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(c[3] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(c[4] == doctest::Approx(0.4).epsilon(1e-15));

  const auto same = comboFeatures(0.3, 0.3);
  CHECK(same[2] == 0.0);
  CHECK(same[3] == doctest::Approx(0.3));
  CHECK(same[4] == doctest::Approx(0.3));
  CHECK(comboFeatures(-0.1, 0.4)[4] == 0.0);

  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const double x = rng.uniform(-1, 1), y = rng.uniform(-1, 1);
    const auto p = comboFeatures(x, y), q = comboFeatures(y, x);
    CHECK(p[0] == q[1]);
    CHECK(p[1] == q[0]);
    for (int j = 2; j < 5; ++j) CHECK(p[static_cast<std::size_t>(j)] == q[static_cast<std::size_t>(j)]);
  }
}

TEST_CASE("combined stack arity and out-of-fold audit") {
  Rng rng(2);
  const auto m = randomPaired(rng, 60, 41);
  VectorXd gold(60);
  for (Eigen::Index i = 0; i < 60; ++i) gold(i) = std::abs(m.a(i, 0) - m.b(i, 0)) > 0.3 ? 1.0 : 0.0;
  const auto model = trainCombinedStack(m, gold, smallConfig());
  CHECK(model.finalArity == 87);
  CHECK(model.base.size() == 1);
  REQUIRE(model.audit.size() == 2);
  CHECK(model.audit[0].side == "AB");
  CHECK(model.audit[0].rows.size() == 120);
  CHECK(auditOutOfFold(model.audit));
  // both rows of an instance share a fold
  for (std::size_t i = 0; i < 120; i += 2) CHECK(model.audit[0].foldOfRow[i] == model.audit[0].foldOfRow[i + 1]);

  auto leaked = model.audit;
  leaked[0].trainRows[static_cast<std::size_t>(leaked[0].foldOfRow[0])].push_back(leaked[0].rows[0]);
  CHECK_FALSE(auditOutOfFold(leaked));

  const VectorXd p = predictStack(model, m);
  CHECK(p.size() == 60);
  CHECK(p.allFinite());
  CHECK(predictStack(trainCombinedStack(m, gold, smallConfig()), m) == p);
}

TEST_CASE("separate stack audit and specialization") {
  Rng rng(3);
  auto m = randomPaired(rng, 80, 3);
  VectorXd gold(80);
  // side A sees gold through +x, side B through -x
  for (Eigen::Index i = 0; i < 80; ++i) {
    gold(i) = rng.uniform();
    m.a(i, 0) = gold(i) + 0.01 * rng.gaussian();
    m.b(i, 0) = 1.0 - gold(i) + 0.01 * rng.gaussian();
  }
  StackConfig cfg;
  cfg.baseGrid = {ModelSpec::ridge(0.01), ModelSpec::ridge(1.0)};
  cfg.finalGrid = {ModelSpec::ridge(0.1)};
  cfg.cv.seed = 4;
  const auto sep = trainSeparateStack(m, gold, cfg);
  const auto comb = trainCombinedStack(m, gold, cfg);
  CHECK(sep.base.size() == 2);
  CHECK(sep.finalArity == 2 * 3 + 5);
  REQUIRE(sep.audit.size() == 2);
  CHECK(sep.audit[0].side == "A");
  CHECK(sep.audit[1].side == "B");
  CHECK(auditOutOfFold(sep.audit));
  for (int r : sep.audit[0].rows) CHECK(r % 2 == 0);
  for (const auto& tr : sep.audit[1].trainRows)
    for (int r : tr) CHECK(r % 2 == 1);

  const auto sepBase = predictBase(sep, m);
  const auto combBase = predictBase(comb, m);
  CHECK((sepBase.y1 - gold).cwiseAbs().mean() <= (combBase.y1 - gold).cwiseAbs().mean());
  CHECK((sepBase.y2 - gold).cwiseAbs().mean() <= (combBase.y2 - gold).cwiseAbs().mean());

  auto bad = sep.audit;
  bad[0].trainRows[0].push_back(1);
  CHECK_FALSE(auditOutOfFold(bad));
}

TEST_CASE("constant base predictions add nothing to the final model") {
  Rng rng(5);
  const auto m = randomPaired(rng, 50, 4);
  VectorXd gold(50);
  for (Eigen::Index i = 0; i < 50; ++i) gold(i) = m.a(i, 1) - m.b(i, 2) + 0.05 * rng.gaussian();
  PairedPredictions flat{VectorXd::Constant(50, 0.4), VectorXd::Constant(50, 0.7)};
  const MatrixXd F = finalMatrix(m, flat);
  MatrixXd plain(50, 8);
  plain << m.a, m.b;
  CvOptions opt;
  opt.seed = 6;
  for (const auto& spec : {ModelSpec::ridge(1.0), ModelSpec::ridge(0.01), ModelSpec::knn(3)}) {
    const double withCombo = crossValidate(spec, F, gold, opt).score;
    const double without = crossValidate(spec, plain, gold, opt).score;
    CHECK(std::abs(withCombo - without) < 1e-9);
  }
}

TEST_CASE("stack predictions are equivariant under instance order") {
  Rng rng(7);
  const auto m = randomPaired(rng, 40, 5);
  VectorXd gold(40);
  for (Eigen::Index i = 0; i < 40; ++i) gold(i) = m.a(i, 0) + m.b(i, 1);
  const auto model = trainCombinedStack(m, gold, smallConfig());
  const VectorXd p = predictStack(model, m);

  std::vector<int> perm(40);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  PairedMatrix q = m;
  for (Eigen::Index i = 0; i < 40; ++i) {
    q.a.row(i) = m.a.row(perm[static_cast<std::size_t>(i)]);
    q.b.row(i) = m.b.row(perm[static_cast<std::size_t>(i)]);
  }
  const VectorXd pq = predictStack(model, q);
  for (Eigen::Index i = 0; i < 40; ++i) CHECK(pq(i) == p(perm[static_cast<std::size_t>(i)]));
}

TEST_CASE("stack model serialization and shape errors") {
  Rng rng(8);
  const auto m = randomPaired(rng, 30, 3);
  VectorXd gold(30);
  for (Eigen::Index i = 0; i < 30; ++i) gold(i) = m.a(i, 0);
  for (bool separate : {false, true}) {
    auto model = separate ? trainSeparateStack(m, gold, smallConfig()) : trainCombinedStack(m, gold, smallConfig());
    model.resourceFingerprint = "abc123";
    TokenWriter w;
    model.write(w);
    TokenReader r(w.str());
    const auto back = StackModel::read(r);
    CHECK((back.mode == model.mode));
    CHECK(back.resourceFingerprint == "abc123");
    CHECK(predictStack(back, m) == predictStack(model, m));
  }

  PairedMatrix odd = m;
  odd.b.conservativeResize(29, 3);
  CHECK_THROWS_AS(interleaveRows(odd), Error);
  CHECK_THROWS_AS(trainCombinedStack(odd, gold, smallConfig()), Error);
  CHECK_THROWS_AS(trainCombinedStack(m, VectorXd::Zero(29), smallConfig()), Error);

  PairedDataset data;
  data.ids = {"a", "b"};
  const TextPair xy{tokenize("x"), tokenize("y")};
  data.rowA = {xy, xy};
  data.rowB = {xy};
  CHECK_THROWS_AS(data.validate(), Error);
  CHECK_THROWS_AS(parseStackMode("both"), Error);
}

TEST_CASE("linear combiner") {
  Rng rng(9);
  PairedPredictions p{VectorXd(30), VectorXd(30)};
  VectorXd gold(30);
  for (Eigen::Index i = 0; i < 30; ++i) {
    p.y1(i) = rng.uniform();
    p.y2(i) = rng.uniform();
    gold(i) = 2.0 * (p.y1(i) - p.y2(i)) + 1.0;
  }
  const auto diff = fitLinearCombiner(p, gold, CombinerMode::Difference);
  CHECK(std::abs(diff.a - 2.0) < 1e-9);
  CHECK(std::abs(diff.b - 1.0) < 1e-9);
  CHECK((diff.apply(p) - gold).cwiseAbs().maxCoeff() < 1e-9);

  PairedPredictions flat{VectorXd::Constant(30, 0.5), VectorXd::Constant(30, 0.2)};
  const auto c = fitLinearCombiner(flat, gold, CombinerMode::Mean);
  CHECK(c.a == 0.0);
  CHECK(c.b == doctest::Approx(gold.mean()).epsilon(1e-15));

  PairedPredictions r{VectorXd(50), VectorXd(50)};
  VectorXd g(50);
  for (Eigen::Index i = 0; i < 50; ++i) {
    r.y1(i) = rng.gaussian();
    r.y2(i) = rng.gaussian();
    g(i) = rng.gaussian();
  }
  const auto mean = fitLinearCombiner(r, g, CombinerMode::Mean);
  // closed form: a = (n Σxy − Σx Σy) / (n Σx² − (Σx)²)
  double sx = 0, sy = 0, sxy = 0, sxx = 0;
  for (Eigen::Index i = 0; i < 50; ++i) {
    const double x = (r.y1(i) + r.y2(i)) / 2.0;
    sx += x;
    sy += g(i);
    sxy += x * g(i);
    sxx += x * x;
  }
  const double a = (50 * sxy - sx * sy) / (50 * sxx - sx * sx);
  CHECK(std::abs(mean.a - a) < 1e-9);
  CHECK(std::abs(mean.b - (sy - a * sx) / 50) < 1e-9);
  CHECK_THROWS_AS(fitLinearCombiner(PairedPredictions{VectorXd::Zero(1), VectorXd::Zero(1)}, VectorXd::Zero(1),
                                    CombinerMode::Mean),
                  Error);
}
