#include "rtm/learners.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "rtm/error.hpp"
#include "rtm/parallel.hpp"
#include "rtm/random.hpp"

namespace rtm {

// ---------------------------------------------------------------------------
// Scaler

Scaler Scaler::fit(const MatrixXd& X) {
  if (X.rows() == 0) throw Error("Scaler: no rows");
  Scaler s;
  s.mean_ = X.colwise().mean().transpose();
  s.std_.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double var = (X.col(j).array() - s.mean_(j)).square().mean();
    const double sd = std::sqrt(var);
    s.std_(j) = sd < kMinStd ? 1.0 : sd;
  }
  return s;
}

Scaler Scaler::fromParameters(VectorXd means, VectorXd stds) {
  if (means.size() != stds.size()) throw Error("Scaler: parameter length mismatch");
  Scaler s;
  s.mean_ = std::move(means);
  s.std_ = std::move(stds);
  return s;
}

MatrixXd Scaler::transform(const MatrixXd& X) const {
  if (X.cols() != mean_.size()) throw Error("Scaler: arity mismatch");
  return (X.rowwise() - mean_.transpose()).array().rowwise() / std_.transpose().array();
}

MatrixXd Scaler::inverse(const MatrixXd& Z) const {
  if (Z.cols() != mean_.size()) throw Error("Scaler: arity mismatch");
  MatrixXd X = Z.array().rowwise() * std_.transpose().array();
  return X.rowwise() + mean_.transpose();
}

// ---------------------------------------------------------------------------
// ModelSpec

std::string toString(LearnerKind k) {
  switch (k) {
    case LearnerKind::Ridge: return "RR";
    case LearnerKind::Knn: return "KNN";
    case LearnerKind::Tree: return "TREE";
    case LearnerKind::Ada: return "ADA";
  }
  return "?";
}

std::string toString(Preprocess p) {
  switch (p) {
    case Preprocess::None: return "none";
    case Preprocess::FS: return "FS";
    case Preprocess::PLS: return "PLS";
    case Preprocess::FSPLS: return "FS+PLS";
  }
  return "?";
}

ModelSpec ModelSpec::ridge(double lambda) {
  ModelSpec s;
  s.kind = LearnerKind::Ridge;
  s.lambda = lambda;
  return s;
}

ModelSpec ModelSpec::knn(int k) {
  ModelSpec s;
  s.kind = LearnerKind::Knn;
  s.k = k;
  return s;
}

ModelSpec ModelSpec::extraTrees(int minLeaf, int nEstimators, std::uint64_t seed, int minSplit) {
  ModelSpec s;
  s.kind = LearnerKind::Tree;
  s.minLeaf = minLeaf;
  s.minSplit = minSplit;
  s.nEstimators = nEstimators;
  s.seed = seed;
  return s;
}

ModelSpec ModelSpec::adaBoost(int nEstimators, double learningRate, std::uint64_t seed) {
  ModelSpec s;
  s.kind = LearnerKind::Ada;
  s.nEstimators = nEstimators;
  s.learningRate = learningRate;
  s.seed = seed;
  return s;
}

ModelSpec ModelSpec::withFS(int m) const {
  ModelSpec s = *this;
  s.preprocess = Preprocess::FS;
  s.fsM = m;
  return s;
}

ModelSpec ModelSpec::withPLS(int d) const {
  ModelSpec s = *this;
  s.preprocess = Preprocess::PLS;
  s.plsD = d;
  return s;
}

ModelSpec ModelSpec::withFSPLS(int m, int d) const {
  ModelSpec s = *this;
  s.preprocess = Preprocess::FSPLS;
  s.fsM = m;
  s.plsD = d;
  return s;
}

std::string ModelSpec::describe() const {
  std::ostringstream out;
  out << toString(kind) << '(';
  switch (kind) {
    case LearnerKind::Ridge: out << "lambda=" << lambda; break;
    case LearnerKind::Knn: out << "k=" << k; break;
    case LearnerKind::Tree:
      out << "minLeaf=" << minLeaf << ",minSplit=" << minSplit << ",n=" << nEstimators;
      break;
    case LearnerKind::Ada: out << "n=" << nEstimators << ",rate=" << learningRate; break;
  }
  out << ')';
  if (preprocess == Preprocess::FS || preprocess == Preprocess::FSPLS) out << "+FS(" << fsM << ')';
  if (preprocess == Preprocess::PLS || preprocess == Preprocess::FSPLS) out << "+PLS(" << plsD << ')';
  return out.str();
}

// ---------------------------------------------------------------------------
// Base learners

namespace {

void checkShapes(const MatrixXd& X, const VectorXd& y, Eigen::Index minRows) {
  if (X.rows() != y.size()) throw Error("training rows and targets differ in length");
  if (X.rows() < minRows) throw Error("too few training rows: " + std::to_string(X.rows()));
  if (!X.allFinite() || !y.allFinite()) throw Error("training data contains non-finite values");
}

RidgeModel fitRidge(const MatrixXd& X, const VectorXd& y, double lambda) {
  if (lambda < 0.0) throw Error("ridge lambda must be >= 0");
  RidgeModel m;
  m.scaler = Scaler::fit(X);
  const MatrixXd Z = m.scaler.transform(X);
  m.intercept = y.mean();
  const VectorXd yc = y.array() - m.intercept;
  MatrixXd A = Z.transpose() * Z;
  A.diagonal().array() += lambda;
  const VectorXd b = Z.transpose() * yc;
  if (lambda > 0.0) {
    Eigen::LDLT<MatrixXd> ldlt(A);
    m.coef = ldlt.solve(b);
    if (ldlt.info() != Eigen::Success || !m.coef.allFinite())
      m.coef = A.completeOrthogonalDecomposition().solve(b);
  } else {
    m.coef = A.completeOrthogonalDecomposition().solve(b);
  }
  return m;
}

VectorXd predictRidge(const RidgeModel& m, const MatrixXd& X) {
  return (m.scaler.transform(X) * m.coef).array() + m.intercept;
}

VectorXd predictKnn(const KnnModel& m, const MatrixXd& X) {
  const MatrixXd Q = m.scaler.transform(X);
  const Eigen::Index n = m.points.rows();
  const auto k = static_cast<std::size_t>(std::clamp<Eigen::Index>(m.k, 1, n));
  VectorXd out(Q.rows());
  std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(n));
  for (Eigen::Index q = 0; q < Q.rows(); ++q) {
    for (Eigen::Index i = 0; i < n; ++i)
      dist[static_cast<std::size_t>(i)] = {(m.points.row(i) - Q.row(q)).squaredNorm(), i};
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += m.targets(dist[j].second);
    out(q) = sum / static_cast<double>(k);
  }
  return out;
}

// ----- extra trees

class TreeBuilder {
 public:
  TreeBuilder(const MatrixXd& X, const VectorXd& y, const ModelSpec& spec, Rng& rng)
      : X_(X), y_(y), spec_(spec), rng_(rng) {}

  std::vector<TreeNode> build() {
    std::vector<int> rows(static_cast<std::size_t>(X_.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    nodes_.clear();
    struct Task {
      int node;
      std::size_t lo, hi;
    };
    nodes_.emplace_back();
    std::vector<Task> stack{{0, 0, rows.size()}};
    while (!stack.empty()) {
      const Task t = stack.back();
      stack.pop_back();
      double sum = 0.0;
      double ymin = y_(rows[t.lo]), ymax = ymin;
      for (std::size_t i = t.lo; i < t.hi; ++i) {
        const double v = y_(rows[i]);
        sum += v;
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
      const std::size_t size = t.hi - t.lo;
      nodes_[static_cast<std::size_t>(t.node)].value = sum / static_cast<double>(size);
      if (size < static_cast<std::size_t>(std::max(spec_.minSplit, 2)) ||
          size < 2 * static_cast<std::size_t>(std::max(spec_.minLeaf, 1)) || ymin == ymax)
        continue;
      int feature;
      double cut;
      if (!chooseSplit(rows, t.lo, t.hi, feature, cut)) continue;
      const auto mid = static_cast<std::size_t>(
          std::partition(rows.begin() + static_cast<std::ptrdiff_t>(t.lo), rows.begin() + static_cast<std::ptrdiff_t>(t.hi),
                         [&](int r) { return X_(r, feature) < cut; }) -
          rows.begin());
      const int left = static_cast<int>(nodes_.size());
      nodes_.emplace_back();
      nodes_.emplace_back();
      auto& node = nodes_[static_cast<std::size_t>(t.node)];
      node.feature = feature;
      node.threshold = cut;
      node.left = left;
      node.right = left + 1;
      stack.push_back({left + 1, mid, t.hi});
      stack.push_back({left, t.lo, mid});
    }
    return std::move(nodes_);
  }

 private:
  static constexpr int kMaxAttempts = 20;

  bool chooseSplit(const std::vector<int>& rows, std::size_t lo, std::size_t hi, int& feature, double& cut) {
    std::vector<int> candidates(static_cast<std::size_t>(X_.cols()));
    std::iota(candidates.begin(), candidates.end(), 0);
    const auto minLeaf = static_cast<std::size_t>(std::max(spec_.minLeaf, 1));
    int attempts = 0;
    while (!candidates.empty() && attempts < kMaxAttempts) {
      const auto pick = static_cast<std::size_t>(rng_.below(candidates.size()));
      const int f = candidates[pick];
      double lo_v = X_(rows[lo], f), hi_v = lo_v;
      for (std::size_t i = lo + 1; i < hi; ++i) {
        const double v = X_(rows[i], f);
        lo_v = std::min(lo_v, v);
        hi_v = std::max(hi_v, v);
      }
      if (!(hi_v > lo_v)) {
        candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
        continue;
      }
      ++attempts;
      // cut in (min, max] so both sides are nonempty under x < cut
      const double c = hi_v - rng_.uniform() * (hi_v - lo_v);
      std::size_t left = 0;
      for (std::size_t i = lo; i < hi; ++i)
        if (X_(rows[i], f) < c) ++left;
      if (left >= minLeaf && (hi - lo - left) >= minLeaf) {
        feature = f;
        cut = c;
        return true;
      }
    }
    return false;
  }

  const MatrixXd& X_;
  const VectorXd& y_;
  const ModelSpec& spec_;
  Rng& rng_;
  std::vector<TreeNode> nodes_;
};

double predictTree(const std::vector<TreeNode>& tree, const MatrixXd& X, Eigen::Index row) {
  std::size_t n = 0;
  while (tree[n].feature >= 0)
    n = static_cast<std::size_t>(X(row, tree[n].feature) < tree[n].threshold ? tree[n].left : tree[n].right);
  return tree[n].value;
}

VectorXd predictTrees(const ExtraTreesModel& m, const MatrixXd& X) {
  VectorXd out = VectorXd::Zero(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double sum = 0.0;
    for (const auto& t : m.trees) sum += predictTree(t, X, i);
    out(i) = sum / static_cast<double>(m.trees.size());
  }
  return out;
}

// ----- AdaBoost.R2

double stumpValue(const Stump& s, const MatrixXd& X, Eigen::Index row) {
  if (s.feature < 0) return s.left;
  return X(row, s.feature) < s.threshold ? s.left : s.right;
}

Stump fitStump(const MatrixXd& X, const VectorXd& y, const VectorXd& w, const std::vector<std::vector<int>>& order) {
  const double W = w.sum();
  const double S = w.dot(y);
  Stump best;
  best.left = best.right = S / W;
  double bestGain = S * S / W;
  const double tol = 1e-12 * std::max(1.0, std::abs(bestGain));
  for (Eigen::Index f = 0; f < X.cols(); ++f) {
    const auto& ord = order[static_cast<std::size_t>(f)];
    double wl = 0.0, sl = 0.0;
    for (std::size_t i = 0; i + 1 < ord.size(); ++i) {
      wl += w(ord[i]);
      sl += w(ord[i]) * y(ord[i]);
      const double a = X(ord[i], f), b = X(ord[i + 1], f);
      if (!(b > a)) continue;
      const double wr = W - wl, sr = S - sl;
      if (wl <= 0.0 || wr <= 0.0) continue;
      const double gain = sl * sl / wl + sr * sr / wr;
      if (gain > bestGain + tol) {
        bestGain = gain;
        best.feature = static_cast<int>(f);
        best.threshold = a + (b - a) / 2.0;
        best.left = sl / wl;
        best.right = sr / wr;
      }
    }
  }
  return best;
}

double weightedMedian(std::vector<std::pair<double, double>>& predWeight) {
  std::sort(predWeight.begin(), predWeight.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double total = 0.0;
  for (const auto& p : predWeight) total += p.second;
  double cum = 0.0;
  for (const auto& p : predWeight) {
    cum += p.second;
    if (cum >= 0.5 * total) return p.first;
  }
  return predWeight.back().first;
}

VectorXd predictAda(const AdaBoostModel& m, const MatrixXd& X, std::size_t rounds) {
  VectorXd out(X.rows());
  std::vector<std::pair<double, double>> pw;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    pw.clear();
    for (std::size_t s = 0; s < rounds; ++s) pw.emplace_back(stumpValue(m.stumps[s], X, i), m.weights[s]);
    out(i) = weightedMedian(pw);
  }
  return out;
}

AdaBoostModel fitAda(const MatrixXd& X, const VectorXd& y, const ModelSpec& spec) {
  if (spec.nEstimators < 1) throw Error("AdaBoost needs at least one estimator");
  if (!(spec.learningRate > 0.0)) throw Error("AdaBoost learning rate must be positive");
  const Eigen::Index n = X.rows();
  std::vector<std::vector<int>> order(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index f = 0; f < X.cols(); ++f) {
    auto& o = order[static_cast<std::size_t>(f)];
    o.resize(static_cast<std::size_t>(n));
    std::iota(o.begin(), o.end(), 0);
    std::stable_sort(o.begin(), o.end(), [&](int a, int b) { return X(a, f) < X(b, f); });
  }
  AdaBoostModel m;
  Rng rng(spec.seed);
  VectorXd w = VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  VectorXd counts(n);
  std::vector<double> cdf(static_cast<std::size_t>(n));
  auto record = [&] {
    m.trainingMae.push_back((predictAda(m, X, m.stumps.size()) - y).cwiseAbs().mean());
  };
  for (int round = 0; round < spec.nEstimators; ++round) {
    // Weighted bootstrap after the first round; round one fits the uniform
    // weights directly so a stump-fittable target is fitted exactly.
    std::partial_sum(w.data(), w.data() + n, cdf.begin());
    counts.setConstant(round == 0 ? 1.0 : 0.0);
    for (Eigen::Index k = 0; round > 0 && k < n; ++k) {
      const double u = rng.uniform() * cdf.back();
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      if (it == cdf.end()) --it;
      counts(it - cdf.begin()) += 1.0;
    }
    const Stump s = fitStump(X, y, counts, order);
    VectorXd err(n);
    for (Eigen::Index i = 0; i < n; ++i) err(i) = std::abs(stumpValue(s, X, i) - y(i));
    const double D = err.maxCoeff();
    if (D <= 0.0) {
      m.stumps.push_back(s);
      m.weights.push_back(1.0);
      record();
      break;
    }
    const VectorXd loss = 1.0 - (-err.array() / D).exp();
    const double avg = w.dot(loss);
    if (avg >= 0.5) {
      if (m.stumps.empty()) {
        m.stumps.push_back(s);
        m.weights.push_back(1.0);
        record();
      }
      break;
    }
    const double beta = avg / (1.0 - avg);
    m.stumps.push_back(s);
    m.weights.push_back(spec.learningRate * std::log(1.0 / beta));
    record();
    for (Eigen::Index i = 0; i < n; ++i) w(i) *= std::pow(beta, spec.learningRate * (1.0 - loss(i)));
    const double total = w.sum();
    if (!(total > 0.0)) break;
    w /= total;
  }
  return m;
}

double pearsonOrZero(const VectorXd& a, const VectorXd& b) {
  const VectorXd ac = a.array() - a.mean();
  const VectorXd bc = b.array() - b.mean();
  const double den = std::sqrt(ac.squaredNorm() * bc.squaredNorm());
  return den > 0.0 ? ac.dot(bc) / den : 0.0;
}

MatrixXd selectColumns(const MatrixXd& X, const std::vector<int>& cols) {
  if (cols.empty()) return X;
  MatrixXd out(X.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = X.col(cols[j]);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Feature selection and PLS

std::vector<int> selectFeatures(const MatrixXd& X, const VectorXd& y, int m, double innerLambda) {
  checkShapes(X, y, 2);
  const auto p = static_cast<int>(X.cols());
  std::vector<int> keep(static_cast<std::size_t>(p));
  std::iota(keep.begin(), keep.end(), 0);
  if (m <= 0 || m >= p) return keep;

  const Scaler scaler = Scaler::fit(X);
  const MatrixXd Z = scaler.transform(X);
  const MatrixXd G = Z.transpose() * Z;
  const VectorXd b = Z.transpose() * (y.array() - y.mean()).matrix();
  while (static_cast<int>(keep.size()) > m) {
    const auto k = static_cast<Eigen::Index>(keep.size());
    MatrixXd A(k, k);
    VectorXd bk(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      bk(i) = b(keep[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < k; ++j) A(i, j) = G(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
    }
    A.diagonal().array() += innerLambda;
    const VectorXd w = innerLambda > 0.0 ? VectorXd(A.ldlt().solve(bk)) : VectorXd(A.completeOrthogonalDecomposition().solve(bk));
    Eigen::Index drop = 0;
    for (Eigen::Index i = 1; i < k; ++i)
      if (std::abs(w(i)) <= std::abs(w(drop))) drop = i;
    keep.erase(keep.begin() + drop);
  }
  return keep;
}

PlsProjection fitPLS(const MatrixXd& X, const VectorXd& y, int d) {
  checkShapes(X, y, 2);
  if (d < 1) throw Error("PLS needs at least one component");
  PlsProjection pls;
  pls.scaler = Scaler::fit(X);
  MatrixXd E = pls.scaler.transform(X);
  pls.yMean = y.mean();
  VectorXd f = y.array() - pls.yMean;
  const auto maxD = static_cast<int>(std::min<Eigen::Index>(d, X.cols()));
  std::vector<VectorXd> ws, ps;
  std::vector<double> qs;
  for (int a = 0; a < maxD; ++a) {
    VectorXd w = E.transpose() * f;
    const double norm = w.norm();
    if (norm < 1e-12) break;
    w /= norm;
    const VectorXd t = E * w;
    const double tt = t.squaredNorm();
    if (tt < 1e-24) break;
    const VectorXd p = E.transpose() * t / tt;
    const double q = f.dot(t) / tt;
    E -= t * p.transpose();
    f -= q * t;
    ws.push_back(w);
    ps.push_back(p);
    qs.push_back(q);
  }
  if (ws.empty()) {
    // y has no linear relation to X; keep one zero component
    ws.push_back(VectorXd::Zero(X.cols()));
    ps.push_back(VectorXd::Zero(X.cols()));
    qs.push_back(0.0);
  }
  const auto k = static_cast<Eigen::Index>(ws.size());
  pls.weights.resize(X.cols(), k);
  pls.loadings.resize(X.cols(), k);
  pls.yLoadings.resize(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    pls.weights.col(a) = ws[static_cast<std::size_t>(a)];
    pls.loadings.col(a) = ps[static_cast<std::size_t>(a)];
    pls.yLoadings(a) = qs[static_cast<std::size_t>(a)];
  }
  return pls;
}

MatrixXd PlsProjection::transform(const MatrixXd& X) const {
  MatrixXd E = scaler.transform(X);
  MatrixXd T(X.rows(), weights.cols());
  for (Eigen::Index a = 0; a < weights.cols(); ++a) {
    T.col(a) = E * weights.col(a);
    E -= T.col(a) * loadings.col(a).transpose();
  }
  return T;
}

VectorXd PlsProjection::predict(const MatrixXd& X) const {
  return (transform(X) * yLoadings).array() + yMean;
}

// ---------------------------------------------------------------------------
// TrainedModel

TrainedModel train(const ModelSpec& spec, const MatrixXd& X, const VectorXd& y) {
  checkShapes(X, y, 2);
  TrainedModel model;
  model.spec = spec;
  model.arity = X.cols();
  MatrixXd M;
  const MatrixXd* input = &X;
  if (spec.preprocess == Preprocess::FS || spec.preprocess == Preprocess::FSPLS) {
    if (spec.fsM > 0 && spec.fsM < X.cols()) {
      model.selected = selectFeatures(X, y, spec.fsM);
      M = selectColumns(X, model.selected);
      input = &M;
    }
  }
  if (spec.preprocess == Preprocess::PLS || spec.preprocess == Preprocess::FSPLS) {
    model.pls = fitPLS(*input, y, spec.plsD);
    M = model.pls->transform(*input);
    input = &M;
  }
  switch (spec.kind) {
    case LearnerKind::Ridge:
      model.learner = fitRidge(*input, y, spec.lambda);
      break;
    case LearnerKind::Knn: {
      if (spec.k < 1) throw Error("KNN k must be >= 1");
      KnnModel m;
      m.scaler = Scaler::fit(*input);
      m.points = m.scaler.transform(*input);
      m.targets = y;
      m.k = spec.k;
      model.learner = std::move(m);
      break;
    }
    case LearnerKind::Tree: {
      if (spec.nEstimators < 1) throw Error("extra trees need at least one estimator");
      ExtraTreesModel m;
      Rng rng(spec.seed);
      for (int t = 0; t < spec.nEstimators; ++t) m.trees.push_back(TreeBuilder(*input, y, spec, rng).build());
      model.learner = std::move(m);
      break;
    }
    case LearnerKind::Ada:
      model.learner = fitAda(*input, y, spec);
      break;
  }
  return model;
}

VectorXd TrainedModel::predict(const MatrixXd& X) const {
  if (X.cols() != arity)
    throw Error("model expects " + std::to_string(arity) + " features, got " + std::to_string(X.cols()));
  MatrixXd M = selectColumns(X, selected);
  if (pls) M = pls->transform(M);
  return std::visit(
      [&](const auto& m) -> VectorXd {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RidgeModel>) return predictRidge(m, M);
        else if constexpr (std::is_same_v<T, KnnModel>) return predictKnn(m, M);
        else if constexpr (std::is_same_v<T, ExtraTreesModel>) return predictTrees(m, M);
        else return predictAda(m, M, m.stumps.size());
      },
      learner);
}

TrainedModel trainRidge(const MatrixXd& X, const VectorXd& y, double lambda) {
  return train(ModelSpec::ridge(lambda), X, y);
}

TrainedModel trainKNN(const MatrixXd& X, const VectorXd& y, int k) { return train(ModelSpec::knn(k), X, y); }

TrainedModel trainExtraTrees(const MatrixXd& X, const VectorXd& y, const ModelSpec& spec) {
  ModelSpec s = spec;
  s.kind = LearnerKind::Tree;
  return train(s, X, y);
}

TrainedModel trainAdaBoostR2(const MatrixXd& X, const VectorXd& y, const ModelSpec& spec) {
  ModelSpec s = spec;
  s.kind = LearnerKind::Ada;
  return train(s, X, y);
}

// ---------------------------------------------------------------------------
// Cross-validation and model selection

std::vector<int> foldAssignment(std::size_t rows, const CvOptions& opt) {
  std::vector<int> groups = opt.groups;
  if (groups.empty()) {
    groups.resize(rows);
    std::iota(groups.begin(), groups.end(), 0);
  }
  if (groups.size() != rows) throw Error("group vector length differs from row count");
  std::vector<int> ids(groups.begin(), groups.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  const std::size_t g = ids.size();
  if (opt.folds < 2) throw Error("cross-validation needs at least 2 folds");
  const std::size_t folds = std::min<std::size_t>(static_cast<std::size_t>(opt.folds), g);
  if (folds < 2) throw Error("cross-validation needs at least 2 groups");

  Rng rng(opt.seed);
  rng.shuffle(ids);
  std::map<int, int> foldOfGroup;
  const std::size_t base = g / folds, extra = g % folds;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) foldOfGroup[ids[pos++]] = static_cast<int>(f);
  }
  std::vector<int> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = foldOfGroup.at(groups[r]);
  return out;
}

CvResult crossValidate(const ModelSpec& spec, const MatrixXd& X, const VectorXd& y, const CvOptions& opt) {
  checkShapes(X, y, 2);
  CvResult res;
  res.foldOf = foldAssignment(static_cast<std::size_t>(X.rows()), opt);
  const int folds = *std::max_element(res.foldOf.begin(), res.foldOf.end()) + 1;
  res.outOfFold = VectorXd::Zero(X.rows());
  for (int f = 0; f < folds; ++f) {
    std::vector<int> trainIdx, testIdx;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      (res.foldOf[static_cast<std::size_t>(i)] == f ? testIdx : trainIdx).push_back(static_cast<int>(i));
    const MatrixXd Xtr = X(trainIdx, Eigen::all);
    const VectorXd ytr = y(trainIdx);
    const TrainedModel m = train(spec, Xtr, ytr);
    const VectorXd p = m.predict(X(testIdx, Eigen::all));
    double mae = 0.0;
    for (std::size_t i = 0; i < testIdx.size(); ++i) {
      res.outOfFold(testIdx[i]) = p(static_cast<Eigen::Index>(i));
      mae += std::abs(p(static_cast<Eigen::Index>(i)) - y(testIdx[i]));
    }
    res.foldScores.push_back(mae / static_cast<double>(testIdx.size()));
    res.trainRows.push_back(std::move(trainIdx));
  }
  res.meanMAE = std::accumulate(res.foldScores.begin(), res.foldScores.end(), 0.0) /
                static_cast<double>(res.foldScores.size());
  res.score = opt.metric == RankMetric::MAE ? res.meanMAE : -pearsonOrZero(res.outOfFold, y);
  return res;
}

std::vector<RankedSpec> gridSearch(const std::vector<ModelSpec>& grid, const MatrixXd& X, const VectorXd& y,
                                   const CvOptions& opt) {
  if (grid.empty()) throw Error("gridSearch: empty grid");
  std::vector<RankedSpec> out(grid.size());
  CvOptions inner = opt;
  inner.jobs = 1;
  parallelFor(grid.size(), opt.jobs, [&](std::size_t i) { out[i] = {grid[i], crossValidate(grid[i], X, y, inner)}; });
  std::stable_sort(out.begin(), out.end(), [](const RankedSpec& a, const RankedSpec& b) { return a.cv.score < b.cv.score; });
  return out;
}

VectorXd Ensemble::predict(const MatrixXd& X) const {
  if (members.empty()) throw Error("empty ensemble");
  VectorXd sum = VectorXd::Zero(X.rows());
  for (const auto& m : members) sum += m.predict(X);
  return sum / static_cast<double>(members.size());
}

Ensemble fitTopK(const std::vector<RankedSpec>& ranked, int k, const MatrixXd& X, const VectorXd& y, int jobs) {
  if (ranked.empty()) throw Error("fitTopK: no ranked models");
  const auto count = static_cast<std::size_t>(std::clamp<int>(k, 1, static_cast<int>(ranked.size())));
  Ensemble e;
  e.members.resize(count);
  parallelFor(count, jobs, [&](std::size_t i) { e.members[i] = train(ranked[i].spec, X, y); });
  return e;
}

VectorXd topKOutOfFold(const std::vector<RankedSpec>& ranked, int k) {
  if (ranked.empty()) throw Error("topKOutOfFold: no ranked models");
  const auto count = static_cast<std::size_t>(std::clamp<int>(k, 1, static_cast<int>(ranked.size())));
  VectorXd sum = VectorXd::Zero(ranked[0].cv.outOfFold.size());
  for (std::size_t i = 0; i < count; ++i) sum += ranked[i].cv.outOfFold;
  return sum / static_cast<double>(count);
}

VectorXd averageTopK(const std::vector<RankedSpec>& ranked, int k, const MatrixXd& Xtrain, const VectorXd& y,
                     const MatrixXd& Xpredict, int jobs) {
  return fitTopK(ranked, k, Xtrain, y, jobs).predict(Xpredict);
}

std::vector<ModelSpec> expandGrid(const GridConfig& cfg, Eigen::Index arity) {
  std::vector<ModelSpec> learners;
  for (auto kind : cfg.learners) {
    switch (kind) {
      case LearnerKind::Ridge:
        for (double l : cfg.lambdas) learners.push_back(ModelSpec::ridge(l));
        break;
      case LearnerKind::Knn:
        for (int k : cfg.ks) learners.push_back(ModelSpec::knn(k));
        break;
      case LearnerKind::Tree:
        for (int leaf : cfg.minLeafs) learners.push_back(ModelSpec::extraTrees(leaf, cfg.treeEstimators, cfg.seed));
        break;
      case LearnerKind::Ada:
        learners.push_back(ModelSpec::adaBoost(cfg.adaEstimators, cfg.adaLearningRate, cfg.seed));
        break;
    }
  }
  std::vector<int> fs;
  for (int m : cfg.fsSizes)
    if (m > 0 && m < arity && std::find(fs.begin(), fs.end(), m) == fs.end()) fs.push_back(m);
  std::vector<int> pls;
  for (int d : cfg.plsDims)
    if (d > 0 && d <= arity && std::find(pls.begin(), pls.end(), d) == pls.end()) pls.push_back(d);

  std::vector<ModelSpec> grid;
  for (const auto& base : learners) {
    grid.push_back(base);
    for (int m : fs) grid.push_back(base.withFS(m));
    for (int d : pls) grid.push_back(base.withPLS(d));
    if (cfg.fsPls)
      for (int m : fs)
        for (int d : pls)
          if (d <= m) grid.push_back(base.withFSPLS(m, d));
  }
  return grid;
}

}  // namespace rtm
