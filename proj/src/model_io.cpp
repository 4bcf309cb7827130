#include "rtm/model_io.hpp"

#include "rtm/error.hpp"
#include "rtm/text_io.hpp"

namespace rtm {

TokenWriter& TokenWriter::operator<<(const std::string& s) {
  if (!lineStart_) out_ << ' ';
  out_ << s;
  lineStart_ = false;
  return *this;
}

TokenWriter& TokenWriter::operator<<(double v) { return *this << formatExact(v); }
TokenWriter& TokenWriter::operator<<(long long v) { return *this << std::to_string(v); }

void TokenWriter::newline() {
  out_ << '\n';
  lineStart_ = true;
}

void TokenWriter::vector(const VectorXd& v) {
  *this << "vec" << static_cast<long long>(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) *this << v(i);
  newline();
}

void TokenWriter::matrix(const MatrixXd& m) {
  *this << "mat" << static_cast<long long>(m.rows()) << static_cast<long long>(m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) *this << m(i, j);
  newline();
}

std::string TokenReader::next() {
  std::string t;
  if (!(in_ >> t)) throw Error("model file truncated");
  return t;
}

void TokenReader::expect(const std::string& token) {
  const std::string t = next();
  if (t != token) throw Error("model file: expected '" + token + "', found '" + t + "'");
}

double TokenReader::nextDouble() { return parseDouble(next()); }
long long TokenReader::nextInt() { return parseInt(next()); }

VectorXd TokenReader::vector() {
  expect("vec");
  const auto n = nextInt();
  if (n < 0) throw Error("model file: negative length");
  VectorXd v(n);
  for (long long i = 0; i < n; ++i) v(i) = nextDouble();
  return v;
}

MatrixXd TokenReader::matrix() {
  expect("mat");
  const auto r = nextInt(), c = nextInt();
  if (r < 0 || c < 0) throw Error("model file: negative shape");
  MatrixXd m(r, c);
  for (long long i = 0; i < r; ++i)
    for (long long j = 0; j < c; ++j) m(i, j) = nextDouble();
  return m;
}

bool TokenReader::atEnd() {
  in_ >> std::ws;
  return in_.eof();
}

namespace {

LearnerKind parseKind(const std::string& s) {
  if (s == "RR") return LearnerKind::Ridge;
  if (s == "KNN") return LearnerKind::Knn;
  if (s == "TREE") return LearnerKind::Tree;
  if (s == "ADA") return LearnerKind::Ada;
  throw Error("unknown learner kind '" + s + "'");
}

Preprocess parsePreprocess(const std::string& s) {
  if (s == "none") return Preprocess::None;
  if (s == "FS") return Preprocess::FS;
  if (s == "PLS") return Preprocess::PLS;
  if (s == "FS+PLS") return Preprocess::FSPLS;
  throw Error("unknown preprocessing '" + s + "'");
}

void writeScaler(TokenWriter& w, const Scaler& s) {
  w << "scaler";
  w.newline();
  w.vector(s.means());
  w.vector(s.stds());
}

Scaler readScaler(TokenReader& r) {
  r.expect("scaler");
  VectorXd m = r.vector();
  VectorXd s = r.vector();
  return Scaler::fromParameters(std::move(m), std::move(s));
}

}  // namespace

void writeSpec(TokenWriter& w, const ModelSpec& s) {
  w << "spec" << toString(s.kind) << s.lambda << s.k << s.minLeaf << s.minSplit << s.nEstimators << s.learningRate
    << toString(s.preprocess) << s.fsM << s.plsD << std::to_string(s.seed);
  w.newline();
}

ModelSpec readSpec(TokenReader& r) {
  r.expect("spec");
  ModelSpec s;
  s.kind = parseKind(r.next());
  s.lambda = r.nextDouble();
  s.k = static_cast<int>(r.nextInt());
  s.minLeaf = static_cast<int>(r.nextInt());
  s.minSplit = static_cast<int>(r.nextInt());
  s.nEstimators = static_cast<int>(r.nextInt());
  s.learningRate = r.nextDouble();
  s.preprocess = parsePreprocess(r.next());
  s.fsM = static_cast<int>(r.nextInt());
  s.plsD = static_cast<int>(r.nextInt());
  s.seed = std::stoull(r.next());
  return s;
}

void writeModel(TokenWriter& w, const TrainedModel& m) {
  w << "model" << static_cast<long long>(m.arity);
  w.newline();
  writeSpec(w, m.spec);
  w << "selected" << m.selected.size();
  for (int i : m.selected) w << i;
  w.newline();
  if (m.pls) {
    w << "pls" << 1 << m.pls->yMean;
    w.newline();
    writeScaler(w, m.pls->scaler);
    w.matrix(m.pls->weights);
    w.matrix(m.pls->loadings);
    w.vector(m.pls->yLoadings);
  } else {
    w << "pls" << 0;
    w.newline();
  }
  std::visit(
      [&](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, RidgeModel>) {
          w << "learner" << "RR" << l.intercept;
          w.newline();
          writeScaler(w, l.scaler);
          w.vector(l.coef);
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          w << "learner" << "KNN" << l.k;
          w.newline();
          writeScaler(w, l.scaler);
          w.matrix(l.points);
          w.vector(l.targets);
        } else if constexpr (std::is_same_v<T, ExtraTreesModel>) {
          w << "learner" << "TREE" << l.trees.size();
          w.newline();
          for (const auto& tree : l.trees) {
            w << "tree" << tree.size();
            for (const auto& n : tree) w << n.feature << n.threshold << n.left << n.right << n.value;
            w.newline();
          }
        } else {
          w << "learner" << "ADA" << l.stumps.size();
          w.newline();
          for (std::size_t i = 0; i < l.stumps.size(); ++i) {
            const auto& s = l.stumps[i];
            w << s.feature << s.threshold << s.left << s.right << l.weights[i] << l.trainingMae[i];
            w.newline();
          }
        }
      },
      m.learner);
}

TrainedModel readModel(TokenReader& r) {
  r.expect("model");
  TrainedModel m;
  m.arity = r.nextInt();
  m.spec = readSpec(r);
  r.expect("selected");
  const auto ns = r.nextInt();
  for (long long i = 0; i < ns; ++i) m.selected.push_back(static_cast<int>(r.nextInt()));
  r.expect("pls");
  if (r.nextInt() == 1) {
    PlsProjection p;
    p.yMean = r.nextDouble();
    p.scaler = readScaler(r);
    p.weights = r.matrix();
    p.loadings = r.matrix();
    p.yLoadings = r.vector();
    m.pls = std::move(p);
  }
  r.expect("learner");
  const auto kind = parseKind(r.next());
  switch (kind) {
    case LearnerKind::Ridge: {
      RidgeModel l;
      l.intercept = r.nextDouble();
      l.scaler = readScaler(r);
      l.coef = r.vector();
      m.learner = std::move(l);
      break;
    }
    case LearnerKind::Knn: {
      KnnModel l;
      l.k = static_cast<int>(r.nextInt());
      l.scaler = readScaler(r);
      l.points = r.matrix();
      l.targets = r.vector();
      m.learner = std::move(l);
      break;
    }
    case LearnerKind::Tree: {
      ExtraTreesModel l;
      const auto nt = r.nextInt();
      for (long long t = 0; t < nt; ++t) {
        r.expect("tree");
        const auto nn = r.nextInt();
        std::vector<TreeNode> tree(static_cast<std::size_t>(nn));
        for (auto& n : tree) {
          n.feature = static_cast<int>(r.nextInt());
          n.threshold = r.nextDouble();
          n.left = static_cast<int>(r.nextInt());
          n.right = static_cast<int>(r.nextInt());
          n.value = r.nextDouble();
        }
        l.trees.push_back(std::move(tree));
      }
      m.learner = std::move(l);
      break;
    }
    case LearnerKind::Ada: {
      AdaBoostModel l;
      const auto n = r.nextInt();
      for (long long i = 0; i < n; ++i) {
        Stump s;
        s.feature = static_cast<int>(r.nextInt());
        s.threshold = r.nextDouble();
        s.left = r.nextDouble();
        s.right = r.nextDouble();
        l.stumps.push_back(s);
        l.weights.push_back(r.nextDouble());
        l.trainingMae.push_back(r.nextDouble());
      }
      m.learner = std::move(l);
      break;
    }
  }
  return m;
}

void writeEnsemble(TokenWriter& w, const Ensemble& e) {
  w << "ensemble" << e.members.size();
  w.newline();
  for (const auto& m : e.members) writeModel(w, m);
}

Ensemble readEnsemble(TokenReader& r) {
  r.expect("ensemble");
  Ensemble e;
  const auto n = r.nextInt();
  for (long long i = 0; i < n; ++i) e.members.push_back(readModel(r));
  return e;
}

}  // namespace rtm
