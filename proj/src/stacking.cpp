#include "rtm/stacking.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rtm/error.hpp"

namespace rtm {

std::array<double, 5> comboFeatures(double y1, double y2) {
  return {y1, y2, std::abs(y1 - y2), (y1 + y2) / 2.0, std::sqrt(std::max(0.0, y1) * std::max(0.0, y2))};
}

void PairedDataset::validate() const {
  if (rowA.size() != ids.size() || rowB.size() != ids.size()) throw Error("paired dataset: odd row count");
  if (!gold.empty() && gold.size() != ids.size()) throw Error("paired dataset: gold length mismatch");
}

PairedMatrix pairedFeatures(const PairedDataset& data, const Resources& res, int jobs) {
  data.validate();
  PairedMatrix m;
  m.ids = data.ids;
  m.a = buildFeatureMatrix(data.rowA, res, jobs).values;
  m.b = buildFeatureMatrix(data.rowB, res, jobs).values;
  return m;
}

MatrixXd interleaveRows(const PairedMatrix& m) {
  if (m.a.rows() != m.b.rows() || m.a.cols() != m.b.cols()) throw Error("paired matrix: odd row count");
  MatrixXd out(2 * m.a.rows(), m.a.cols());
  for (Eigen::Index i = 0; i < m.a.rows(); ++i) {
    out.row(2 * i) = m.a.row(i);
    out.row(2 * i + 1) = m.b.row(i);
  }
  return out;
}

MatrixXd finalMatrix(const PairedMatrix& m, const PairedPredictions& p) {
  const Eigen::Index n = m.a.rows(), d = m.a.cols();
  if (m.b.rows() != n || m.b.cols() != d || p.y1.size() != n || p.y2.size() != n)
    throw Error("finalMatrix: shape mismatch");
  MatrixXd out(n, 2 * d + 5);
  out.leftCols(d) = m.a;
  out.middleCols(d, d) = m.b;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto c = comboFeatures(p.y1(i), p.y2(i));
    for (int j = 0; j < 5; ++j) out(i, 2 * d + j) = c[static_cast<std::size_t>(j)];
  }
  return out;
}

std::string toString(StackMode m) { return m == StackMode::Combined ? "combined" : "separate"; }

StackMode parseStackMode(const std::string& s) {
  if (s == "combined") return StackMode::Combined;
  if (s == "separate") return StackMode::Separate;
  throw Error("unknown stack mode '" + s + "'");
}

std::vector<CvTableRow> cvTable(const std::vector<RankedSpec>& ranked) {
  std::vector<CvTableRow> out;
  out.reserve(ranked.size());
  for (const auto& r : ranked) out.push_back({r.spec.describe(), r.cv.score, r.cv.meanMAE});
  return out;
}

bool auditOutOfFold(const std::vector<BaseAudit>& audit) {
  for (const auto& a : audit) {
    if (a.rows.size() != a.foldOfRow.size()) return false;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      const auto f = static_cast<std::size_t>(a.foldOfRow[i]);
      if (f >= a.trainRows.size()) return false;
      const auto& tr = a.trainRows[f];
      if (std::find(tr.begin(), tr.end(), a.rows[i]) != tr.end()) return false;
    }
    if (a.side == "A" || a.side == "B") {
      const int parity = a.side == "A" ? 0 : 1;
      for (int r : a.rows)
        if (r % 2 != parity) return false;
      for (const auto& tr : a.trainRows)
        for (int r : tr)
          if (r % 2 != parity) return false;
    }
  }
  return true;
}

namespace {

void checkTraining(const PairedMatrix& m, const VectorXd& gold, const StackConfig& cfg) {
  if (m.a.rows() != m.b.rows()) throw Error("stack training: odd row count");
  if (m.a.rows() < 2) throw Error("stack training: need at least 2 instances");
  if (gold.size() != m.a.rows()) throw Error("stack training: gold length mismatch");
  if (cfg.baseGrid.empty() || cfg.finalGrid.empty()) throw Error("stack training: empty model grid");
}

// Audit entries for the top-k members of one base grid search. `toGlobal`
// maps a local training row to its interleaved index.
void recordAudit(std::vector<BaseAudit>& audit, const std::string& side, const std::vector<RankedSpec>& ranked,
                 int k, const std::vector<int>& toGlobal) {
  const auto count = static_cast<std::size_t>(std::clamp<int>(k, 1, static_cast<int>(ranked.size())));
  for (std::size_t m = 0; m < count; ++m) {
    const CvResult& cv = ranked[m].cv;
    BaseAudit a;
    a.side = side;
    a.rows = toGlobal;
    a.foldOfRow = cv.foldOf;
    for (const auto& tr : cv.trainRows) {
      std::vector<int> g;
      g.reserve(tr.size());
      for (int r : tr) g.push_back(toGlobal[static_cast<std::size_t>(r)]);
      a.trainRows.push_back(std::move(g));
    }
    audit.push_back(std::move(a));
  }
}

void fitFinal(StackModel& model, const PairedMatrix& m, const VectorXd& gold, const StackConfig& cfg) {
  const MatrixXd F = finalMatrix(m, model.baseOutOfFold);
  model.finalArity = F.cols();
  CvOptions opt = cfg.cv;
  opt.groups.clear();
  const auto ranked = gridSearch(cfg.finalGrid, F, gold, opt);
  model.finalCv = cvTable(ranked);
  model.finalOutOfFold = topKOutOfFold(ranked, cfg.topK);
  model.final = fitTopK(ranked, cfg.topK, F, gold, cfg.cv.jobs);
}

}  // namespace

StackModel trainCombinedStack(const PairedMatrix& m, const VectorXd& gold, const StackConfig& cfg) {
  checkTraining(m, gold, cfg);
  const Eigen::Index n = m.a.rows();
  const MatrixXd X = interleaveRows(m);
  VectorXd y(2 * n);
  std::vector<int> groups(static_cast<std::size_t>(2 * n)), global(static_cast<std::size_t>(2 * n));
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    y(i) = gold(i / 2);
    groups[static_cast<std::size_t>(i)] = static_cast<int>(i / 2);
    global[static_cast<std::size_t>(i)] = static_cast<int>(i);
  }
  CvOptions opt = cfg.cv;
  opt.groups = groups;
  const auto ranked = gridSearch(cfg.baseGrid, X, y, opt);

  StackModel model;
  model.mode = StackMode::Combined;
  model.baseCv.push_back(cvTable(ranked));
  recordAudit(model.audit, "AB", ranked, cfg.topK, global);
  const VectorXd oof = topKOutOfFold(ranked, cfg.topK);
  model.baseOutOfFold.y1.resize(n);
  model.baseOutOfFold.y2.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    model.baseOutOfFold.y1(i) = oof(2 * i);
    model.baseOutOfFold.y2(i) = oof(2 * i + 1);
  }
  model.base.push_back(fitTopK(ranked, cfg.topK, X, y, cfg.cv.jobs));
  fitFinal(model, m, gold, cfg);
  return model;
}

StackModel trainSeparateStack(const PairedMatrix& m, const VectorXd& gold, const StackConfig& cfg) {
  checkTraining(m, gold, cfg);
  const Eigen::Index n = m.a.rows();
  StackModel model;
  model.mode = StackMode::Separate;
  CvOptions opt = cfg.cv;
  opt.groups.clear();
  for (int side = 0; side < 2; ++side) {
    const MatrixXd& X = side == 0 ? m.a : m.b;
    std::vector<int> global(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) global[static_cast<std::size_t>(i)] = static_cast<int>(2 * i + side);
    const auto ranked = gridSearch(cfg.baseGrid, X, gold, opt);
    model.baseCv.push_back(cvTable(ranked));
    recordAudit(model.audit, side == 0 ? "A" : "B", ranked, cfg.topK, global);
    (side == 0 ? model.baseOutOfFold.y1 : model.baseOutOfFold.y2) = topKOutOfFold(ranked, cfg.topK);
    model.base.push_back(fitTopK(ranked, cfg.topK, X, gold, cfg.cv.jobs));
  }
  fitFinal(model, m, gold, cfg);
  return model;
}

PairedPredictions predictBase(const StackModel& model, const PairedMatrix& m) {
  if (m.a.rows() != m.b.rows()) throw Error("predictStack: odd row count");
  const std::size_t expected = model.mode == StackMode::Combined ? 1 : 2;
  if (model.base.size() != expected) throw Error("predictStack: wrong number of base models");
  PairedPredictions p;
  p.y1 = model.base[0].predict(m.a);
  p.y2 = model.base[expected - 1].predict(m.b);
  return p;
}

VectorXd predictStack(const StackModel& model, const PairedMatrix& m) {
  return model.final.predict(finalMatrix(m, predictBase(model, m)));
}

void StackModel::write(TokenWriter& w) const {
  w << "stack" << toString(mode) << (resourceFingerprint.empty() ? std::string("-") : resourceFingerprint)
    << base.size();
  w.newline();
  for (const auto& e : base) writeEnsemble(w, e);
  writeEnsemble(w, final);
}

StackModel StackModel::read(TokenReader& r) {
  r.expect("stack");
  StackModel m;
  m.mode = parseStackMode(r.next());
  m.resourceFingerprint = r.next();
  if (m.resourceFingerprint == "-") m.resourceFingerprint.clear();
  const auto nb = r.nextInt();
  const long long expected = m.mode == StackMode::Combined ? 1 : 2;
  if (nb != expected) throw Error("stack model: wrong number of base models");
  for (long long i = 0; i < nb; ++i) m.base.push_back(readEnsemble(r));
  m.final = readEnsemble(r);
  return m;
}

std::string toString(CombinerMode m) { return m == CombinerMode::Difference ? "difference" : "mean"; }

CombinerMode parseCombinerMode(const std::string& s) {
  if (s == "difference") return CombinerMode::Difference;
  if (s == "mean") return CombinerMode::Mean;
  throw Error("unknown combiner mode '" + s + "'");
}

double LinearCombiner::input(double y1, double y2) const {
  return mode == CombinerMode::Difference ? y1 - y2 : (y1 + y2) / 2.0;
}

VectorXd LinearCombiner::apply(const PairedPredictions& p) const {
  if (p.y1.size() != p.y2.size()) throw Error("combiner: prediction lengths differ");
  VectorXd out(p.y1.size());
  for (Eigen::Index i = 0; i < p.y1.size(); ++i) out(i) = a * input(p.y1(i), p.y2(i)) + b;
  return out;
}

LinearCombiner fitLinearCombiner(const PairedPredictions& p, const VectorXd& gold, CombinerMode mode) {
  if (p.y1.size() != p.y2.size() || p.y1.size() != gold.size()) throw Error("combiner: length mismatch");
  if (gold.size() < 2) throw Error("combiner: need at least 2 points");
  LinearCombiner c;
  c.mode = mode;
  const auto n = static_cast<double>(gold.size());
  VectorXd x(gold.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = c.input(p.y1(i), p.y2(i));
  const double mx = x.sum() / n, my = gold.sum() / n;
  double sxx = 0.0, sxy = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sxx += (x(i) - mx) * (x(i) - mx);
    sxy += (x(i) - mx) * (gold(i) - my);
  }
  if (x.maxCoeff() == x.minCoeff()) {
    c.a = 0.0;
    c.b = my;
    return c;
  }
  c.a = sxy / sxx;
  c.b = my - c.a * mx;
  return c;
}

}  // namespace rtm
