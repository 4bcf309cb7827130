#include "rtm/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "rtm/error.hpp"
#include "rtm/parallel.hpp"
#include "rtm/text_io.hpp"

namespace rtm {

namespace {

std::set<NGram> distinctNGrams(const TokenSeq& seq, const std::vector<int>& orders) {
  std::set<NGram> out;
  for (int n : orders)
    for (auto& g : extractNGrams(seq, n)) out.insert(std::move(g));
  return out;
}

double harmonic(double a, double b) { return a + b > 0.0 ? 2.0 * a * b / (a + b) : 0.0; }

const std::vector<std::vector<int>>& overlapOrderSets() {
  static const std::vector<std::vector<int>> sets{{1}, {2}, {3}, {1, 2}, {1, 2, 3}};
  return sets;
}

}  // namespace

OverlapFeatures weightedOverlap(const TokenSeq& src, const TokenSeq& tgt, const NGramWeightTable& weights,
                                const std::vector<int>& orders) {
  if (orders.empty()) throw Error("weightedOverlap: empty order set");
  for (int n : orders)
    if (n < 1 || n > 3) throw Error("weightedOverlap: orders must lie in 1..3");
  const auto gs = distinctNGrams(src, orders);
  const auto gt = distinctNGrams(tgt, orders);
  OverlapFeatures out;
  if (gs.empty() || gt.empty()) return out;

  double srcTotal = 0.0, tgtTotal = 0.0, common = 0.0;
  std::size_t commonCount = 0;
  for (const auto& g : gs) srcTotal += weights.weight(g);
  for (const auto& g : gt) {
    const double w = weights.weight(g);
    tgtTotal += w;
    if (gs.count(g)) {
      common += w;
      ++commonCount;
    }
  }
  out.wrec = common / tgtTotal;
  out.wprec = common / srcTotal;
  out.wF1 = harmonic(out.wprec, out.wrec);
  out.wGM = std::sqrt(out.wprec * out.wrec);
  out.plainRec = static_cast<double>(commonCount) / static_cast<double>(gt.size());
  out.plainPrec = static_cast<double>(commonCount) / static_cast<double>(gs.size());
  return out;
}

LmFeatures lmFeatures(const LanguageModel& lm, const TokenSeq& seq) {
  LmFeatures f;
  f.logprob = lm.sentenceLog2Prob(seq);
  f.bpw = -f.logprob / static_cast<double>(seq.size() + 1);
  if (!seq.empty()) {
    std::size_t oov = 0;
    for (const auto& t : seq.tokens)
      if (!lm.inVocabulary(t)) ++oov;
    f.oovRate = static_cast<double>(oov) / static_cast<double>(seq.size());
  }
  return f;
}

std::vector<double> lengthFeatures(const TokenSeq& src, const TokenSeq& tgt) {
  const auto st = static_cast<double>(src.size()), tt = static_cast<double>(tgt.size());
  const auto sc = static_cast<double>(src.charCount), tc = static_cast<double>(tgt.charCount);
  return {st, tt, sc, tc, tt > 0.0 ? st / tt : 0.0, tc > 0.0 ? sc / tc : 0.0};
}

const std::vector<std::string>& featureManifest() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const char* set : {"1", "2", "3", "12", "123"})
      for (const char* f : {"wprec", "wrec", "wf1", "wgm", "rec", "prec"}) n.push_back(std::string(f) + "_" + set);
    for (const char* f : {"src_logprob", "src_bpw", "src_oov", "tgt_bpw", "tgt_oov", "align_1mwer", "align_f1",
                          "src_tokens", "tgt_tokens", "src_chars", "tgt_chars"})
      n.emplace_back(f);
    return n;
  }();
  return names;
}

FeatureVector extractFeatureVector(const TokenSeq& src, const TokenSeq& tgt, const Resources& res) {
  if (!res.weights) throw Error("feature extraction: missing resource 'weights'");
  if (!res.srcLm) throw Error("feature extraction: missing resource 'srcLm'");
  if (!res.tgtLm) throw Error("feature extraction: missing resource 'tgtLm'");
  if (!res.aligner) throw Error("feature extraction: missing resource 'aligner'");

  FeatureVector v;
  v.reserve(featureManifest().size());
  for (const auto& orders : overlapOrderSets()) {
    const auto o = weightedOverlap(src, tgt, *res.weights, orders);
    v.insert(v.end(), {o.wprec, o.wrec, o.wF1, o.wGM, o.plainRec, o.plainPrec});
  }
  const auto ls = lmFeatures(*res.srcLm, src);
  const auto lt = lmFeatures(*res.tgtLm, tgt);
  v.insert(v.end(), {ls.logprob, ls.bpw, ls.oovRate, lt.bpw, lt.oovRate});
  const auto al = alignmentFeatures(*res.aligner, src, tgt);
  v.insert(v.end(), {al.oneMinusWER, al.alignF1});
  const auto len = lengthFeatures(src, tgt);
  v.insert(v.end(), len.begin(), len.begin() + 4);

  for (double x : v)
    if (!std::isfinite(x)) throw Error("feature extraction produced a non-finite value");
  return v;
}

FeatureMatrix buildFeatureMatrix(const std::vector<TextPair>& rows, const Resources& res, int jobs) {
  FeatureMatrix m;
  m.names = featureManifest();
  const auto width = static_cast<Eigen::Index>(m.names.size());
  m.values.resize(static_cast<Eigen::Index>(rows.size()), width);
  m.rowIds.resize(rows.size());
  parallelFor(rows.size(), jobs, [&](std::size_t i) {
    const auto v = extractFeatureVector(rows[i].first, rows[i].second, res);
    for (Eigen::Index j = 0; j < width; ++j) m.values(static_cast<Eigen::Index>(i), j) = v[static_cast<std::size_t>(j)];
  });
  for (std::size_t i = 0; i < rows.size(); ++i) m.rowIds[i] = std::to_string(i);
  return m;
}

std::string formatFeatureMatrix(const FeatureMatrix& m) {
  std::ostringstream out;
  out << "id";
  for (const auto& n : m.names) out << '\t' << n;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << m.rowIds[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << '\t' << formatExact(m.values(i, j));
    out << '\n';
  }
  return out.str();
}

FeatureMatrix parseFeatureMatrix(const std::string& text, const std::string& path) {
  FeatureMatrix m;
  std::istringstream in(text);
  std::string line;
  std::size_t lineNo = 0;
  std::vector<std::vector<double>> rows;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty() || (!header && line[0] == '#')) continue;
    auto cols = splitTabs(line);
    if (!header) {
      if (cols.empty() || cols[0] != "id") throw ParseError(path, lineNo, "feature header must start with 'id'");
      m.names.assign(cols.begin() + 1, cols.end());
      header = true;
      continue;
    }
    if (cols.size() != m.names.size() + 1) throw ParseError(path, lineNo, "feature row width mismatch");
    m.rowIds.push_back(cols[0]);
    std::vector<double> r;
    try {
      for (std::size_t j = 1; j < cols.size(); ++j) r.push_back(parseDouble(cols[j]));
    } catch (const Error& e) {
      throw ParseError(path, lineNo, e.what());
    }
    rows.push_back(std::move(r));
  }
  if (!header) throw ParseError(path, lineNo, "missing feature header");
  m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

std::string Resources::serialize() const {
  if (!weights || !srcLm || !tgtLm || !aligner) throw Error("cannot serialize incomplete resources");
  return "resources 1\n" + weights->serialize() + srcLm->serialize() + tgtLm->serialize() + aligner->serialize();
}

Resources Resources::deserialize(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#' && lines.empty()) continue;
    lines.push_back(line);
  }
  std::size_t pos = 0;
  if (lines.empty() || lines[0] != "resources 1") throw Error("resources: bad or missing header");
  ++pos;
  Resources r;
  r.weights = NGramWeightTable::deserialize(lines, pos);
  r.srcLm = LanguageModel::deserialize(lines, pos);
  r.tgtLm = LanguageModel::deserialize(lines, pos);
  r.aligner = AlignmentModel::deserialize(lines, pos);
  return r;
}

}  // namespace rtm
