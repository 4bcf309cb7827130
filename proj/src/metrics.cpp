#include "rtm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "rtm/error.hpp"
#include "rtm/random.hpp"
#include "rtm/text_io.hpp"

namespace rtm {

namespace {

double meanOf(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double capped(double v, double eps) { return std::max(v, eps); }

double sign(double v) { return (v > 0.0) - (v < 0.0); }

// |yhat_i - y_i| / denominator, with 0/0 counting as 0.
double relativeTerm(double num, double den, const char* name) {
  if (num == 0.0) return 0.0;
  if (den <= 0.0) throw Error(std::string(name) + ": nonzero error over zero capped denominator (epsilon is 0)");
  return num / den;
}

}  // namespace

void PredictionSet::validate() const {
  if (predicted.size() != gold.size()) throw Error("predictions and gold differ in length");
  if (gold.size() < 2) throw Error("need at least 2 predictions");
  for (std::size_t i = 0; i < gold.size(); ++i)
    if (!std::isfinite(predicted[i]) || !std::isfinite(gold[i])) throw Error("non-finite prediction or gold value");
}

ScoreStats ScoreStats::of(std::span<const double> v) {
  if (v.empty()) throw Error("statistics of an empty vector");
  ScoreStats s;
  s.mean = meanOf(v);
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(v.size()));
  return s;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw Error("pearson: need two vectors of equal length >= 2");
  const double ma = meanOf(a), mb = meanOf(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) throw Error("undefined correlation: zero variance");
  return sab / (std::sqrt(saa) * std::sqrt(sbb));
}

double pearson(const PredictionSet& p) {
  p.validate();
  return pearson(p.predicted, p.gold);
}

std::vector<double> meanRanks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(const PredictionSet& p) {
  p.validate();
  const auto a = meanRanks(p.predicted), b = meanRanks(p.gold);
  return pearson(a, b);
}

double spearmanApprox(const PredictionSet& p) {
  p.validate();
  const auto a = meanRanks(p.predicted), b = meanRanks(p.gold);
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  const auto n = static_cast<double>(a.size());
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

MaeRae maeRae(const PredictionSet& p) {
  p.validate();
  const double ybar = meanOf(p.gold);
  double err = 0.0, dev = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    err += std::abs(p.predicted[i] - p.gold[i]);
    dev += std::abs(p.gold[i] - ybar);
  }
  if (dev <= 0.0) throw Error("RAE undefined: gold has no dispersion");
  const auto n = static_cast<double>(p.size());
  return {err / n, (err / n) / (dev / n)};
}

double epsilon(const PredictionSet& p, const MetricConfig& cfg) {
  p.validate();
  switch (cfg.mode) {
    case EpsilonMode::HalfStep:
      if (!(cfg.stepSize > 0.0)) throw Error("halfStep epsilon needs a positive step size");
      return cfg.stepSize / 2.0;
    case EpsilonMode::HalfMeanDeviation: {
      const double ybar = meanOf(p.gold);
      double s = 0.0;
      for (double v : p.predicted) s += std::abs(v - ybar);
      return s / static_cast<double>(p.size()) / 2.0;
    }
    case EpsilonMode::HalfMAE:
    default: {
      double s = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p.predicted[i] - p.gold[i]);
      return s / static_cast<double>(p.size()) / 2.0;
    }
  }
}

RelativeErrors maerMraer(const PredictionSet& p, const MetricConfig& cfg) {
  const double eps = epsilon(p, cfg);
  const double ybar = meanOf(p.gold);
  RelativeErrors out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double num = std::abs(p.predicted[i] - p.gold[i]);
    out.maer += relativeTerm(num, capped(std::abs(p.gold[i]), eps), "MAER");
    out.mraer += relativeTerm(num, capped(std::abs(ybar - p.gold[i]), eps), "MRAER");
  }
  const auto n = static_cast<double>(p.size());
  out.maer /= n;
  out.mraer /= n;
  return out;
}

CorrelatedRelativeErrors rMaerRMraer(const PredictionSet& p, const MetricConfig& cfg) {
  const double eps = epsilon(p, cfg);
  const ScoreStats sp = ScoreStats::of(p.predicted), sy = ScoreStats::of(p.gold);
  const double sdProduct = sp.sd * sy.sd;
  auto f = [eps](double x) { return x >= 0.0 ? capped(x, eps) : capped(-2.0 * x, eps); };
  CorrelatedRelativeErrors out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double num = std::abs(p.predicted[i] - p.gold[i]);
    if (num == 0.0) continue;
    const double cov = (p.predicted[i] - sp.mean) * (p.gold[i] - sy.mean);
    const double dA = capped(std::abs(p.gold[i]), eps);
    const double dR = capped(std::abs(sy.mean - p.gold[i]), eps);
    // with a constant side the correlation factor is taken as 0
    const double xA = sdProduct > 0.0 && dA > 0.0 ? cov / (sdProduct * dA * dA) : 0.0;
    const double xR = sdProduct > 0.0 && dR > 0.0 ? cov / (sdProduct * dR * dR) : 0.0;
    out.rmaer += relativeTerm(num, dA, "rMAER") * f(xA);
    out.rmraer += relativeTerm(num, dR, "rMRAER") * f(xR);
  }
  const auto n = static_cast<double>(p.size());
  out.rmaer /= n;
  out.rmraer /= n;
  return out;
}

double rankError(std::span<const double> trainValues, std::span<const double> testValues) {
  if (trainValues.size() != testValues.size() || trainValues.empty())
    throw Error("rankError: need two nonempty lists of equal length");
  const auto a = meanRanks(trainValues), b = meanRanks(testValues);
  const auto n = static_cast<double>(a.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] / n - b[i] / n;
    s += d * d;
  }
  return s;
}

double f1Binary(std::span<const int> predicted, std::span<const int> gold) {
  if (predicted.size() != gold.size()) throw Error("f1Binary: length mismatch");
  long long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if ((predicted[i] != 0 && predicted[i] != 1) || (gold[i] != 0 && gold[i] != 1))
      throw Error("f1Binary: labels must be 0 or 1");
    if (predicted[i] == 1 && gold[i] == 1) ++tp;
    else if (predicted[i] == 1) ++fp;
    else if (gold[i] == 1) ++fn;
  }
  const double denom = 2.0 * static_cast<double>(tp) + static_cast<double>(fp + fn);
  return denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
}

std::vector<int> classify(std::span<const double> scores, double threshold) {
  std::vector<int> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] > threshold ? 1 : 0;
  return out;
}

ThresholdChoice optimizeThreshold(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty()) throw Error("optimizeThreshold: bad input lengths");
  std::set<double> distinct(scores.begin(), scores.end());
  std::vector<double> candidates{0.5, *distinct.begin() - 1.0, *distinct.rbegin() + 1.0};
  for (auto it = distinct.begin(), nx = std::next(it); nx != distinct.end(); ++it, ++nx)
    candidates.push_back(*it + (*nx - *it) / 2.0);
  std::sort(candidates.begin(), candidates.end());

  ThresholdChoice best;
  double bestAcc = -1.0;
  bool first = true;
  for (double t : candidates) {
    const auto pred = classify(scores, t);
    const double f1 = f1Binary(pred, labels);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == labels[i];
    const double acc = static_cast<double>(correct) / static_cast<double>(pred.size());
    if (first || f1 > best.f1 || (f1 == best.f1 && acc > bestAcc)) {
      best = {t, f1};
      bestAcc = acc;
      first = false;
    }
  }
  return best;
}

double groundThreshold(double trainThreshold, const ScoreStats& train, const ScoreStats& test) {
  if (train.sd <= 0.0) return trainThreshold;
  const double z = (trainThreshold - train.mean) / train.sd;
  return test.mean + z * test.sd;
}

std::vector<double> groundPredictions(std::span<const double> predictions, const ScoreStats& target) {
  if (target.sd < 0.0) throw Error("groundPredictions: negative target sd");
  const ScoreStats s = ScoreStats::of(predictions);
  std::vector<double> out(predictions.size(), target.mean);
  if (s.sd <= 0.0) return out;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    out[i] = (predictions[i] - s.mean) / s.sd * target.sd + target.mean;
  return out;
}

double tauFromCounts(long long concordant, long long discordant) {
  if (concordant < 0 || discordant < 0) throw Error("tau: negative counts");
  if (concordant + discordant == 0) throw Error("tau undefined: no comparable pairs");
  return static_cast<double>(concordant - discordant) / static_cast<double>(concordant + discordant);
}

namespace {

double tauImpl(const std::vector<std::pair<double, double>>& ranks, Rng* rng) {
  long long c = 0, d = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i)
    for (std::size_t j = i + 1; j < ranks.size(); ++j) {
      const double ref = sign(ranks[i].first - ranks[j].first);
      if (ref == 0.0) continue;
      double cmp = sign(ranks[i].second - ranks[j].second);
      if (cmp == 0.0 && rng) cmp = rng->below(2) ? 1.0 : -1.0;
      (cmp == ref ? c : d) += 1;
    }
  return tauFromCounts(c, d);
}

}  // namespace

double iaaTau(const std::vector<std::pair<double, double>>& ranks) { return tauImpl(ranks, nullptr); }

double riaaTau(const std::vector<std::pair<double, double>>& ranks, std::uint64_t seed) {
  Rng rng(seed);
  return tauImpl(ranks, &rng);
}

std::map<std::string, double> bwsScores(const std::vector<BwsAnnotation>& annotations) {
  std::map<std::string, long long> seen, best, worst;
  for (const auto& a : annotations) {
    if (std::find(a.items.begin(), a.items.end(), a.best) == a.items.end() ||
        std::find(a.items.begin(), a.items.end(), a.worst) == a.items.end())
      throw Error("bws: best/worst item not among the annotated tuple");
    if (a.best == a.worst) throw Error("bws: best and worst must differ");
    for (const auto& it : a.items) ++seen[it];
    ++best[a.best];
    ++worst[a.worst];
  }
  std::map<std::string, double> out;
  for (const auto& [item, n] : seen) {
    const double raw = static_cast<double>(best[item] - worst[item]) / static_cast<double>(n);
    out[item] = (raw + 1.0) / 2.0;
  }
  return out;
}

std::string MetricReport::format() const {
  std::ostringstream out;
  auto line = [&](const char* name, double v) { out << name << '\t' << formatFixed(v, 6) << '\n'; };
  line("r", r);
  line("MAE", mae);
  line("RAE", rae);
  line("MAER", maer);
  line("MRAER", mraer);
  line("rMAER", rmaer);
  line("rMRAER", rmraer);
  line("rS", rS);
  if (f1) line("F1", *f1);
  if (rankError) line("rankError", *rankError);
  return out.str();
}

MetricReport metricReport(const PredictionSet& p, const MetricConfig& cfg,
                          const std::optional<ClassificationInputs>& classes,
                          const std::optional<RankingInputs>& ranking) {
  MetricReport rep;
  rep.r = pearson(p);
  rep.rS = spearman(p);
  const auto mr = maeRae(p);
  rep.mae = mr.mae;
  rep.rae = mr.rae;
  const auto rel = maerMraer(p, cfg);
  rep.maer = rel.maer;
  rep.mraer = rel.mraer;
  const auto rrel = rMaerRMraer(p, cfg);
  rep.rmaer = rrel.rmaer;
  rep.rmraer = rrel.rmraer;
  if (classes) rep.f1 = f1Binary(classes->predicted, classes->gold);
  if (ranking) rep.rankError = rankError(ranking->trainValues, ranking->testValues);
  return rep;
}

}  // namespace rtm
