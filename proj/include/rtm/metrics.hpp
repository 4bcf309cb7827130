#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rtm {

/// Predictions and gold of equal length n >= 2, all finite.
struct PredictionSet {
  std::vector<double> predicted;
  std::vector<double> gold;

  std::size_t size() const { return gold.size(); }
  void validate() const;
};

enum class EpsilonMode {
  HalfMAE,            // mean |yhat - y| / 2
  HalfStep,           // stepSize / 2, for discrete targets
  HalfMeanDeviation,  // mean |yhat - mean(y)| / 2
};

struct MetricConfig {
  EpsilonMode mode = EpsilonMode::HalfMAE;
  double stepSize = 0.0;
};

/// Population mean and standard deviation.
struct ScoreStats {
  double mean = 0.0;
  double sd = 0.0;

  static ScoreStats of(std::span<const double> v);
};

double pearson(std::span<const double> a, std::span<const double> b);
double pearson(const PredictionSet& p);

/// 1-based ranks, ties get the mean of the ranks they span.
std::vector<double> meanRanks(std::span<const double> v);
double spearman(const PredictionSet& p);
/// 1 - 6 sum d^2 / (n (n^2 - 1)); exact only without ties.
double spearmanApprox(const PredictionSet& p);

struct MaeRae {
  double mae = 0.0;
  double rae = 0.0;
};
MaeRae maeRae(const PredictionSet& p);

double epsilon(const PredictionSet& p, const MetricConfig& cfg = {});

struct RelativeErrors {
  double maer = 0.0;
  double mraer = 0.0;
};
/// Mean absolute error relative to |y_i| (MAER) and to |mean(y) - y_i|
/// (MRAER), each denominator floored at epsilon.
RelativeErrors maerMraer(const PredictionSet& p, const MetricConfig& cfg = {});

struct CorrelatedRelativeErrors {
  double rmaer = 0.0;
  double rmraer = 0.0;
};
/// MAER-style terms scaled by f(x_i), where x_i is the standardized
/// covariance contribution of row i divided by the squared capped
/// denominator, f(x) = floor_eps(x) for x >= 0 and floor_eps(-2x) otherwise.
CorrelatedRelativeErrors rMaerRMraer(const PredictionSet& p, const MetricConfig& cfg = {});

/// Sum over items of (rank_a(i)/n - rank_b(i)/n)^2, with mean ranks for ties.
double rankError(std::span<const double> trainValues, std::span<const double> testValues);

double f1Binary(std::span<const int> predicted, std::span<const int> gold);

/// 1 when score > threshold.
std::vector<int> classify(std::span<const double> scores, double threshold);

struct ThresholdChoice {
  double threshold = 0.5;
  double f1 = 0.0;
};
/// Sweeps midpoints between consecutive distinct scores, 0.5, and one value
/// below and above all scores. Maximizes F1, then accuracy, then prefers the
/// smallest threshold.
ThresholdChoice optimizeThreshold(std::span<const double> scores, std::span<const int> labels);

/// Maps a training threshold to the test score distribution by keeping its
/// z-score: mu_test + (t - mu_train) / sd_train * sd_test.
double groundThreshold(double trainThreshold, const ScoreStats& train, const ScoreStats& test);

/// Affine map giving the predictions exactly the target mean and sd.
std::vector<double> groundPredictions(std::span<const double> predictions, const ScoreStats& target);

/// (C - D) / (C + D) over all item pairs ordered by the reference ranking.
/// A tie in the compared ranking counts as discordant.
double iaaTau(const std::vector<std::pair<double, double>>& ranks);
/// As iaaTau, but a tie in the compared ranking is resolved to either order
/// uniformly at random before counting.
double riaaTau(const std::vector<std::pair<double, double>>& ranks, std::uint64_t seed);
double tauFromCounts(long long concordant, long long discordant);

struct BwsAnnotation {
  std::array<std::string, 4> items;
  std::string best;
  std::string worst;
};
/// ((#best - #worst) / #appearances + 1) / 2 per item.
std::map<std::string, double> bwsScores(const std::vector<BwsAnnotation>& annotations);

struct MetricReport {
  double r = 0.0;
  double rS = 0.0;
  double mae = 0.0;
  double rae = 0.0;
  double maer = 0.0;
  double mraer = 0.0;
  double rmaer = 0.0;
  double rmraer = 0.0;
  std::optional<double> f1;
  std::optional<double> rankError;

  /// "name<TAB>value" lines, 6 decimals.
  std::string format() const;
};

struct ClassificationInputs {
  std::vector<int> predicted;
  std::vector<int> gold;
};

struct RankingInputs {
  std::vector<double> trainValues;
  std::vector<double> testValues;
};

MetricReport metricReport(const PredictionSet& p, const MetricConfig& cfg = {},
                          const std::optional<ClassificationInputs>& classes = std::nullopt,
                          const std::optional<RankingInputs>& ranking = std::nullopt);

}  // namespace rtm
