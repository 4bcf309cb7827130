#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace rtm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Per-column standardization. Columns whose population standard deviation
/// is below 1e-12 are only centered.
class Scaler {
 public:
  static constexpr double kMinStd = 1e-12;

  Scaler() = default;
  static Scaler fit(const MatrixXd& X);
  static Scaler fromParameters(VectorXd means, VectorXd stds);

  MatrixXd transform(const MatrixXd& X) const;
  MatrixXd inverse(const MatrixXd& Z) const;

  const VectorXd& means() const { return mean_; }
  const VectorXd& stds() const { return std_; }
  Eigen::Index arity() const { return mean_.size(); }

 private:
  VectorXd mean_;
  VectorXd std_;
};

enum class LearnerKind { Ridge, Knn, Tree, Ada };
enum class Preprocess { None, FS, PLS, FSPLS };

std::string toString(LearnerKind k);
std::string toString(Preprocess p);

struct ModelSpec {
  LearnerKind kind = LearnerKind::Ridge;
  double lambda = 1.0;      // RR
  int k = 5;                // KNN
  int minLeaf = 1;          // TREE
  int minSplit = 2;         // TREE
  int nEstimators = 500;    // TREE, ADA
  double learningRate = 1.0;  // ADA
  Preprocess preprocess = Preprocess::None;
  int fsM = 0;
  int plsD = 0;
  std::uint64_t seed = 0;

  static ModelSpec ridge(double lambda);
  static ModelSpec knn(int k);
  static ModelSpec extraTrees(int minLeaf, int nEstimators = 500, std::uint64_t seed = 0, int minSplit = 2);
  static ModelSpec adaBoost(int nEstimators = 50, double learningRate = 1.0, std::uint64_t seed = 0);

  ModelSpec withFS(int m) const;
  ModelSpec withPLS(int d) const;
  ModelSpec withFSPLS(int m, int d) const;

  /// Short human-readable form such as "RR(lambda=0.1)+FS(16)".
  std::string describe() const;

  bool operator==(const ModelSpec&) const = default;
};

struct RidgeModel {
  Scaler scaler;
  VectorXd coef;  // on standardized inputs
  double intercept = 0.0;
};

struct KnnModel {
  Scaler scaler;
  MatrixXd points;  // standardized training rows
  VectorXd targets;
  int k = 1;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // rows with x < threshold go left
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct ExtraTreesModel {
  std::vector<std::vector<TreeNode>> trees;
};

struct Stump {
  int feature = -1;  // -1: constant predictor
  double threshold = 0.0;
  double left = 0.0;
  double right = 0.0;
};

struct AdaBoostModel {
  std::vector<Stump> stumps;
  std::vector<double> weights;  // log(1/beta) per stump
  std::vector<double> trainingMae;  // of the running ensemble after each round
};

/// NIPALS PLS1 on standardized inputs and centered target.
struct PlsProjection {
  Scaler scaler;
  MatrixXd weights;   // p x d
  MatrixXd loadings;  // p x d
  VectorXd yLoadings; // d
  double yMean = 0.0;

  int components() const { return static_cast<int>(weights.cols()); }
  MatrixXd transform(const MatrixXd& X) const;
  VectorXd predict(const MatrixXd& X) const;
};

using Learner = std::variant<RidgeModel, KnnModel, ExtraTreesModel, AdaBoostModel>;

struct TrainedModel {
  ModelSpec spec;
  Eigen::Index arity = 0;
  std::vector<int> selected;  // empty: all columns
  std::optional<PlsProjection> pls;
  Learner learner;

  VectorXd predict(const MatrixXd& X) const;
};

TrainedModel train(const ModelSpec& spec, const MatrixXd& X, const VectorXd& y);

TrainedModel trainRidge(const MatrixXd& X, const VectorXd& y, double lambda);
TrainedModel trainKNN(const MatrixXd& X, const VectorXd& y, int k);
TrainedModel trainExtraTrees(const MatrixXd& X, const VectorXd& y, const ModelSpec& spec);
TrainedModel trainAdaBoostR2(const MatrixXd& X, const VectorXd& y, const ModelSpec& spec);

/// Recursive feature elimination with ridge: repeatedly drops the feature
/// with the smallest absolute standardized coefficient (higher index on ties)
/// until `m` remain. Returned indices are ascending.
std::vector<int> selectFeatures(const MatrixXd& X, const VectorXd& y, int m, double innerLambda = 1.0);

PlsProjection fitPLS(const MatrixXd& X, const VectorXd& y, int d);

enum class RankMetric { MAE, NegPearson };

struct CvOptions {
  int folds = 7;
  std::uint64_t seed = 0;
  /// Rows sharing a group id always land in the same fold. Empty: one group per row.
  std::vector<int> groups;
  RankMetric metric = RankMetric::MAE;
  int jobs = 1;
};

/// Fold index per row: groups are shuffled with the seed and split into
/// contiguous folds whose sizes differ by at most one.
std::vector<int> foldAssignment(std::size_t rows, const CvOptions& opt);

struct CvResult {
  double score = 0.0;  // ranking score, lower is better
  double meanMAE = 0.0;
  std::vector<double> foldScores;  // MAE per fold
  VectorXd outOfFold;              // prediction for each row from the model that did not train on it
  std::vector<int> foldOf;
  std::vector<std::vector<int>> trainRows;  // rows used to fit each fold's model
};

CvResult crossValidate(const ModelSpec& spec, const MatrixXd& X, const VectorXd& y, const CvOptions& opt);

struct RankedSpec {
  ModelSpec spec;
  CvResult cv;
};

/// Cross-validates every spec and sorts ascending by score; ties keep grid order.
std::vector<RankedSpec> gridSearch(const std::vector<ModelSpec>& grid, const MatrixXd& X, const VectorXd& y,
                                   const CvOptions& opt);

/// Unweighted average of several trained models.
struct Ensemble {
  std::vector<TrainedModel> members;
  VectorXd predict(const MatrixXd& X) const;
};

/// Retrains the best k specs on all of (X, y).
Ensemble fitTopK(const std::vector<RankedSpec>& ranked, int k, const MatrixXd& X, const VectorXd& y, int jobs = 1);
/// Mean of the top-k out-of-fold prediction vectors.
VectorXd topKOutOfFold(const std::vector<RankedSpec>& ranked, int k);
VectorXd averageTopK(const std::vector<RankedSpec>& ranked, int k, const MatrixXd& Xtrain, const VectorXd& y,
                     const MatrixXd& Xpredict, int jobs = 1);

struct GridConfig {
  std::vector<LearnerKind> learners{LearnerKind::Ridge, LearnerKind::Knn, LearnerKind::Tree, LearnerKind::Ada};
  std::vector<double> lambdas{0.01, 0.1, 1, 10, 100};
  std::vector<int> ks{1, 3, 5, 9, 15};
  std::vector<int> minLeafs{1, 3, 5};
  int treeEstimators = 500;
  int adaEstimators = 50;
  double adaLearningRate = 1.0;
  std::vector<int> fsSizes{8, 16};  // sizes >= arity collapse to "all"
  std::vector<int> plsDims{2, 4, 8};
  bool fsPls = false;
  std::uint64_t seed = 0;
};

std::vector<ModelSpec> expandGrid(const GridConfig& cfg, Eigen::Index arity);

}  // namespace rtm
