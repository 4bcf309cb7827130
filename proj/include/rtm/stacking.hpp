#pragma once

#include <array>
#include <string>
#include <vector>

#include "rtm/features.hpp"
#include "rtm/learners.hpp"
#include "rtm/model_io.hpp"

namespace rtm {

/// (y1, y2, |y1 - y2|, (y1 + y2) / 2, sqrt(max(0, y1) * max(0, y2))).
std::array<double, 5> comboFeatures(double y1, double y2);

/// Two rows per instance; row A is the first side (w1 -> a), row B the second.
struct PairedDataset {
  std::vector<std::string> ids;
  std::vector<TextPair> rowA;
  std::vector<TextPair> rowB;
  std::vector<double> gold;  // empty when unlabeled

  std::size_t size() const { return ids.size(); }
  void validate() const;
};

/// Row-level feature matrices of both sides, one row per instance each.
struct PairedMatrix {
  std::vector<std::string> ids;
  MatrixXd a;
  MatrixXd b;

  Eigen::Index size() const { return a.rows(); }
};

PairedMatrix pairedFeatures(const PairedDataset& data, const Resources& res, int jobs = 1);

/// Interleaves the sides: instance i gives rows 2i (A) and 2i+1 (B).
MatrixXd interleaveRows(const PairedMatrix& m);

struct PairedPredictions {
  VectorXd y1;
  VectorXd y2;
};

/// concat(featuresA, featuresB, comboFeatures(y1, y2)) per instance.
MatrixXd finalMatrix(const PairedMatrix& m, const PairedPredictions& p);

enum class StackMode { Combined, Separate };
std::string toString(StackMode m);
StackMode parseStackMode(const std::string& s);

struct StackConfig {
  std::vector<ModelSpec> baseGrid;
  std::vector<ModelSpec> finalGrid;
  int topK = 1;
  CvOptions cv;  // groups are filled in by the trainer
};

/// One row of a cross-validation table.
struct CvTableRow {
  std::string model;
  double score = 0.0;
  double meanMAE = 0.0;
};
std::vector<CvTableRow> cvTable(const std::vector<RankedSpec>& ranked);

/// Which interleaved rows a base model's folds trained on, and which fold
/// scored each row. Row indices refer to the interleaved layout.
struct BaseAudit {
  std::string side;  // "AB", "A" or "B"
  std::vector<int> rows;
  std::vector<int> foldOfRow;  // parallel to rows
  std::vector<std::vector<int>> trainRows;  // per fold, interleaved indices
};

/// True when no row was scored by a fold model that trained on it, and in
/// separate mode each side only saw its own rows.
bool auditOutOfFold(const std::vector<BaseAudit>& audit);

struct StackModel {
  StackMode mode = StackMode::Combined;
  std::vector<Ensemble> base;  // 1 for combined, 2 for separate
  Ensemble final;
  std::string resourceFingerprint;

  // training-time diagnostics, not serialized
  std::vector<std::vector<CvTableRow>> baseCv;
  std::vector<CvTableRow> finalCv;
  PairedPredictions baseOutOfFold;
  VectorXd finalOutOfFold;
  std::vector<BaseAudit> audit;
  Eigen::Index finalArity = 0;

  void write(TokenWriter& w) const;
  static StackModel read(TokenReader& r);
};

StackModel trainCombinedStack(const PairedMatrix& m, const VectorXd& gold, const StackConfig& cfg);
StackModel trainSeparateStack(const PairedMatrix& m, const VectorXd& gold, const StackConfig& cfg);
PairedPredictions predictBase(const StackModel& model, const PairedMatrix& m);
VectorXd predictStack(const StackModel& model, const PairedMatrix& m);

enum class CombinerMode { Difference, Mean };
std::string toString(CombinerMode m);
CombinerMode parseCombinerMode(const std::string& s);

/// gold ~ a * x + b with x = y1 - y2 or (y1 + y2) / 2.
struct LinearCombiner {
  CombinerMode mode = CombinerMode::Difference;
  double a = 0.0;
  double b = 0.0;

  double input(double y1, double y2) const;
  VectorXd apply(const PairedPredictions& p) const;
};

/// Least squares; a constant x gives a = 0 and b = mean(gold).
LinearCombiner fitLinearCombiner(const PairedPredictions& p, const VectorXd& gold, CombinerMode mode);

}  // namespace rtm
