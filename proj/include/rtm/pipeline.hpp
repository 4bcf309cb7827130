#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rtm/config.hpp"
#include "rtm/metrics.hpp"

namespace rtm {

struct PipelineOptions {
  std::string outDir = ".";
  int jobs = 1;
  bool timings = false;  // per-stage wall-clock times on stderr
};

/// Stage names in execution order.
const std::vector<std::string>& stageNames();

/// Files written by each stage, relative to the output directory.
namespace artifact {
inline constexpr const char* kInterpretants = "interpretants.tsv";
inline constexpr const char* kResources = "resources.txt";
inline constexpr const char* kTrainFeatures = "features_train.tsv";
inline constexpr const char* kTestFeatures = "features_test.tsv";
inline constexpr const char* kModel = "model.txt";
inline constexpr const char* kPredictions = "predictions.tsv";
inline constexpr const char* kReport = "report.txt";
}  // namespace artifact

/// Runs one stage, reading earlier stages' files from the output directory.
/// Failures are rethrown as Error naming the stage.
void runStage(const std::string& stage, const RunConfig& cfg, const PipelineOptions& opt);

/// All stages in order. Files written by this call are removed on failure.
void runPipeline(const RunConfig& cfg, const PipelineOptions& opt);

/// Leading "# key=value" tags of an emitted file (the tool version is under
/// "rtm").
std::map<std::string, std::string> readTags(const std::string& text);

struct EvaluationResult {
  std::optional<MetricReport> report;  // absent when fewer than 2 gold values
  std::string absentReason;
  std::optional<double> f1;  // also set when the regression metrics are undefined
  std::size_t scored = 0;

  /// "scored" line followed by the metric lines, or "absent<TAB>reason".
  std::string format() const;
};

/// Scores a predictions TSV against a gold file. The gold file may be an
/// intensity dataset, a triples dataset or an "id<TAB>gold" table. F1 is
/// added when the predictions carry a class column and gold is binary.
EvaluationResult evaluateFiles(const std::string& predictionsPath, const std::string& goldPath,
                               const MetricConfig& metrics = {});

}  // namespace rtm
