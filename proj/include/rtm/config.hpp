#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rtm/interpretant.hpp"
#include "rtm/learners.hpp"
#include "rtm/metrics.hpp"
#include "rtm/stacking.hpp"

namespace rtm {

enum class Task { Intensity, Triples };
enum class Architecture { Plain, Combined, Separate };
enum class ThresholdMode { None, Fixed, Optimized, Grounded };

/// How intensity rows get their target word set.
struct TargetRecipe {
  enum class Kind { Affect, Emotions, Pair } kind = Kind::Affect;
  std::vector<std::string> emotions;  // Emotions: the union; Pair: exactly two
};

struct RunConfig {
  Task task = Task::Intensity;
  std::string corpus;
  std::string train;
  std::string test;
  std::string lexicon;
  Architecture architecture = Architecture::Plain;
  TargetRecipe target;
  std::string affect;  // optional row filter
  FdaConfig fda;
  int lmOrder = 3;
  int alignerIterations = 5;
  GridConfig baseGrid;
  GridConfig finalGrid;
  int topK = 1;
  int folds = 7;
  std::optional<std::uint64_t> seed;
  RankMetric rankMetric = RankMetric::MAE;
  bool groundPredictions = false;
  ThresholdMode thresholdMode = ThresholdMode::Optimized;
  double threshold = 0.5;
  std::optional<CombinerMode> combiner;
  bool clip = true;
  EpsilonMode epsilonMode = EpsilonMode::HalfMAE;
  double epsilonStep = 0.0;  // HalfStep only

  /// Every key with its effective value, sorted by key.
  std::map<std::string, std::string> canonical() const;
  /// Fingerprint of canonical(); paths are included as written.
  std::string hash() const;
};

/// Parses flat "key = value" lines; '#' starts a comment line. Relative
/// paths are resolved against `baseDir`. Unknown keys, duplicate keys and
/// malformed values are errors.
RunConfig parseRunConfig(const std::string& text, const std::string& path = "<config>",
                         const std::string& baseDir = "");
RunConfig loadRunConfig(const std::string& path);

/// Checks cross-key constraints and that referenced files exist.
void validateRunConfig(const RunConfig& cfg);

std::string toString(Task t);
std::string toString(Architecture a);
std::string toString(ThresholdMode m);

}  // namespace rtm
