#include "rtm/config.hpp"

#include <filesystem>
#include <set>
#include <sstream>

#include "rtm/error.hpp"
#include "rtm/text_io.hpp"

namespace rtm {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> splitList(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (cur.empty()) throw Error("empty list element in '" + v + "'");
    out.push_back(cur);
  }
  if (out.empty()) throw Error("empty list");
  return out;
}

std::string joinList(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

template <class T, class F>
std::string joinWith(const std::vector<T>& v, F f) {
  std::vector<std::string> s;
  for (const auto& x : v) s.push_back(f(x));
  return joinList(s);
}

bool parseBool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error("expected a boolean, got '" + v + "'");
}

int parsePositive(const std::string& v) {
  const long long x = parseInt(v);
  if (x < 1 || x > 1000000000) throw Error("expected a positive integer, got '" + v + "'");
  return static_cast<int>(x);
}

std::vector<double> parseDoubles(const std::string& v) {
  std::vector<double> out;
  for (const auto& s : splitList(v)) out.push_back(parseDouble(s));
  return out;
}

std::vector<int> parseInts(const std::string& v) {
  std::vector<int> out;
  for (const auto& s : splitList(v)) out.push_back(parsePositive(s));
  return out;
}

std::vector<LearnerKind> parseLearners(const std::string& v) {
  std::vector<LearnerKind> out;
  for (const auto& s : splitList(v)) {
    if (s == "rr") out.push_back(LearnerKind::Ridge);
    else if (s == "knn") out.push_back(LearnerKind::Knn);
    else if (s == "tree") out.push_back(LearnerKind::Tree);
    else if (s == "ada") out.push_back(LearnerKind::Ada);
    else throw Error("unknown learner '" + s + "' (rr, knn, tree, ada)");
  }
  return out;
}

std::string learnerName(LearnerKind k) {
  switch (k) {
    case LearnerKind::Ridge: return "rr";
    case LearnerKind::Knn: return "knn";
    case LearnerKind::Tree: return "tree";
    case LearnerKind::Ada: return "ada";
  }
  return "?";
}

std::string resolve(const std::string& v, const std::string& baseDir) {
  fs::path p(v);
  if (p.is_absolute() || baseDir.empty()) return p.lexically_normal().string();
  return (fs::path(baseDir) / p).lexically_normal().string();
}

std::string epsilonName(EpsilonMode m) {
  switch (m) {
    case EpsilonMode::HalfMAE: return "half_mae";
    case EpsilonMode::HalfMeanDeviation: return "half_mean_deviation";
    case EpsilonMode::HalfStep: return "half_step";
  }
  return "?";
}

void gridKeys(std::map<std::string, std::string>& out, const std::string& prefix, const GridConfig& g) {
  out[prefix + "learners"] = joinWith(g.learners, learnerName);
  out[prefix + "ridge_lambdas"] = joinWith(g.lambdas, [](double x) { return formatExact(x); });
  out[prefix + "knn_ks"] = joinWith(g.ks, [](int x) { return std::to_string(x); });
  out[prefix + "tree_min_leaf"] = joinWith(g.minLeafs, [](int x) { return std::to_string(x); });
  out[prefix + "tree_estimators"] = std::to_string(g.treeEstimators);
  out[prefix + "ada_estimators"] = std::to_string(g.adaEstimators);
  out[prefix + "ada_learning_rate"] = formatExact(g.adaLearningRate);
  out[prefix + "fs_sizes"] = g.fsSizes.empty() ? "none" : joinWith(g.fsSizes, [](int x) { return std::to_string(x); });
  out[prefix + "pls_dims"] = g.plsDims.empty() ? "none" : joinWith(g.plsDims, [](int x) { return std::to_string(x); });
  out[prefix + "fs_pls"] = g.fsPls ? "true" : "false";
}

// Applies one grid key; returns false when `key` is not a grid key.
bool setGridKey(GridConfig& g, const std::string& key, const std::string& v) {
  if (key == "learners") g.learners = parseLearners(v);
  else if (key == "ridge_lambdas") g.lambdas = parseDoubles(v);
  else if (key == "knn_ks") g.ks = parseInts(v);
  else if (key == "tree_min_leaf") g.minLeafs = parseInts(v);
  else if (key == "tree_estimators") g.treeEstimators = parsePositive(v);
  else if (key == "ada_estimators") g.adaEstimators = parsePositive(v);
  else if (key == "ada_learning_rate") g.adaLearningRate = parseDouble(v);
  else if (key == "fs_sizes") g.fsSizes = v == "none" ? std::vector<int>{} : parseInts(v);
  else if (key == "pls_dims") g.plsDims = v == "none" ? std::vector<int>{} : parseInts(v);
  else if (key == "fs_pls") g.fsPls = parseBool(v);
  else return false;
  return true;
}

}  // namespace

std::string toString(Task t) { return t == Task::Intensity ? "intensity" : "triples"; }

std::string toString(Architecture a) {
  switch (a) {
    case Architecture::Plain: return "plain";
    case Architecture::Combined: return "combined";
    case Architecture::Separate: return "separate";
  }
  return "?";
}

std::string toString(ThresholdMode m) {
  switch (m) {
    case ThresholdMode::None: return "none";
    case ThresholdMode::Fixed: return "fixed";
    case ThresholdMode::Optimized: return "optimized";
    case ThresholdMode::Grounded: return "grounded";
  }
  return "?";
}

std::map<std::string, std::string> RunConfig::canonical() const {
  std::map<std::string, std::string> out;
  out["task"] = toString(task);
  out["corpus"] = corpus;
  out["train"] = train;
  out["test"] = test;
  out["lexicon"] = lexicon.empty() ? "none" : lexicon;
  out["architecture"] = toString(architecture);
  switch (target.kind) {
    case TargetRecipe::Kind::Affect: out["target"] = "affect"; break;
    case TargetRecipe::Kind::Emotions: out["target"] = "emotions:" + joinList(target.emotions); break;
    case TargetRecipe::Kind::Pair: out["target"] = "pair:" + joinList(target.emotions); break;
  }
  out["affect"] = affect.empty() ? "all" : affect;
  out["fda_max_n"] = std::to_string(fda.maxN);
  out["fda_decay"] = formatExact(fda.decay);
  out["fda_budget"] = std::to_string(fda.budget);
  out["fda_length_exponent"] = formatExact(fda.lengthExponent);
  out["lm_order"] = std::to_string(lmOrder);
  out["aligner_iterations"] = std::to_string(alignerIterations);
  gridKeys(out, "", baseGrid);
  gridKeys(out, "final_", finalGrid);
  out["top_k"] = std::to_string(topK);
  out["folds"] = std::to_string(folds);
  out["seed"] = seed ? std::to_string(*seed) : "unset";
  out["rank_metric"] = rankMetric == RankMetric::MAE ? "mae" : "neg_pearson";
  out["ground_predictions"] = groundPredictions ? "true" : "false";
  out["threshold_mode"] = toString(thresholdMode);
  out["threshold"] = formatExact(threshold);
  out["combiner"] = combiner ? toString(*combiner) : "none";
  out["clip"] = clip ? "true" : "false";
  out["epsilon"] = epsilonMode == EpsilonMode::HalfStep ? "half_step:" + formatExact(epsilonStep) : epsilonName(epsilonMode);
  return out;
}

std::string RunConfig::hash() const {
  std::string text;
  for (const auto& [k, v] : canonical()) text += k + "=" + v + "\n";
  return hex64(fnv1a(text));
}

RunConfig parseRunConfig(const std::string& text, const std::string& path, const std::string& baseDir) {
  RunConfig cfg;
  std::set<std::string> seen;
  bool finalGridTouched = false;
  std::map<std::string, std::string> finalKeys;

  std::istringstream in(text);
  std::string raw;
  std::size_t lineNo = 0;
  while (std::getline(in, raw)) {
    ++lineNo;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(path, lineNo, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(path, lineNo, "empty key");
    if (!seen.insert(key).second) throw ParseError(path, lineNo, "duplicate key '" + key + "'");
    if (v.empty()) throw ParseError(path, lineNo, "empty value for '" + key + "'");
    try {
      if (key == "task") {
        if (v == "intensity") cfg.task = Task::Intensity;
        else if (v == "triples") cfg.task = Task::Triples;
        else throw Error("task must be intensity or triples");
      } else if (key == "corpus") cfg.corpus = resolve(v, baseDir);
      else if (key == "train") cfg.train = resolve(v, baseDir);
      else if (key == "test") cfg.test = resolve(v, baseDir);
      else if (key == "lexicon") cfg.lexicon = resolve(v, baseDir);
      else if (key == "architecture") {
        if (v == "plain") cfg.architecture = Architecture::Plain;
        else if (v == "combined") cfg.architecture = Architecture::Combined;
        else if (v == "separate") cfg.architecture = Architecture::Separate;
        else throw Error("architecture must be plain, combined or separate");
      } else if (key == "target") {
        if (v == "affect") {
          cfg.target = {TargetRecipe::Kind::Affect, {}};
        } else if (v.rfind("emotions:", 0) == 0) {
          cfg.target = {TargetRecipe::Kind::Emotions, splitList(v.substr(9))};
        } else if (v.rfind("pair:", 0) == 0) {
          cfg.target = {TargetRecipe::Kind::Pair, splitList(v.substr(5))};
          if (cfg.target.emotions.size() != 2) throw Error("pair target needs exactly two emotions");
        } else {
          throw Error("target must be affect, emotions:<list> or pair:<e1>,<e2>");
        }
      } else if (key == "affect") cfg.affect = v;
      else if (key == "fda_max_n") cfg.fda.maxN = parsePositive(v);
      else if (key == "fda_decay") cfg.fda.decay = parseDouble(v);
      else if (key == "fda_budget") cfg.fda.budget = static_cast<std::size_t>(parsePositive(v));
      else if (key == "fda_length_exponent") cfg.fda.lengthExponent = parseDouble(v);
      else if (key == "lm_order") cfg.lmOrder = parsePositive(v);
      else if (key == "aligner_iterations") cfg.alignerIterations = parsePositive(v);
      else if (key == "top_k") cfg.topK = parsePositive(v);
      else if (key == "folds") cfg.folds = parsePositive(v);
      else if (key == "seed") {
        const long long s = parseInt(v);
        if (s < 0) throw Error("seed must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(s);
      } else if (key == "rank_metric") {
        if (v == "mae") cfg.rankMetric = RankMetric::MAE;
        else if (v == "neg_pearson") cfg.rankMetric = RankMetric::NegPearson;
        else throw Error("rank_metric must be mae or neg_pearson");
      } else if (key == "ground_predictions") cfg.groundPredictions = parseBool(v);
      else if (key == "threshold_mode") {
        if (v == "none") cfg.thresholdMode = ThresholdMode::None;
        else if (v == "fixed") cfg.thresholdMode = ThresholdMode::Fixed;
        else if (v == "optimized") cfg.thresholdMode = ThresholdMode::Optimized;
        else if (v == "grounded") cfg.thresholdMode = ThresholdMode::Grounded;
        else throw Error("threshold_mode must be none, fixed, optimized or grounded");
      } else if (key == "threshold") cfg.threshold = parseDouble(v);
      else if (key == "combiner") {
        if (v == "none") cfg.combiner.reset();
        else cfg.combiner = parseCombinerMode(v);
      } else if (key == "clip") cfg.clip = parseBool(v);
      else if (key == "epsilon") {
        if (v == "half_mae") cfg.epsilonMode = EpsilonMode::HalfMAE;
        else if (v == "half_mean_deviation") cfg.epsilonMode = EpsilonMode::HalfMeanDeviation;
        else if (v.rfind("half_step:", 0) == 0) {
          cfg.epsilonMode = EpsilonMode::HalfStep;
          cfg.epsilonStep = parseDouble(v.substr(10));
          if (!(cfg.epsilonStep > 0.0)) throw Error("half_step needs a positive step size");
        } else {
          throw Error("epsilon must be half_mae, half_mean_deviation or half_step:<size>");
        }
      } else if (key.rfind("final_", 0) == 0) {
        finalKeys[key.substr(6)] = v;
        finalGridTouched = true;
        GridConfig probe;
        if (!setGridKey(probe, key.substr(6), v)) throw Error("unknown key '" + key + "'");
      } else if (!setGridKey(cfg.baseGrid, key, v)) {
        throw Error("unknown key '" + key + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(path, lineNo, e.what());
    }
  }
  // the final-level grid defaults to the base grid, overridden key by key
  cfg.finalGrid = cfg.baseGrid;
  if (finalGridTouched)
    for (const auto& [k, v] : finalKeys) setGridKey(cfg.finalGrid, k, v);
  if (cfg.seed) {
    cfg.baseGrid.seed = *cfg.seed;
    cfg.finalGrid.seed = *cfg.seed;
  }
  return cfg;
}

RunConfig loadRunConfig(const std::string& path) {
  const std::string base = fs::path(path).parent_path().string();
  return parseRunConfig(readFile(path), path, base);
}

void validateRunConfig(const RunConfig& cfg) {
  if (!cfg.seed) throw Error("config: seed is mandatory (set 'seed' or pass --seed)");
  auto need = [](const std::string& key, const std::string& p) {
    if (p.empty()) throw Error("config: '" + key + "' is required");
    if (!fs::exists(p)) throw Error("config: " + key + " file not found: " + p);
  };
  need("corpus", cfg.corpus);
  need("train", cfg.train);
  need("test", cfg.test);
  if (cfg.task == Task::Intensity) {
    need("lexicon", cfg.lexicon);
    const bool paired = cfg.architecture != Architecture::Plain;
    if (paired != (cfg.target.kind == TargetRecipe::Kind::Pair))
      throw Error("config: combined/separate intensity runs need target = pair:<e1>,<e2>, plain runs must not use it");
  } else if (cfg.architecture == Architecture::Plain) {
    throw Error("config: triples need architecture combined or separate");
  }
  if (cfg.combiner && cfg.architecture == Architecture::Plain) throw Error("config: combiner needs a paired architecture");
  if (cfg.fda.maxN > 3) throw Error("config: fda_max_n must be at most 3");
  if (!(cfg.fda.decay > 0.0 && cfg.fda.decay <= 1.0)) throw Error("config: fda_decay must be in (0, 1]");
  if (cfg.folds < 2) throw Error("config: folds must be at least 2");
}

}  // namespace rtm
