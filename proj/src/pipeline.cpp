#include "rtm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include "rtm/corpus.hpp"
#include "rtm/error.hpp"
#include "rtm/features.hpp"
#include "rtm/interpretant.hpp"
#include "rtm/model_io.hpp"
#include "rtm/stacking.hpp"
#include "rtm/text_io.hpp"

namespace rtm {

namespace fs = std::filesystem;

const std::vector<std::string>& stageNames() {
  static const std::vector<std::string> names{"select-interpretants", "build-resources", "extract-features",
                                              "train", "predict", "evaluate"};
  return names;
}

std::map<std::string, std::string> readTags(const std::string& text) {
  std::map<std::string, std::string> tags;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line) && !line.empty() && line[0] == '#') {
    const auto toks = splitWhitespace(std::string_view(line).substr(1));
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const auto eq = toks[i].find('=');
      if (eq != std::string::npos) tags[toks[i].substr(0, eq)] = toks[i].substr(eq + 1);
      else if (toks[i] == "rtm" && i + 1 < toks.size()) tags["rtm"] = toks[++i];
    }
  }
  return tags;
}

namespace {

// ---------------------------------------------------------------------------
// file plumbing

std::string header(const RunConfig& cfg, const std::vector<std::pair<std::string, std::string>>& tags = {}) {
  std::string h = std::string("# rtm ") + kToolVersion + " config=" + cfg.hash() + "\n";
  for (const auto& [k, v] : tags) h += "# " + k + "=" + v + "\n";
  return h;
}

std::string stripComments(const std::string& text) {
  std::size_t pos = 0;
  while (pos < text.size() && text[pos] == '#') {
    const auto nl = text.find('\n', pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
  }
  return text.substr(pos);
}

std::string outPath(const PipelineOptions& opt, const char* name) { return (fs::path(opt.outDir) / name).string(); }

std::string readArtifact(const PipelineOptions& opt, const char* name) {
  const std::string p = outPath(opt, name);
  if (!fs::exists(p)) throw Error("missing input " + p + " (run the earlier stages first)");
  return readFile(p);
}

std::string requireTag(const std::map<std::string, std::string>& tags, const std::string& key, const std::string& file) {
  auto it = tags.find(key);
  if (it == tags.end()) throw Error(file + ": missing '" + key + "' header tag");
  return it->second;
}

std::string fileHash(const std::string& path) { return hex64(fnv1a(readFile(path))); }

// ---------------------------------------------------------------------------
// datasets

struct TaskData {
  bool paired = false;
  std::vector<std::string> ids;
  std::vector<TextPair> rows;  // plain
  PairedDataset pairs;         // paired
  std::vector<std::optional<double>> gold;

  std::size_t size() const { return ids.size(); }
  /// Row-level ids in feature-file order.
  std::vector<std::string> rowIds() const {
    if (!paired) return ids;
    std::vector<std::string> out;
    for (const auto& id : ids) {
      out.push_back(id + ":A");
      out.push_back(id + ":B");
    }
    return out;
  }
  std::vector<TextPair> featureRows() const {
    if (!paired) return rows;
    std::vector<TextPair> out;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      out.push_back(pairs.rowA[i]);
      out.push_back(pairs.rowB[i]);
    }
    return out;
  }
  VectorXd goldVector(const std::string& what) const {
    VectorXd y(static_cast<Eigen::Index>(gold.size()));
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (!gold[i]) throw Error(what + ": instance '" + ids[i] + "' has no gold value");
      y(static_cast<Eigen::Index>(i)) = *gold[i];
    }
    return y;
  }
};

TaskData loadTaskData(const RunConfig& cfg, const std::string& path, const Lexicon* lex) {
  TaskData d;
  d.paired = cfg.architecture != Architecture::Plain;
  if (cfg.task == Task::Intensity) {
    std::map<std::string, TokenSeq> byAffect;
    std::optional<TokenSeq> fixed, second;
    if (cfg.target.kind == TargetRecipe::Kind::Emotions) fixed = lexiconToTarget(*lex, cfg.target.emotions);
    if (cfg.target.kind == TargetRecipe::Kind::Pair) {
      fixed = lexiconToTarget(*lex, {cfg.target.emotions[0]});
      second = lexiconToTarget(*lex, {cfg.target.emotions[1]});
    }
    for (auto& inst : loadIntensityDataset(path)) {
      if (!cfg.affect.empty() && inst.affect != cfg.affect) continue;
      d.ids.push_back(inst.id);
      d.gold.push_back(inst.gold);
      if (d.paired) {
        d.pairs.ids.push_back(inst.id);
        d.pairs.rowA.emplace_back(inst.source, *fixed);
        d.pairs.rowB.emplace_back(inst.source, *second);
      } else if (fixed) {
        d.rows.emplace_back(inst.source, *fixed);
      } else {
        auto it = byAffect.find(inst.affect);
        if (it == byAffect.end()) {
          if (!lex->contains(inst.affect))
            throw Error(path + ": instance '" + inst.id + "' has affect '" + inst.affect + "' missing from the lexicon");
          it = byAffect.emplace(inst.affect, lexiconToTarget(*lex, {inst.affect})).first;
        }
        d.rows.emplace_back(inst.source, it->second);
      }
    }
  } else {
    for (auto& t : loadTripleDataset(path)) {
      d.ids.push_back(t.id);
      d.gold.push_back(t.gold ? std::optional<double>(*t.gold) : std::nullopt);
      d.pairs.ids.push_back(t.id);
      d.pairs.rowA.emplace_back(t.w1, t.attribute);
      d.pairs.rowB.emplace_back(t.w2, t.attribute);
    }
  }
  if (d.ids.empty()) throw Error(path + ": no instances" + (cfg.affect.empty() ? "" : " with affect '" + cfg.affect + "'"));
  std::set<std::string> seen;
  for (const auto& id : d.ids)
    if (!seen.insert(id).second) throw Error(path + ": duplicate id '" + id + "'");
  return d;
}

struct Inputs {
  std::optional<Lexicon> lexicon;
  TaskData train;
  TaskData test;
};

Inputs loadInputs(const RunConfig& cfg) {
  Inputs in;
  if (cfg.task == Task::Intensity) in.lexicon = loadLexicon(cfg.lexicon);
  const Lexicon* lex = in.lexicon ? &*in.lexicon : nullptr;
  in.train = loadTaskData(cfg, cfg.train, lex);
  in.test = loadTaskData(cfg, cfg.test, lex);
  return in;
}

// ---------------------------------------------------------------------------
// resources

struct LoadedResources {
  Resources res;
  std::string fingerprint;
  std::map<std::string, std::string> tags;
};

LoadedResources loadResources(const PipelineOptions& opt) {
  const std::string text = readArtifact(opt, artifact::kResources);
  LoadedResources r;
  r.tags = readTags(text);
  const std::string body = stripComments(text);
  r.fingerprint = hex64(fnv1a(body));
  if (requireTag(r.tags, "resources", artifact::kResources) != r.fingerprint)
    throw Error(std::string(artifact::kResources) + ": content does not match its fingerprint");
  r.res = Resources::deserialize(body);
  return r;
}

FeatureMatrix loadFeatures(const PipelineOptions& opt, const char* name, const std::string& fingerprint,
                           const std::vector<std::string>& expectedIds) {
  const std::string text = readArtifact(opt, name);
  if (requireTag(readTags(text), "resources", name) != fingerprint)
    throw Error(std::string(name) + ": resource fingerprint mismatch (features were built from other resources)");
  FeatureMatrix m = parseFeatureMatrix(text, outPath(opt, name));
  if (m.names != featureManifest()) throw Error(std::string(name) + ": feature names differ from the manifest");
  if (m.rowIds != expectedIds) throw Error(std::string(name) + ": row ids do not match the dataset");
  return m;
}

PairedMatrix splitPaired(const FeatureMatrix& f, const std::vector<std::string>& ids) {
  PairedMatrix m;
  m.ids = ids;
  const Eigen::Index n = f.rows() / 2;
  m.a.resize(n, f.cols());
  m.b.resize(n, f.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    m.a.row(i) = f.values.row(2 * i);
    m.b.row(i) = f.values.row(2 * i + 1);
  }
  return m;
}

// ---------------------------------------------------------------------------
// trained artifact

struct NamedTable {
  std::string name;
  std::vector<CvTableRow> rows;
};

struct ModelFile {
  Task task = Task::Intensity;
  Architecture architecture = Architecture::Plain;
  ScoreStats goldStats;
  ScoreStats scoreStats;  // of the out-of-fold training scores
  std::optional<double> threshold;
  std::optional<LinearCombiner> combiner;
  std::vector<NamedTable> cv;
  Ensemble plain;
  StackModel stack;

  std::string serialize() const {
    TokenWriter w;
    w << "rtm-model" << 1;
    w.newline();
    w << "task" << toString(task) << "architecture" << toString(architecture);
    w.newline();
    w << "gold_stats" << goldStats.mean << goldStats.sd << "score_stats" << scoreStats.mean << scoreStats.sd;
    w.newline();
    w << "threshold" << (threshold ? 1 : 0) << (threshold ? *threshold : 0.0);
    w.newline();
    if (combiner) w << "combiner" << 1 << toString(combiner->mode) << combiner->a << combiner->b;
    else w << "combiner" << 0;
    w.newline();
    w << "cvtables" << cv.size();
    w.newline();
    for (const auto& t : cv) {
      w << "table" << t.name << t.rows.size();
      w.newline();
      for (const auto& r : t.rows) {
        w << "row" << r.score << r.meanMAE << r.model;
        w.newline();
      }
    }
    if (architecture == Architecture::Plain) writeEnsemble(w, plain);
    else stack.write(w);
    return w.str();
  }

  static ModelFile parse(const std::string& text) {
    TokenReader r(text);
    ModelFile m;
    r.expect("rtm-model");
    if (r.nextInt() != 1) throw Error("model: unsupported format version");
    r.expect("task");
    const std::string task = r.next();
    if (task == "intensity") m.task = Task::Intensity;
    else if (task == "triples") m.task = Task::Triples;
    else throw Error("model: unknown task '" + task + "'");
    r.expect("architecture");
    const std::string arch = r.next();
    if (arch == "plain") m.architecture = Architecture::Plain;
    else if (arch == "combined") m.architecture = Architecture::Combined;
    else if (arch == "separate") m.architecture = Architecture::Separate;
    else throw Error("model: unknown architecture '" + arch + "'");
    r.expect("gold_stats");
    m.goldStats.mean = r.nextDouble();
    m.goldStats.sd = r.nextDouble();
    r.expect("score_stats");
    m.scoreStats.mean = r.nextDouble();
    m.scoreStats.sd = r.nextDouble();
    r.expect("threshold");
    const bool hasT = r.nextInt() != 0;
    const double t = r.nextDouble();
    if (hasT) m.threshold = t;
    r.expect("combiner");
    if (r.nextInt() != 0) {
      LinearCombiner c;
      c.mode = parseCombinerMode(r.next());
      c.a = r.nextDouble();
      c.b = r.nextDouble();
      m.combiner = c;
    }
    r.expect("cvtables");
    const auto nt = r.nextInt();
    for (long long i = 0; i < nt; ++i) {
      r.expect("table");
      NamedTable tab;
      tab.name = r.next();
      const auto nr = r.nextInt();
      for (long long j = 0; j < nr; ++j) {
        r.expect("row");
        CvTableRow row;
        row.score = r.nextDouble();
        row.meanMAE = r.nextDouble();
        row.model = r.next();
        tab.rows.push_back(row);
      }
      m.cv.push_back(std::move(tab));
    }
    if (m.architecture == Architecture::Plain) m.plain = readEnsemble(r);
    else m.stack = StackModel::read(r);
    if (!r.atEnd()) throw Error("model: trailing content");
    return m;
  }
};

CvOptions cvOptions(const RunConfig& cfg, const PipelineOptions& opt) {
  CvOptions cv;
  cv.folds = cfg.folds;
  cv.seed = *cfg.seed;
  cv.metric = cfg.rankMetric;
  cv.jobs = opt.jobs;
  return cv;
}

// ---------------------------------------------------------------------------
// stages

void stageSelect(const RunConfig& cfg, const PipelineOptions& opt) {
  const Inputs in = loadInputs(cfg);
  std::vector<TokenSeq> task;
  for (const TaskData* d : {&in.train, &in.test})
    for (const auto& [src, tgt] : d->featureRows()) {
      task.push_back(src);
      task.push_back(tgt);
    }
  const Corpus corpus = loadCorpus(cfg.corpus);
  const InterpretantSet set = selectInterpretants(corpus, task, cfg.fda);
  writeFileAtomic(outPath(opt, artifact::kInterpretants),
                  header(cfg, {{"corpus", fileHash(cfg.corpus)}}) + formatInterpretants(set));
}

void stageResources(const RunConfig& cfg, const PipelineOptions& opt) {
  const std::string text = readArtifact(opt, artifact::kInterpretants);
  const std::string corpusHash = fileHash(cfg.corpus);
  if (requireTag(readTags(text), "corpus", artifact::kInterpretants) != corpusHash)
    throw Error("interpretants were selected from a different corpus file");
  const InterpretantSet set = parseInterpretants(text, outPath(opt, artifact::kInterpretants));
  const Corpus corpus = loadCorpus(cfg.corpus);
  std::vector<TokenSeq> selected;
  for (auto i : set.selectedIndices) {
    if (i >= corpus.sentences.size()) throw Error("interpretant index out of range for the corpus");
    selected.push_back(corpus.sentences[i]);
  }

  Resources res;
  res.weights = NGramWeightTable::build(selected, NGramWeightTable::kMaxOrder);
  LmConfig lm;
  lm.order = cfg.lmOrder;
  res.srcLm = LanguageModel::train(selected, lm);

  const Inputs in = loadInputs(cfg);
  std::vector<TokenSeq> tgtText = selected;
  std::set<std::string> seenTargets;
  for (const auto& [src, tgt] : in.train.featureRows())
    if (seenTargets.insert(tgt.joined()).second) tgtText.push_back(tgt);
  res.tgtLm = LanguageModel::train(tgtText, lm);

  std::vector<std::pair<TokenSeq, TokenSeq>> identity;
  identity.reserve(selected.size());
  for (const auto& s : selected) identity.emplace_back(s, s);
  res.aligner = AlignmentModel::train(identity, cfg.alignerIterations);

  const std::string body = res.serialize();
  const std::string fp = hex64(fnv1a(body));
  writeFileAtomic(outPath(opt, artifact::kResources),
                  header(cfg, {{"corpus", corpusHash},
                               {"interpretants", std::to_string(set.selectedIndices.size())},
                               {"resources", fp}}) +
                      body);
}

void stageFeatures(const RunConfig& cfg, const PipelineOptions& opt) {
  const LoadedResources lr = loadResources(opt);
  const Inputs in = loadInputs(cfg);
  for (auto [data, name] : {std::pair{&in.train, artifact::kTrainFeatures}, std::pair{&in.test, artifact::kTestFeatures}}) {
    FeatureMatrix m = buildFeatureMatrix(data->featureRows(), lr.res, opt.jobs);
    m.rowIds = data->rowIds();
    writeFileAtomic(outPath(opt, name), header(cfg, {{"resources", lr.fingerprint}}) + formatFeatureMatrix(m));
  }
}

void stageTrain(const RunConfig& cfg, const PipelineOptions& opt) {
  const LoadedResources lr = loadResources(opt);
  const Inputs in = loadInputs(cfg);
  const FeatureMatrix f = loadFeatures(opt, artifact::kTrainFeatures, lr.fingerprint, in.train.rowIds());
  const VectorXd gold = in.train.goldVector("training data");

  ModelFile model;
  model.task = cfg.task;
  model.architecture = cfg.architecture;
  model.goldStats = ScoreStats::of({gold.data(), static_cast<std::size_t>(gold.size())});
  const CvOptions cv = cvOptions(cfg, opt);
  VectorXd oof;

  if (cfg.architecture == Architecture::Plain) {
    const auto ranked = gridSearch(expandGrid(cfg.baseGrid, f.cols()), f.values, gold, cv);
    model.cv.push_back({"model", cvTable(ranked)});
    model.plain = fitTopK(ranked, cfg.topK, f.values, gold, opt.jobs);
    oof = topKOutOfFold(ranked, cfg.topK);
  } else {
    const PairedMatrix pm = splitPaired(f, in.train.ids);
    StackConfig sc;
    sc.baseGrid = expandGrid(cfg.baseGrid, f.cols());
    sc.finalGrid = expandGrid(cfg.finalGrid, 2 * f.cols() + 5);
    sc.topK = cfg.topK;
    sc.cv = cv;
    model.stack = cfg.architecture == Architecture::Combined ? trainCombinedStack(pm, gold, sc)
                                                             : trainSeparateStack(pm, gold, sc);
    if (!auditOutOfFold(model.stack.audit)) throw Error("out-of-fold audit failed");
    model.stack.resourceFingerprint = lr.fingerprint;
    for (std::size_t i = 0; i < model.stack.baseCv.size(); ++i) {
      const std::string name = model.stack.baseCv.size() == 1 ? "base" : (i == 0 ? "base_A" : "base_B");
      model.cv.push_back({name, model.stack.baseCv[i]});
    }
    model.cv.push_back({"final", model.stack.finalCv});
    oof = model.stack.finalOutOfFold;
    if (cfg.combiner) {
      model.combiner = fitLinearCombiner(model.stack.baseOutOfFold, gold, *cfg.combiner);
      oof = model.combiner->apply(model.stack.baseOutOfFold);
    }
  }
  model.scoreStats = ScoreStats::of({oof.data(), static_cast<std::size_t>(oof.size())});

  if (cfg.task == Task::Triples) {
    std::vector<int> labels;
    for (Eigen::Index i = 0; i < gold.size(); ++i) labels.push_back(gold(i) > 0.5 ? 1 : 0);
    switch (cfg.thresholdMode) {
      case ThresholdMode::None: break;
      case ThresholdMode::Fixed: model.threshold = cfg.threshold; break;
      case ThresholdMode::Optimized:
      case ThresholdMode::Grounded:
        model.threshold = optimizeThreshold({oof.data(), static_cast<std::size_t>(oof.size())}, labels).threshold;
        break;
    }
  }
  writeFileAtomic(outPath(opt, artifact::kModel), header(cfg, {{"resources", lr.fingerprint}}) + model.serialize());
}

ModelFile loadModel(const PipelineOptions& opt, const std::string& fingerprint) {
  const std::string text = readArtifact(opt, artifact::kModel);
  if (requireTag(readTags(text), "resources", artifact::kModel) != fingerprint)
    throw Error("model was trained with different resources (fingerprint mismatch)");
  return ModelFile::parse(stripComments(text));
}

void stagePredict(const RunConfig& cfg, const PipelineOptions& opt) {
  const LoadedResources lr = loadResources(opt);
  const ModelFile model = loadModel(opt, lr.fingerprint);
  if (model.task != cfg.task || model.architecture != cfg.architecture)
    throw Error("model task/architecture differ from the config");
  const Inputs in = loadInputs(cfg);
  const FeatureMatrix f = loadFeatures(opt, artifact::kTestFeatures, lr.fingerprint, in.test.rowIds());

  VectorXd scores;
  if (model.architecture == Architecture::Plain) {
    scores = model.plain.predict(f.values);
  } else {
    const PairedMatrix pm = splitPaired(f, in.test.ids);
    scores = model.combiner ? model.combiner->apply(predictBase(model.stack, pm)) : predictStack(model.stack, pm);
  }
  std::vector<double> s(scores.data(), scores.data() + scores.size());

  std::optional<std::vector<int>> classes;
  if (cfg.task == Task::Intensity) {
    if (cfg.groundPredictions) s = groundPredictions(s, model.goldStats);
    if (cfg.clip)
      for (double& v : s) v = std::clamp(v, 0.0, 1.0);
  } else if (model.threshold) {
    double t = *model.threshold;
    if (cfg.thresholdMode == ThresholdMode::Grounded) t = groundThreshold(t, model.scoreStats, ScoreStats::of(s));
    classes = classify(s, t);
  }

  std::ostringstream out;
  out << "id\tprediction" << (classes ? "\tclass" : "") << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << in.test.ids[i] << '\t' << formatFixed(s[i], 6);
    if (classes) out << '\t' << (*classes)[i];
    out << '\n';
  }
  writeFileAtomic(outPath(opt, artifact::kPredictions), header(cfg) + out.str());
}

void stageEvaluate(const RunConfig& cfg, const PipelineOptions& opt) {
  const LoadedResources lr = loadResources(opt);
  const ModelFile model = loadModel(opt, lr.fingerprint);
  MetricConfig mc;
  mc.mode = cfg.epsilonMode;
  mc.stepSize = cfg.epsilonStep;
  const EvaluationResult ev = evaluateFiles(outPath(opt, artifact::kPredictions), cfg.test, mc);

  std::ostringstream out;
  out << "[config]\n";
  for (const auto& [k, v] : cfg.canonical()) out << k << '\t' << v << '\n';
  out << "[resources]\n";
  for (const char* key : {"corpus", "interpretants", "resources"})
    out << key << '\t' << requireTag(lr.tags, key, artifact::kResources) << '\n';
  out << "[cv]\n";
  out << "table\trank\tmodel\tscore\tmae\n";
  for (const auto& t : model.cv)
    for (std::size_t i = 0; i < t.rows.size(); ++i)
      out << t.name << '\t' << i + 1 << '\t' << t.rows[i].model << '\t' << formatFixed(t.rows[i].score, 6) << '\t'
          << formatFixed(t.rows[i].meanMAE, 6) << '\n';
  if (model.threshold) out << "[decision]\nthreshold\t" << formatFixed(*model.threshold, 6) << '\n';
  out << "[metrics]\n" << ev.format();
  writeFileAtomic(outPath(opt, artifact::kReport), header(cfg) + out.str());
}

const std::map<std::string, std::vector<const char*>>& stageOutputs() {
  static const std::map<std::string, std::vector<const char*>> m{
      {"select-interpretants", {artifact::kInterpretants}},
      {"build-resources", {artifact::kResources}},
      {"extract-features", {artifact::kTrainFeatures, artifact::kTestFeatures}},
      {"train", {artifact::kModel}},
      {"predict", {artifact::kPredictions}},
      {"evaluate", {artifact::kReport}},
  };
  return m;
}

// ---------------------------------------------------------------------------
// evaluation input

struct PredictionRow {
  double value = 0.0;
  std::optional<int> cls;
};

std::vector<std::pair<std::string, PredictionRow>> readPredictions(const std::string& path) {
  const auto lines = readLines(path);
  std::vector<std::pair<std::string, PredictionRow>> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty() || lines[i][0] == '#') continue;
    const auto cols = splitTabs(lines[i]);
    if (cols[0] == "id") continue;
    if (cols.size() != 2 && cols.size() != 3) throw ParseError(path, i + 1, "expected id, prediction and optional class");
    PredictionRow r;
    try {
      r.value = parseDouble(cols[1]);
      if (cols.size() == 3) {
        const auto c = parseInt(cols[2]);
        if (c != 0 && c != 1) throw Error("class must be 0 or 1");
        r.cls = static_cast<int>(c);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(path, i + 1, e.what());
    }
    if (!seen.insert(cols[0]).second) throw ParseError(path, i + 1, "duplicate id '" + cols[0] + "'");
    out.emplace_back(cols[0], r);
  }
  return out;
}

std::vector<std::pair<std::string, std::optional<double>>> readGold(const std::string& path) {
  const auto lines = readLines(path);
  std::size_t i = 0;
  while (i < lines.size() && (trim(lines[i]).empty() || lines[i][0] == '#')) ++i;
  if (i == lines.size()) throw ParseError(path, 1, "empty gold file");
  const auto cols = splitTabs(lines[i]);
  std::vector<std::pair<std::string, std::optional<double>>> out;
  if (cols.size() == 5) {
    for (const auto& t : loadTripleDataset(path))
      out.emplace_back(t.id, t.gold ? std::optional<double>(*t.gold) : std::nullopt);
  } else if (cols.size() >= 3) {
    for (const auto& t : loadIntensityDataset(path)) out.emplace_back(t.id, t.gold);
  } else if (cols.size() == 2) {
    for (std::size_t j = i; j < lines.size(); ++j) {
      if (trim(lines[j]).empty() || lines[j][0] == '#') continue;
      const auto c = splitTabs(lines[j]);
      if (c.size() != 2) throw ParseError(path, j + 1, "expected id and gold columns");
      const std::string v = trim(c[1]);
      if (v == "NONE") {
        out.emplace_back(c[0], std::nullopt);
        continue;
      }
      try {
        out.emplace_back(c[0], parseDouble(v));
      } catch (const Error& e) {
        if (j == i) continue;  // header row
        throw ParseError(path, j + 1, e.what());
      }
    }
  } else {
    throw ParseError(path, i + 1, "unrecognized gold file layout");
  }
  return out;
}

}  // namespace

std::string EvaluationResult::format() const {
  std::ostringstream out;
  out << "scored\t" << scored << '\n';
  if (report) {
    out << report->format();
  } else {
    out << "absent\t" << absentReason << '\n';
    if (f1) out << "F1\t" << formatFixed(*f1, 6) << '\n';
  }
  return out.str();
}

EvaluationResult evaluateFiles(const std::string& predictionsPath, const std::string& goldPath,
                               const MetricConfig& metrics) {
  const auto preds = readPredictions(predictionsPath);
  const auto gold = readGold(goldPath);
  std::map<std::string, PredictionRow> byId(preds.begin(), preds.end());
  std::set<std::string> goldIds;
  for (const auto& [id, g] : gold) goldIds.insert(id);
  for (const auto& [id, p] : preds)
    if (!goldIds.count(id)) throw Error(predictionsPath + ": prediction for unknown id '" + id + "'");

  PredictionSet ps;
  ClassificationInputs classes;
  bool haveClasses = true, binary = true;
  for (const auto& [id, g] : gold) {
    if (!g) continue;
    auto it = byId.find(id);
    if (it == byId.end()) throw Error(predictionsPath + ": no prediction for id '" + id + "'");
    ps.predicted.push_back(it->second.value);
    ps.gold.push_back(*g);
    if (it->second.cls) classes.predicted.push_back(*it->second.cls);
    else haveClasses = false;
    if (*g != 0.0 && *g != 1.0) binary = false;
    else classes.gold.push_back(static_cast<int>(*g));
  }

  EvaluationResult res;
  res.scored = ps.size();
  if (ps.size() < 2) {
    res.absentReason = "fewer than 2 instances with gold values";
    return res;
  }
  std::optional<ClassificationInputs> cls;
  if (haveClasses && binary) {
    cls = classes;
    res.f1 = f1Binary(classes.predicted, classes.gold);
  }
  try {
    res.report = metricReport(ps, metrics, cls);
  } catch (const Error& e) {
    res.absentReason = e.what();
  }
  return res;
}

void runStage(const std::string& stage, const RunConfig& cfg, const PipelineOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  try {
    validateRunConfig(cfg);
    fs::create_directories(opt.outDir);
    if (stage == "select-interpretants") stageSelect(cfg, opt);
    else if (stage == "build-resources") stageResources(cfg, opt);
    else if (stage == "extract-features") stageFeatures(cfg, opt);
    else if (stage == "train") stageTrain(cfg, opt);
    else if (stage == "predict") stagePredict(cfg, opt);
    else if (stage == "evaluate") stageEvaluate(cfg, opt);
    else throw Error("unknown stage");
  } catch (const std::exception& e) {
    throw Error("stage '" + stage + "': " + e.what());
  }
  if (opt.timings) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    std::cerr << "stage " << stage << ": " << formatFixed(dt.count(), 3) << " s\n";
  }
}

void runPipeline(const RunConfig& cfg, const PipelineOptions& opt) {
  std::vector<std::string> written;
  try {
    for (const auto& stage : stageNames()) {
      for (const char* f : stageOutputs().at(stage)) written.push_back(outPath(opt, f));
      runStage(stage, cfg, opt);
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) {
      if (fs::is_regular_file(p, ec)) fs::remove(p, ec);
      if (fs::is_regular_file(p + ".tmp", ec)) fs::remove(p + ".tmp", ec);
    }
    throw;
  }
}

}  // namespace rtm
