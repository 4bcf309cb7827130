#pragma once

// Synthetic corpora and datasets for end-to-end runs. Gold values are derived
// from the pipeline's own similarity features: the datasets are first written
// with placeholder gold, features are extracted, and gold is filled in.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "rtm/config.hpp"
#include "rtm/error.hpp"
#include "rtm/features.hpp"
#include "rtm/pipeline.hpp"
#include "rtm/random.hpp"
#include "rtm/text_io.hpp"
#include "support.hpp"

namespace rtmtest {

inline std::string word(std::uint64_t i) { return "w" + std::to_string(i); }

struct SynthOptions {
  std::size_t train = 400;
  std::size_t test = 100;
  std::size_t vocabulary = 200;
  std::size_t lexiconWords = 10;
  std::size_t corpusSentences = 2000;
  double noise = 0.05;
  std::uint64_t seed = 1;
  bool testGold = true;
  /// Extra "key = value" lines appended to the generated config.
  std::string extraConfig;
};

inline std::string joinWords(const std::vector<std::string>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? " " : "") + w[i];
  return s;
}

inline std::string randomCorpus(rtm::Rng& rng, const SynthOptions& o) {
  std::string corpus;
  for (std::size_t s = 0; s < o.corpusSentences; ++s) {
    std::vector<std::string> w;
    const auto len = 5 + rng.below(12);
    for (std::uint64_t k = 0; k < len; ++k) w.push_back(word(rng.below(o.vocabulary)));
    corpus += joinWords(w) + "\n";
  }
  return corpus;
}

/// Column `name` of a feature file, keyed by row id.
inline std::map<std::string, double> featureColumn(const std::string& path, const std::string& name) {
  const auto m = rtm::parseFeatureMatrix(readText(path), path);
  const auto it = std::find(m.names.begin(), m.names.end(), name);
  if (it == m.names.end()) throw rtm::Error("no feature " + name);
  const auto col = static_cast<Eigen::Index>(it - m.names.begin());
  std::map<std::string, double> out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[m.rowIds[static_cast<std::size_t>(i)]] = m.values(i, col);
  return out;
}

inline void extractOnly(const std::string& configPath, const std::string& scratch) {
  const auto cfg = rtm::loadRunConfig(configPath);
  rtm::PipelineOptions opt;
  opt.outDir = scratch;
  for (const char* stage : {"select-interpretants", "build-resources", "extract-features"}) rtm::runStage(stage, cfg, opt);
}

/// Intensity data: texts mix lexicon words into random vocabulary words;
/// gold = wf1_123(text, lexicon) + N(0, noise), clamped to [0, 1].
/// Writes corpus.txt, lexicon.txt, train.tsv, test.tsv and run.cfg to `dir`.
inline std::string writeIntensityTask(const std::string& dir, const SynthOptions& o) {
  rtm::Rng rng(o.seed);
  std::string lex = "#joy\n";
  for (std::size_t i = 0; i < o.lexiconWords; ++i) lex += word(i) + "\n";
  writeText(dir + "/lexicon.txt", lex);
  writeText(dir + "/corpus.txt", randomCorpus(rng, o));

  struct Row {
    std::string id, text;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < o.train + o.test; ++i) {
    const double share = rng.uniform(0.0, 0.8);
    std::vector<std::string> w;
    const auto len = 6 + rng.below(9);
    for (std::uint64_t k = 0; k < len; ++k)
      w.push_back(rng.uniform() < share ? word(rng.below(o.lexiconWords)) : word(rng.below(o.vocabulary)));
    rows.push_back({(i < o.train ? "tr" : "te") + std::to_string(i), joinWords(w)});
  }
  auto writeSets = [&](const std::map<std::string, double>* gold) {
    for (int part = 0; part < 2; ++part) {
      std::string t = "id\ttext\taffect\tscore\n";
      const std::size_t lo = part == 0 ? 0 : o.train, hi = part == 0 ? o.train : o.train + o.test;
      for (std::size_t i = lo; i < hi; ++i) {
        std::string score = "0.5";
        if (gold) score = rtm::formatFixed(gold->at(rows[i].id), 6);
        if (part == 1 && !o.testGold) score = "NONE";
        t += rows[i].id + "\t" + rows[i].text + "\tjoy\t" + score + "\n";
      }
      writeText(dir + (part == 0 ? "/train.tsv" : "/test.tsv"), t);
    }
  };
  writeSets(nullptr);
  const std::string config = dir + "/run.cfg";
  writeText(config,
            "task = intensity\ncorpus = corpus.txt\ntrain = train.tsv\ntest = test.tsv\nlexicon = lexicon.txt\n"
            "seed = " + std::to_string(o.seed) + "\n" + o.extraConfig);

  const std::string scratch = dir + "/.gold";
  fs::create_directories(scratch);
  extractOnly(config, scratch);
  std::map<std::string, double> gold;
  for (const char* f : {rtm::artifact::kTrainFeatures, rtm::artifact::kTestFeatures})
    for (const auto& [id, v] : featureColumn(scratch + "/" + f, "wf1_123"))
      gold[id] = std::clamp(v + o.noise * rng.gaussian(), 0.0, 1.0);
  fs::remove_all(scratch);
  writeSets(&gold);
  return config;
}

struct TripleOptions {
  std::size_t train = 400;
  std::size_t test = 100;
  std::size_t vocabulary = 200;
  std::size_t corpusSentences = 2000;
  std::size_t phrase = 4;
  double tau = 0.375;  // sits in the gap between the 0.25 and 0.5 difference clusters
  std::uint64_t seed = 1;
  std::string architecture = "combined";
  std::string extraConfig;
};

/// Triples: w1, w2 and the attribute are short phrases; each side shares a
/// random number of attribute words. Label = 1 iff |wgm_1(w1, a) - wgm_1(w2, a)| > tau.
inline std::string writeTripleTask(const std::string& dir, const TripleOptions& o) {
  rtm::Rng rng(o.seed);
  SynthOptions so;
  so.vocabulary = o.vocabulary;
  so.corpusSentences = o.corpusSentences;
  writeText(dir + "/corpus.txt", randomCorpus(rng, so));

  struct Row {
    std::string id, w1, w2, a;
  };
  std::vector<Row> rows;
  auto phraseSharing = [&](const std::vector<std::string>& attr) {
    std::vector<std::string> out;
    const auto shared = rng.below(o.phrase + 1);
    for (std::uint64_t k = 0; k < shared; ++k) out.push_back(attr[k]);
    while (out.size() < o.phrase) out.push_back(word(rng.below(o.vocabulary)));
    rng.shuffle(out);
    return out;
  };
  for (std::size_t i = 0; i < o.train + o.test; ++i) {
    std::vector<std::string> attr;
    for (std::size_t k = 0; k < o.phrase; ++k) attr.push_back(word(rng.below(o.vocabulary)));
    rows.push_back({"t" + std::to_string(i), joinWords(phraseSharing(attr)), joinWords(phraseSharing(attr)),
                    joinWords(attr)});
  }
  auto writeSets = [&](const std::map<std::string, int>* gold) {
    for (int part = 0; part < 2; ++part) {
      std::string t = "id\tword1\tword2\tattribute\tlabel\n";
      const std::size_t lo = part == 0 ? 0 : o.train, hi = part == 0 ? o.train : o.train + o.test;
      for (std::size_t i = lo; i < hi; ++i) {
        const std::string label = gold ? std::to_string(gold->at(rows[i].id)) : "0";
        t += rows[i].id + "\t" + rows[i].w1 + "\t" + rows[i].w2 + "\t" + rows[i].a + "\t" + label + "\n";
      }
      writeText(dir + (part == 0 ? "/train.tsv" : "/test.tsv"), t);
    }
  };
  writeSets(nullptr);
  const std::string config = dir + "/run.cfg";
  writeText(config, "task = triples\ncorpus = corpus.txt\ntrain = train.tsv\ntest = test.tsv\narchitecture = " +
                        o.architecture + "\nseed = " + std::to_string(o.seed) + "\n" + o.extraConfig);

  const std::string scratch = dir + "/.gold";
  fs::create_directories(scratch);
  extractOnly(config, scratch);
  std::map<std::string, double> sim;
  for (const char* f : {rtm::artifact::kTrainFeatures, rtm::artifact::kTestFeatures})
    for (const auto& [id, v] : featureColumn(scratch + "/" + f, "wgm_1")) sim[id] = v;
  fs::remove_all(scratch);
  std::map<std::string, int> gold;
  for (const auto& r : rows) gold[r.id] = std::abs(sim.at(r.id + ":A") - sim.at(r.id + ":B")) > o.tau ? 1 : 0;
  writeSets(&gold);
  return config;
}

}  // namespace rtmtest
