#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rtm {

/// Normalized tokens of one text unit plus the character count of the
/// original text (Unicode code points, whitespace included).
struct TokenSeq {
  std::vector<std::string> tokens;
  std::size_t charCount = 0;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  /// Tokens joined by single spaces.
  std::string joined() const;

  bool operator==(const TokenSeq&) const = default;
};

struct NormalizationConfig {
  bool lowercase = true;
};

/// Lowercases (ASCII and Latin-1 letters), splits on Unicode whitespace and
/// splits every ASCII punctuation character into its own token. A leading
/// '#' or '@' stays attached to the word that follows it.
TokenSeq tokenize(std::string_view text, const NormalizationConfig& cfg = {});

/// An n-gram is its tokens joined by single spaces; tokens never contain
/// whitespace so the key is unambiguous and its order is recoverable.
using NGram = std::string;

std::size_t ngramOrder(const NGram& g);

/// Contiguous n-grams in sequence order, with multiplicity.
std::vector<NGram> extractNGrams(const TokenSeq& seq, int n);
/// The same n-grams as a count table.
std::map<NGram, int> countNGrams(const TokenSeq& seq, int n);

struct IntensityInstance {
  std::string id;
  std::string text;
  TokenSeq source;
  std::string affect;
  std::optional<double> gold;

  bool operator==(const IntensityInstance&) const = default;
};

struct TripleInstance {
  std::string id;
  std::string word1, word2, attributeText;
  TokenSeq w1, w2, attribute;
  std::optional<int> gold;

  bool operator==(const TripleInstance&) const = default;
};

/// Emotion label -> words, both in file order.
struct Lexicon {
  std::vector<std::string> emotions;
  std::map<std::string, std::vector<TokenSeq>> entries;

  bool contains(const std::string& emotion) const { return entries.count(emotion) > 0; }
};

struct Corpus {
  std::vector<TokenSeq> sentences;
  std::string sourcePath;
};

std::vector<IntensityInstance> loadIntensityDataset(const std::string& path);
std::vector<TripleInstance> loadTripleDataset(const std::string& path);
Lexicon loadLexicon(const std::string& path);
Corpus loadCorpus(const std::string& path);

std::string formatIntensityDataset(const std::vector<IntensityInstance>& data);
std::string formatTripleDataset(const std::vector<TripleInstance>& data);
std::string formatLexicon(const Lexicon& lex);

/// All words of the requested emotions, emotions in lexicon file order, as a
/// single sequence.
TokenSeq lexiconToTarget(const Lexicon& lex, const std::vector<std::string>& emotions);

}  // namespace rtm
