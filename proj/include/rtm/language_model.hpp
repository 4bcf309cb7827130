#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "rtm/corpus.hpp"

namespace rtm {

struct LmConfig {
  int order = 3;
  /// Map words seen once in training to <unk> so the unknown symbol gets counts.
  bool unkSingletons = false;
};

/// Interpolated Witten-Bell n-gram model with sentence boundary markers and
/// an unknown-word symbol. The lowest level interpolates with the uniform
/// distribution over the vocabulary (every word, </s> and <unk>), so unseen
/// words keep nonzero probability.
class LanguageModel {
 public:
  static constexpr const char* kUnk = "<unk>";
  static constexpr const char* kBos = "<s>";
  static constexpr const char* kEos = "</s>";

  LanguageModel() = default;

  static LanguageModel train(const std::vector<TokenSeq>& sentences, const LmConfig& cfg = {});
  /// Model assigning equal probability to every word of `words`, </s> and <unk>.
  static LanguageModel uniform(const std::vector<std::string>& words);

  int order() const { return order_; }
  bool trained() const { return order_ > 0; }
  bool inVocabulary(const std::string& word) const;
  /// Predictable events: vocabulary words, </s> and <unk>.
  std::vector<std::string> events() const;

  /// P(word | history); only the last order-1 history words are used.
  /// Out-of-vocabulary words (in either position) map to <unk>.
  double prob(const std::string& word, const std::vector<std::string>& history) const;
  /// log2 P(<s> seq </s>), summed over every predicted token and </s>.
  double sentenceLog2Prob(const TokenSeq& seq) const;

  std::string serialize() const;
  static LanguageModel deserialize(const std::vector<std::string>& lines, std::size_t& pos);

 private:
  struct HistoryStats {
    long long total = 0;
    long long types = 0;
  };
  using Key = std::string;

  std::uint32_t idOf(const std::string& word) const;
  std::uint32_t addWord(const std::string& word);
  static void appendId(Key& key, std::uint32_t id);
  void addCount(const std::vector<std::uint32_t>& ids, std::size_t end, int length, long long c);
  double probIds(std::uint32_t word, const std::vector<std::uint32_t>& context, std::size_t end, int historyLen) const;
  double eventCount() const { return static_cast<double>(words_.size() - 1); }

  int order_ = 0;
  bool unkSingletons_ = false;
  bool uniform_ = false;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  // counts_[k] holds (k+1)-grams, history_[k] the stats of length-k histories
  std::vector<std::unordered_map<Key, long long>> counts_;
  std::vector<std::unordered_map<Key, HistoryStats>> history_;
};

inline LanguageModel trainLanguageModel(const std::vector<TokenSeq>& sentences, int order = 3) {
  LmConfig cfg;
  cfg.order = order;
  return LanguageModel::train(sentences, cfg);
}

}  // namespace rtm
