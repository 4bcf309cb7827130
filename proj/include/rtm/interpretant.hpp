#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "rtm/corpus.hpp"

namespace rtm {

/// Feature-decay instance selection settings.
struct FdaConfig {
  int maxN = 2;
  double decay = 0.5;
  std::size_t budget = 1000;
  double lengthExponent = 0.5;
};

struct InterpretantSet {
  std::vector<std::size_t> selectedIndices;
  std::vector<double> selectionScores;
};

/// Greedy feature-decay selection of corpus sentences close to the task
/// texts. Features are the task n-grams of orders 1..maxN, each starting at
/// weight 1. A sentence scores the summed weight of the distinct task
/// n-grams it contains divided by len^lengthExponent. Each round selects the
/// highest-scoring sentence (lowest index on ties) and multiplies the weight
/// of every feature it contains by `decay`.
InterpretantSet selectInterpretants(const Corpus& corpus, const std::vector<TokenSeq>& taskTexts,
                                    const FdaConfig& cfg);

std::string formatInterpretants(const InterpretantSet& set);
InterpretantSet parseInterpretants(const std::string& text, const std::string& path = "<interpretants>");

/// Relative n-gram frequencies of orders 1..3 over a sentence collection.
class NGramWeightTable {
 public:
  static constexpr int kMaxOrder = 3;

  NGramWeightTable() = default;
  /// Throws if every sentence is empty.
  static NGramWeightTable build(const std::vector<TokenSeq>& sentences, int maxN = kMaxOrder);

  /// count(g)/total(order of g), or the floor 1/(2*total) for unseen n-grams.
  double weight(const NGram& g) const;
  bool contains(const NGram& g) const;
  double floorWeight(int order) const;
  long long total(int order) const { return totals_.at(static_cast<std::size_t>(order - 1)); }
  const std::map<NGram, long long>& counts(int order) const { return counts_.at(static_cast<std::size_t>(order - 1)); }
  int maxOrder() const { return maxN_; }

  std::string serialize() const;
  static NGramWeightTable deserialize(const std::vector<std::string>& lines, std::size_t& pos);

  bool operator==(const NGramWeightTable&) const = default;

 private:
  int maxN_ = 0;
  std::array<std::map<NGram, long long>, kMaxOrder> counts_;
  std::array<long long, kMaxOrder> totals_{};
};

inline NGramWeightTable buildNGramWeights(const std::vector<TokenSeq>& sentences, int maxN = 3) {
  return NGramWeightTable::build(sentences, maxN);
}

}  // namespace rtm
