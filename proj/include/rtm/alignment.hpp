#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rtm/corpus.hpp"

namespace rtm {

/// IBM Model 1 lexical translation table t(target | source) trained by EM
/// with a null source word.
class AlignmentModel {
 public:
  static constexpr const char* kNull = "<null>";

  AlignmentModel() = default;

  static AlignmentModel train(const std::vector<std::pair<TokenSeq, TokenSeq>>& pairs, int iterations = 5);

  /// t(target | source); source may be kNull. Zero for pairs never co-occurring.
  double prob(const std::string& target, const std::string& source) const;
  /// Posterior over alignment links of `target` to each source position,
  /// index 0 being the null word.
  std::vector<double> alignmentPosterior(const TokenSeq& src, const std::string& target) const;

  /// Corpus log-likelihood (natural log) before each EM update and after the last.
  const std::vector<double>& logLikelihoods() const { return logLikelihoods_; }
  int iterations() const { return iterations_; }
  bool trained() const { return !table_.empty(); }
  const std::map<std::string, std::map<std::string, double>>& table() const { return table_; }

  std::string serialize() const;
  static AlignmentModel deserialize(const std::vector<std::string>& lines, std::size_t& pos);

 private:
  int iterations_ = 0;
  std::map<std::string, std::map<std::string, double>> table_;  // source -> target -> t
  std::vector<double> logLikelihoods_;
};

inline AlignmentModel trainAligner(const std::vector<std::pair<TokenSeq, TokenSeq>>& pairs, int iterations = 5) {
  return AlignmentModel::train(pairs, iterations);
}

struct AlignmentFeatures {
  double oneMinusWER = 0.0;
  double alignF1 = 0.0;
};

/// Viterbi-aligns every target token to its best source token (or null) and
/// compares the aligned source sequence with the source.
AlignmentFeatures alignmentFeatures(const AlignmentModel& model, const TokenSeq& src, const TokenSeq& tgt);

std::size_t levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b);

}  // namespace rtm
