#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rtm/alignment.hpp"
#include "rtm/corpus.hpp"
#include "rtm/interpretant.hpp"
#include "rtm/language_model.hpp"

namespace rtm {

struct OverlapFeatures {
  double wprec = 0.0;
  double wrec = 0.0;
  double wF1 = 0.0;
  double wGM = 0.0;
  double plainRec = 0.0;
  double plainPrec = 0.0;
};

/// Likelihood-weighted overlap of the distinct n-grams of `src` and `tgt`
/// over the union of `orders`. Recall is the weight of target n-grams also
/// found in the source over the weight of all target n-grams; precision is
/// the same from the source side. N-grams missing from the table get that
/// order's floor weight. All outputs are 0 when either side has no n-grams.
OverlapFeatures weightedOverlap(const TokenSeq& src, const TokenSeq& tgt, const NGramWeightTable& weights,
                                const std::vector<int>& orders);

struct LmFeatures {
  double logprob = 0.0;  // log2, boundaries included
  double bpw = 0.0;      // -logprob / (len + 1)
  double oovRate = 0.0;
};

LmFeatures lmFeatures(const LanguageModel& lm, const TokenSeq& seq);

/// (src tokens, tgt tokens, src chars, tgt chars, token ratio, char ratio);
/// ratios are 0 when the target side is empty.
std::vector<double> lengthFeatures(const TokenSeq& src, const TokenSeq& tgt);

/// Everything feature extraction reads besides the two texts.
struct Resources {
  std::optional<NGramWeightTable> weights;
  std::optional<LanguageModel> srcLm;
  std::optional<LanguageModel> tgtLm;
  std::optional<AlignmentModel> aligner;

  std::string serialize() const;
  static Resources deserialize(const std::string& text);
};

/// Names of the 41 features, in vector order.
const std::vector<std::string>& featureManifest();

using FeatureVector = std::vector<double>;

FeatureVector extractFeatureVector(const TokenSeq& src, const TokenSeq& tgt, const Resources& res);

struct FeatureMatrix {
  std::vector<std::string> names;
  std::vector<std::string> rowIds;
  Eigen::MatrixXd values;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

using TextPair = std::pair<TokenSeq, TokenSeq>;

FeatureMatrix buildFeatureMatrix(const std::vector<TextPair>& rows, const Resources& res, int jobs = 1);

/// TSV: header "id<TAB>name..." then one row per line, values printed exactly.
std::string formatFeatureMatrix(const FeatureMatrix& m);
FeatureMatrix parseFeatureMatrix(const std::string& text, const std::string& path = "<features>");

}  // namespace rtm
