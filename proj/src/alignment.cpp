#include "rtm/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>

#include "rtm/error.hpp"
#include "rtm/text_io.hpp"

namespace rtm {

AlignmentModel AlignmentModel::train(const std::vector<std::pair<TokenSeq, TokenSeq>>& pairs, int iterations) {
  if (pairs.empty()) throw Error("trainAligner: no sentence pairs");
  if (iterations < 0) throw Error("trainAligner: negative iteration count");

  // Dense ids keep the E-step cheap; the table is keyed by string afterwards.
  std::unordered_map<std::string, int> srcId{{kNull, 0}}, tgtId;
  std::vector<std::string> srcWords{kNull}, tgtWords;
  std::vector<std::pair<std::vector<int>, std::vector<int>>> data;
  data.reserve(pairs.size());
  for (const auto& [src, tgt] : pairs) {
    std::vector<int> s{0}, t;
    for (const auto& w : src.tokens) {
      auto [it, ins] = srcId.emplace(w, static_cast<int>(srcWords.size()));
      if (ins) srcWords.push_back(w);
      s.push_back(it->second);
    }
    for (const auto& w : tgt.tokens) {
      auto [it, ins] = tgtId.emplace(w, static_cast<int>(tgtWords.size()));
      if (ins) tgtWords.push_back(w);
      t.push_back(it->second);
    }
    data.emplace_back(std::move(s), std::move(t));
  }

  // t[e] maps target id -> probability, restricted to co-occurring pairs.
  std::vector<std::map<int, double>> t(srcWords.size());
  const double init = tgtWords.empty() ? 0.0 : 1.0 / static_cast<double>(tgtWords.size());
  for (const auto& [s, tg] : data)
    for (int e : s)
      for (int f : tg) t[e][f] = init;

  AlignmentModel model;
  model.iterations_ = iterations;
  auto logLikelihood = [&] {
    double ll = 0.0;
    for (const auto& [s, tg] : data)
      for (int f : tg) {
        double sum = 0.0;
        for (int e : s) sum += t[e][f];
        ll += std::log(sum / static_cast<double>(s.size()));
      }
    return ll;
  };

  for (int it = 0; it < iterations; ++it) {
    model.logLikelihoods_.push_back(logLikelihood());
    std::vector<std::map<int, double>> counts(srcWords.size());
    for (const auto& [s, tg] : data)
      for (int f : tg) {
        double denom = 0.0;
        for (int e : s) denom += t[e][f];
        if (denom <= 0.0) continue;
        for (int e : s) counts[e][f] += t[e][f] / denom;
      }
    for (std::size_t e = 0; e < t.size(); ++e) {
      double total = 0.0;
      for (const auto& [f, c] : counts[e]) total += c;
      if (total <= 0.0) continue;
      for (auto& [f, p] : t[e]) {
        auto c = counts[e].find(f);
        p = c == counts[e].end() ? 0.0 : c->second / total;
      }
    }
  }
  model.logLikelihoods_.push_back(logLikelihood());

  for (std::size_t e = 0; e < t.size(); ++e)
    for (const auto& [f, p] : t[e])
      if (p > 0.0) model.table_[srcWords[e]][tgtWords[f]] = p;
  return model;
}

double AlignmentModel::prob(const std::string& target, const std::string& source) const {
  auto it = table_.find(source);
  if (it == table_.end()) return 0.0;
  auto jt = it->second.find(target);
  return jt == it->second.end() ? 0.0 : jt->second;
}

std::vector<double> AlignmentModel::alignmentPosterior(const TokenSeq& src, const std::string& target) const {
  std::vector<double> post;
  post.push_back(prob(target, kNull));
  for (const auto& w : src.tokens) post.push_back(prob(target, w));
  double sum = 0.0;
  for (double p : post) sum += p;
  if (sum <= 0.0) {
    std::fill(post.begin(), post.end(), 0.0);
    post[0] = 1.0;
    return post;
  }
  for (double& p : post) p /= sum;
  return post;
}

std::size_t levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

AlignmentFeatures alignmentFeatures(const AlignmentModel& model, const TokenSeq& src, const TokenSeq& tgt) {
  if (tgt.empty()) return {};
  std::vector<std::string> aligned;
  std::vector<bool> covered(src.size(), false);
  std::size_t linked = 0;
  for (std::size_t i = 0; i < tgt.size(); ++i) {
    const auto& f = tgt.tokens[i];
    // null wins ties so unknown words stay unaligned; ties between source
    // positions (repeated words) go to the one nearest the diagonal
    const double diagonal = (static_cast<double>(i) + 0.5) * static_cast<double>(src.size()) /
                                static_cast<double>(tgt.size()) - 0.5;
    double best = model.prob(f, AlignmentModel::kNull);
    std::ptrdiff_t bestPos = -1;
    for (std::size_t j = 0; j < src.size(); ++j) {
      const double p = model.prob(f, src.tokens[j]);
      const bool closer = bestPos >= 0 && std::abs(static_cast<double>(j) - diagonal) <
                                              std::abs(static_cast<double>(bestPos) - diagonal);
      if (p > best || (p == best && closer)) {
        best = p;
        bestPos = static_cast<std::ptrdiff_t>(j);
      }
    }
    if (bestPos >= 0) {
      aligned.push_back(src.tokens[static_cast<std::size_t>(bestPos)]);
      covered[static_cast<std::size_t>(bestPos)] = true;
      ++linked;
    }
  }
  AlignmentFeatures out;
  const double wer = static_cast<double>(levenshtein(aligned, src.tokens)) /
                     static_cast<double>(std::max<std::size_t>(src.size(), 1));
  out.oneMinusWER = std::clamp(1.0 - wer, 0.0, 1.0);
  const double tgtLinked = static_cast<double>(linked) / static_cast<double>(tgt.size());
  const double srcCovered =
      src.empty() ? 0.0
                  : static_cast<double>(std::count(covered.begin(), covered.end(), true)) /
                        static_cast<double>(src.size());
  out.alignF1 = (tgtLinked + srcCovered) > 0.0 ? 2.0 * tgtLinked * srcCovered / (tgtLinked + srcCovered) : 0.0;
  out.alignF1 = std::clamp(out.alignF1, 0.0, 1.0);
  return out;
}

std::string AlignmentModel::serialize() const {
  std::ostringstream out;
  std::size_t n = 0;
  for (const auto& [e, row] : table_) n += row.size();
  out << "aligner " << iterations_ << ' ' << n << ' ' << logLikelihoods_.size() << '\n';
  for (double ll : logLikelihoods_) out << formatExact(ll) << '\n';
  for (const auto& [e, row] : table_)
    for (const auto& [f, p] : row) out << e << '\t' << f << '\t' << formatExact(p) << '\n';
  return out.str();
}

AlignmentModel AlignmentModel::deserialize(const std::vector<std::string>& lines, std::size_t& pos) {
  if (pos >= lines.size()) throw Error("aligner: unexpected end of input");
  const auto head = splitWhitespace(lines[pos++]);
  if (head.size() != 4 || head[0] != "aligner") throw Error("aligner: bad header");
  AlignmentModel m;
  m.iterations_ = static_cast<int>(parseInt(head[1]));
  const auto n = parseInt(head[2]);
  const auto nll = parseInt(head[3]);
  for (long long i = 0; i < nll; ++i) {
    if (pos >= lines.size()) throw Error("aligner: truncated");
    m.logLikelihoods_.push_back(parseDouble(lines[pos++]));
  }
  for (long long i = 0; i < n; ++i) {
    if (pos >= lines.size()) throw Error("aligner: truncated");
    const auto cols = splitTabs(lines[pos++]);
    if (cols.size() != 3) throw Error("aligner: bad entry");
    m.table_[cols[0]][cols[1]] = parseDouble(cols[2]);
  }
  return m;
}

}  // namespace rtm
