#include "rtm/interpretant.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "rtm/error.hpp"
#include "rtm/text_io.hpp"

namespace rtm {

InterpretantSet selectInterpretants(const Corpus& corpus, const std::vector<TokenSeq>& taskTexts,
                                    const FdaConfig& cfg) {
  if (taskTexts.empty()) throw Error("selectInterpretants: no task texts");
  if (cfg.budget == 0) throw Error("selectInterpretants: budget must be positive");
  if (cfg.budget > corpus.sentences.size())
    throw Error("selectInterpretants: budget " + std::to_string(cfg.budget) + " exceeds corpus size " +
                std::to_string(corpus.sentences.size()));
  if (!(cfg.decay > 0.0 && cfg.decay <= 1.0)) throw Error("selectInterpretants: decay must lie in (0,1]");
  if (cfg.maxN < 1) throw Error("selectInterpretants: maxN must be >= 1");
  if (cfg.lengthExponent < 0.0) throw Error("selectInterpretants: lengthExponent must be >= 0");

  std::unordered_map<NGram, std::size_t> featureId;
  for (const auto& t : taskTexts)
    for (int n = 1; n <= cfg.maxN; ++n)
      for (auto& g : extractNGrams(t, n)) featureId.emplace(std::move(g), featureId.size());
  std::vector<double> weight(featureId.size(), 1.0);

  // distinct task features per sentence, sorted so sums are order-stable
  const std::size_t nSent = corpus.sentences.size();
  std::vector<std::vector<std::size_t>> features(nSent);
  std::vector<double> norm(nSent);
  for (std::size_t s = 0; s < nSent; ++s) {
    const auto& sent = corpus.sentences[s];
    auto& f = features[s];
    for (int n = 1; n <= cfg.maxN; ++n)
      for (const auto& g : extractNGrams(sent, n))
        if (auto it = featureId.find(g); it != featureId.end()) f.push_back(it->second);
    std::sort(f.begin(), f.end());
    f.erase(std::unique(f.begin(), f.end()), f.end());
    norm[s] = sent.empty() ? 1.0 : std::pow(static_cast<double>(sent.size()), cfg.lengthExponent);
  }
  auto score = [&](std::size_t s) {
    double sum = 0.0;
    for (auto id : features[s]) sum += weight[id];
    return sum / norm[s];
  };

  // Scores only ever decrease, so stale heap entries are upper bounds and a
  // lazily refreshed max-heap yields the exact greedy order.
  struct Entry {
    double score;
    std::size_t index;
    bool operator<(const Entry& o) const {
      if (score != o.score) return score < o.score;
      return index > o.index;
    }
  };
  std::priority_queue<Entry> heap;
  for (std::size_t s = 0; s < nSent; ++s) heap.push({score(s), s});

  InterpretantSet out;
  while (out.selectedIndices.size() < cfg.budget) {
    Entry top = heap.top();
    heap.pop();
    const double current = score(top.index);
    Entry fresh{current, top.index};
    if (!heap.empty() && fresh < heap.top()) {
      heap.push(fresh);
      continue;
    }
    out.selectedIndices.push_back(top.index);
    out.selectionScores.push_back(current);
    for (auto id : features[top.index]) weight[id] *= cfg.decay;
  }
  return out;
}

std::string formatInterpretants(const InterpretantSet& set) {
  std::ostringstream out;
  out << "index\tscore\n";
  for (std::size_t i = 0; i < set.selectedIndices.size(); ++i)
    out << set.selectedIndices[i] << '\t' << formatExact(set.selectionScores[i]) << '\n';
  return out.str();
}

InterpretantSet parseInterpretants(const std::string& text, const std::string& path) {
  InterpretantSet set;
  std::istringstream in(text);
  std::string line;
  std::size_t lineNo = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      if (line == "index\tscore") continue;
    }
    const auto cols = splitTabs(line);
    if (cols.size() != 2) throw ParseError(path, lineNo, "expected index<TAB>score");
    try {
      const long long idx = parseInt(cols[0]);
      if (idx < 0) throw Error("negative index");
      set.selectedIndices.push_back(static_cast<std::size_t>(idx));
      set.selectionScores.push_back(parseDouble(cols[1]));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(path, lineNo, e.what());
    }
  }
  return set;
}

NGramWeightTable NGramWeightTable::build(const std::vector<TokenSeq>& sentences, int maxN) {
  if (maxN < 1 || maxN > kMaxOrder) throw Error("n-gram weight order must be in 1..3");
  NGramWeightTable table;
  table.maxN_ = maxN;
  for (const auto& s : sentences)
    for (int n = 1; n <= maxN; ++n)
      for (auto& g : extractNGrams(s, n)) {
        ++table.counts_[n - 1][g];
        ++table.totals_[n - 1];
      }
  if (table.totals_[0] == 0) throw Error("buildNGramWeights: all sentences are empty");
  return table;
}

double NGramWeightTable::floorWeight(int order) const {
  const long long t = (order >= 1 && order <= maxN_) ? totals_[order - 1] : 0;
  return 1.0 / (2.0 * static_cast<double>(std::max<long long>(t, 1)));
}

bool NGramWeightTable::contains(const NGram& g) const {
  const auto n = static_cast<int>(ngramOrder(g));
  return n >= 1 && n <= maxN_ && counts_[n - 1].count(g) > 0;
}

double NGramWeightTable::weight(const NGram& g) const {
  const auto n = static_cast<int>(ngramOrder(g));
  if (n >= 1 && n <= maxN_) {
    const auto& c = counts_[n - 1];
    if (auto it = c.find(g); it != c.end())
      return static_cast<double>(it->second) / static_cast<double>(totals_[n - 1]);
  }
  return floorWeight(n);
}

std::string NGramWeightTable::serialize() const {
  std::ostringstream out;
  out << "weights " << maxN_;
  for (int n = 0; n < maxN_; ++n) out << ' ' << counts_[n].size();
  out << '\n';
  for (int n = 0; n < maxN_; ++n)
    for (const auto& [g, c] : counts_[n]) out << g << '\t' << c << '\n';
  return out.str();
}

NGramWeightTable NGramWeightTable::deserialize(const std::vector<std::string>& lines, std::size_t& pos) {
  if (pos >= lines.size()) throw Error("weights: unexpected end of input");
  const auto head = splitWhitespace(lines[pos++]);
  if (head.size() < 2 || head[0] != "weights") throw Error("weights: bad header");
  NGramWeightTable table;
  table.maxN_ = static_cast<int>(parseInt(head[1]));
  if (table.maxN_ < 1 || table.maxN_ > kMaxOrder || head.size() != static_cast<std::size_t>(2 + table.maxN_))
    throw Error("weights: bad header");
  for (int n = 0; n < table.maxN_; ++n) {
    const auto count = parseInt(head[2 + n]);
    for (long long k = 0; k < count; ++k) {
      if (pos >= lines.size()) throw Error("weights: truncated");
      const auto cols = splitTabs(lines[pos++]);
      if (cols.size() != 2) throw Error("weights: bad entry");
      const long long c = parseInt(cols[1]);
      table.counts_[n][cols[0]] = c;
      table.totals_[n] += c;
    }
  }
  return table;
}

}  // namespace rtm
