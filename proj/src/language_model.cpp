#include "rtm/language_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>

#include "rtm/error.hpp"
#include "rtm/text_io.hpp"

namespace rtm {

namespace {
constexpr std::uint32_t kUnkId = 0;
constexpr std::uint32_t kBosId = 1;
constexpr std::uint32_t kEosId = 2;
}  // namespace

void LanguageModel::appendId(Key& key, std::uint32_t id) {
  char buf[4];
  std::memcpy(buf, &id, 4);
  key.append(buf, 4);
}

std::uint32_t LanguageModel::addWord(const std::string& word) {
  auto [it, inserted] = ids_.emplace(word, static_cast<std::uint32_t>(words_.size()));
  if (inserted) words_.push_back(word);
  return it->second;
}

std::uint32_t LanguageModel::idOf(const std::string& word) const {
  auto it = ids_.find(word);
  return it == ids_.end() ? kUnkId : it->second;
}

bool LanguageModel::inVocabulary(const std::string& word) const {
  auto it = ids_.find(word);
  return it != ids_.end() && it->second != kUnkId && it->second != kBosId;
}

std::vector<std::string> LanguageModel::events() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (i != kBosId) out.push_back(words_[i]);
  return out;
}

void LanguageModel::addCount(const std::vector<std::uint32_t>& ids, std::size_t end, int length, long long c) {
  Key hist;
  for (std::size_t j = end + 1 - static_cast<std::size_t>(length); j < end; ++j) appendId(hist, ids[j]);
  Key full = hist;
  appendId(full, ids[end]);
  long long& cnt = counts_[length - 1][full];
  auto& stats = history_[length - 1][hist];
  if (cnt == 0) ++stats.types;
  cnt += c;
  stats.total += c;
}

LanguageModel LanguageModel::train(const std::vector<TokenSeq>& sentences, const LmConfig& cfg) {
  if (cfg.order < 1) throw Error("language model order must be >= 1");
  if (sentences.empty()) throw Error("language model needs at least one sentence");
  LanguageModel lm;
  lm.order_ = cfg.order;
  lm.unkSingletons_ = cfg.unkSingletons;
  lm.addWord(kUnk);
  lm.addWord(kBos);
  lm.addWord(kEos);

  std::map<std::string, long long> freq;
  if (cfg.unkSingletons)
    for (const auto& s : sentences)
      for (const auto& t : s.tokens) ++freq[t];

  lm.counts_.resize(static_cast<std::size_t>(cfg.order));
  lm.history_.resize(static_cast<std::size_t>(cfg.order));
  std::vector<std::uint32_t> ids;
  for (const auto& s : sentences) {
    ids.assign(1, kBosId);
    for (const auto& t : s.tokens)
      ids.push_back(cfg.unkSingletons && freq[t] == 1 ? kUnkId : lm.addWord(t));
    ids.push_back(kEosId);
    for (std::size_t i = 1; i < ids.size(); ++i) {
      const int maxLen = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(cfg.order), i + 1));
      for (int len = 1; len <= maxLen; ++len) lm.addCount(ids, i, len, 1);
    }
  }
  return lm;
}

LanguageModel LanguageModel::uniform(const std::vector<std::string>& words) {
  LanguageModel lm;
  lm.order_ = 1;
  lm.uniform_ = true;
  lm.addWord(kUnk);
  lm.addWord(kBos);
  lm.addWord(kEos);
  for (const auto& w : words) lm.addWord(w);
  return lm;
}

double LanguageModel::probIds(std::uint32_t word, const std::vector<std::uint32_t>& context, std::size_t end,
                              int historyLen) const {
  if (historyLen == 0) {
    const auto& uni = history_[0].find(Key());
    const double uniformP = 1.0 / eventCount();
    if (uni == history_[0].end()) return uniformP;
    Key k;
    appendId(k, word);
    auto it = counts_[0].find(k);
    const double c = it == counts_[0].end() ? 0.0 : static_cast<double>(it->second);
    const double n = static_cast<double>(uni->second.total);
    const double t = static_cast<double>(uni->second.types);
    return (c + t * uniformP) / (n + t);
  }
  Key hist;
  for (std::size_t j = end - static_cast<std::size_t>(historyLen); j < end; ++j) appendId(hist, context[j]);
  const double lowerP = probIds(word, context, end, historyLen - 1);
  auto hs = history_[historyLen].find(hist);
  if (hs == history_[historyLen].end()) return lowerP;
  Key full = hist;
  appendId(full, word);
  auto it = counts_[historyLen].find(full);
  const double c = it == counts_[historyLen].end() ? 0.0 : static_cast<double>(it->second);
  const double total = static_cast<double>(hs->second.total);
  const double types = static_cast<double>(hs->second.types);
  return (c + types * lowerP) / (total + types);
}

double LanguageModel::prob(const std::string& word, const std::vector<std::string>& history) const {
  if (!trained()) throw Error("language model is not trained");
  const std::uint32_t w = idOf(word);
  if (w == kBosId) throw Error("<s> is not a predictable event");
  if (uniform_) return 1.0 / eventCount();
  std::vector<std::uint32_t> ctx;
  for (const auto& h : history) ctx.push_back(idOf(h));
  const int len = static_cast<int>(std::min<std::size_t>(ctx.size(), static_cast<std::size_t>(order_ - 1)));
  return probIds(w, ctx, ctx.size(), len);
}

double LanguageModel::sentenceLog2Prob(const TokenSeq& seq) const {
  if (!trained()) throw Error("language model is not trained");
  std::vector<std::uint32_t> ids{kBosId};
  for (const auto& t : seq.tokens) ids.push_back(idOf(t));
  ids.push_back(kEosId);
  double lp = 0.0;
  for (std::size_t i = 1; i < ids.size(); ++i) {
    double p;
    if (uniform_) {
      p = 1.0 / eventCount();
    } else {
      const int len = static_cast<int>(std::min<std::size_t>(i, static_cast<std::size_t>(order_ - 1)));
      p = probIds(ids[i], ids, i, len);
    }
    lp += std::log2(p);
  }
  return lp;
}

std::string LanguageModel::serialize() const {
  std::ostringstream out;
  std::size_t total = 0;
  for (const auto& c : counts_) total += c.size();
  out << "lm " << order_ << ' ' << (uniform_ ? 1 : 0) << ' ' << (unkSingletons_ ? 1 : 0) << ' ' << words_.size()
      << ' ' << total << '\n';
  for (const auto& w : words_) out << w << '\n';
  std::vector<std::string> rows;
  for (std::size_t k = 0; k < counts_.size(); ++k)
    for (const auto& [key, c] : counts_[k]) {
      std::string row;
      for (std::size_t j = 0; j < key.size(); j += 4) {
        std::uint32_t id;
        std::memcpy(&id, key.data() + j, 4);
        if (j) row += ' ';
        row += words_[id];
      }
      rows.push_back(row + '\t' + std::to_string(c));
    }
  std::sort(rows.begin(), rows.end());
  for (const auto& r : rows) out << r << '\n';
  return out.str();
}

LanguageModel LanguageModel::deserialize(const std::vector<std::string>& lines, std::size_t& pos) {
  if (pos >= lines.size()) throw Error("lm: unexpected end of input");
  const auto head = splitWhitespace(lines[pos++]);
  if (head.size() != 6 || head[0] != "lm") throw Error("lm: bad header");
  LanguageModel lm;
  lm.order_ = static_cast<int>(parseInt(head[1]));
  lm.uniform_ = head[2] == "1";
  lm.unkSingletons_ = head[3] == "1";
  const auto nWords = parseInt(head[4]);
  const auto nCounts = parseInt(head[5]);
  if (lm.order_ < 1) throw Error("lm: bad order");
  for (long long i = 0; i < nWords; ++i) {
    if (pos >= lines.size()) throw Error("lm: truncated vocabulary");
    lm.addWord(lines[pos++]);
  }
  if (lm.uniform_) return lm;
  lm.counts_.resize(static_cast<std::size_t>(lm.order_));
  lm.history_.resize(static_cast<std::size_t>(lm.order_));
  std::vector<std::uint32_t> ids;
  for (long long i = 0; i < nCounts; ++i) {
    if (pos >= lines.size()) throw Error("lm: truncated counts");
    const auto cols = splitTabs(lines[pos++]);
    if (cols.size() != 2) throw Error("lm: bad count line");
    ids.clear();
    for (const auto& w : splitWhitespace(cols[0])) {
      auto it = lm.ids_.find(w);
      if (it == lm.ids_.end()) throw Error("lm: unknown word in counts: " + w);
      ids.push_back(it->second);
    }
    if (ids.empty() || ids.size() > static_cast<std::size_t>(lm.order_)) throw Error("lm: bad n-gram length");
    lm.addCount(ids, ids.size() - 1, static_cast<int>(ids.size()), parseInt(cols[1]));
  }
  return lm;
}

}  // namespace rtm
