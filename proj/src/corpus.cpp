#include "rtm/corpus.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "rtm/error.hpp"
#include "rtm/text_io.hpp"

namespace rtm {

namespace {

// Decodes one code point starting at s[i], advancing i. Invalid sequences
// decode byte-wise.
char32_t nextCodePoint(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  int len = 1;
  char32_t cp = b0;
  if (b0 >= 0xF0 && b0 < 0xF8) {
    len = 4;
    cp = b0 & 0x07;
  } else if (b0 >= 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if (b0 >= 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  }
  if (len > 1) {
    if (i + len > s.size()) {
      ++i;
      return b0;
    }
    for (int k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        ++i;
        return b0;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
  }
  i += len;
  return cp;
}

void appendUtf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

bool isSpace(char32_t c) {
  switch (c) {
    case U' ': case U'\t': case U'\n': case U'\v': case U'\f': case U'\r':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool isPunct(char32_t c) {
  return c < 0x80 && std::ispunct(static_cast<int>(c));
}

char32_t lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  return c;
}

}  // namespace

std::string TokenSeq::joined() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

TokenSeq tokenize(std::string_view text, const NormalizationConfig& cfg) {
  std::vector<char32_t> cps;
  for (std::size_t i = 0; i < text.size();) cps.push_back(nextCodePoint(text, i));

  TokenSeq seq;
  seq.charCount = cps.size();
  std::string word;
  auto flush = [&] {
    if (!word.empty()) seq.tokens.push_back(std::move(word));
    word.clear();
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t c = cps[i];
    if (isSpace(c)) {
      flush();
    } else if (isPunct(c)) {
      const bool attaches = (c == U'#' || c == U'@') && word.empty() && i + 1 < cps.size() &&
                            !isSpace(cps[i + 1]) && !isPunct(cps[i + 1]);
      if (attaches) {
        word += static_cast<char>(c);
      } else {
        flush();
        seq.tokens.emplace_back(1, static_cast<char>(c));
      }
    } else {
      appendUtf8(word, cfg.lowercase ? lower(c) : c);
    }
  }
  flush();
  return seq;
}

std::size_t ngramOrder(const NGram& g) {
  return g.empty() ? 0 : static_cast<std::size_t>(std::count(g.begin(), g.end(), ' ')) + 1;
}

std::vector<NGram> extractNGrams(const TokenSeq& seq, int n) {
  if (n < 1) throw Error("n-gram order must be >= 1");
  std::vector<NGram> out;
  const auto len = seq.tokens.size();
  const auto order = static_cast<std::size_t>(n);
  if (len < order) return out;
  out.reserve(len - order + 1);
  for (std::size_t i = 0; i + order <= len; ++i) {
    NGram g = seq.tokens[i];
    for (std::size_t k = 1; k < order; ++k) {
      g += ' ';
      g += seq.tokens[i + k];
    }
    out.push_back(std::move(g));
  }
  return out;
}

std::map<NGram, int> countNGrams(const TokenSeq& seq, int n) {
  std::map<NGram, int> counts;
  for (auto& g : extractNGrams(seq, n)) ++counts[g];
  return counts;
}

namespace {

bool isNone(const std::string& s) { return s == "NONE"; }

// Index of the first line that is neither blank nor a '#' comment.
std::size_t skipPreamble(const std::vector<std::string>& lines) {
  std::size_t i = 0;
  while (i < lines.size() && (trim(lines[i]).empty() || lines[i][0] == '#')) ++i;
  return i;
}

}  // namespace

std::vector<IntensityInstance> loadIntensityDataset(const std::string& path) {
  const auto lines = readLines(path);
  std::size_t i = skipPreamble(lines);
  if (i == lines.size()) throw ParseError(path, 1, "missing header row");
  if (splitTabs(lines[i]).size() < 3) throw ParseError(path, i + 1, "header must have at least 3 columns");

  std::vector<IntensityInstance> out;
  for (++i; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto cols = splitTabs(lines[i]);
    if (cols.size() != 3 && cols.size() != 4)
      throw ParseError(path, i + 1, "expected 3 or 4 tab-separated columns, got " + std::to_string(cols.size()));
    IntensityInstance inst;
    inst.id = cols[0];
    inst.text = cols[1];
    inst.source = tokenize(cols[1]);
    inst.affect = trim(cols[2]);
    if (inst.id.empty()) throw ParseError(path, i + 1, "empty id");
    if (cols.size() == 4 && !isNone(trim(cols[3]))) {
      double g;
      try {
        g = parseDouble(cols[3]);
      } catch (const Error& e) {
        throw ParseError(path, i + 1, e.what());
      }
      if (!(g >= 0.0 && g <= 1.0)) throw ParseError(path, i + 1, "gold score outside [0,1]: " + cols[3]);
      inst.gold = g;
    }
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<TripleInstance> loadTripleDataset(const std::string& path) {
  const auto lines = readLines(path);
  std::size_t i = skipPreamble(lines);
  std::vector<TripleInstance> out;
  bool first = true;
  for (; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto cols = splitTabs(lines[i]);
    if (first) {
      first = false;
      if (cols.size() == 5 && trim(cols[4]) == "label") continue;
    }
    if (cols.size() != 5)
      throw ParseError(path, i + 1, "expected 5 tab-separated columns, got " + std::to_string(cols.size()));
    TripleInstance t;
    t.id = cols[0];
    t.word1 = cols[1];
    t.word2 = cols[2];
    t.attributeText = cols[3];
    t.w1 = tokenize(cols[1]);
    t.w2 = tokenize(cols[2]);
    t.attribute = tokenize(cols[3]);
    if (t.id.empty()) throw ParseError(path, i + 1, "empty id");
    if (t.w1.empty() || t.w2.empty() || t.attribute.empty())
      throw ParseError(path, i + 1, "word1, word2 and attribute must be nonempty");
    const std::string label = trim(cols[4]);
    if (label == "0" || label == "1") {
      t.gold = label == "1" ? 1 : 0;
    } else if (!isNone(label)) {
      throw ParseError(path, i + 1, "label must be 0, 1 or NONE, got '" + label + "'");
    }
    out.push_back(std::move(t));
  }
  return out;
}

Lexicon loadLexicon(const std::string& path) {
  const auto lines = readLines(path);
  Lexicon lex;
  std::string current;
  std::map<std::string, std::set<std::string>> seenWords;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string line = trim(lines[i]);
    if (line.empty()) continue;
    if (line[0] == '#') {
      current = trim(std::string_view(line).substr(1));
      if (current.empty()) throw ParseError(path, i + 1, "empty emotion header");
      if (lex.contains(current)) throw ParseError(path, i + 1, "duplicate emotion section '" + current + "'");
      lex.emotions.push_back(current);
      lex.entries[current];
      continue;
    }
    if (current.empty()) throw ParseError(path, i + 1, "entry before any '#<emotion>' header");
    TokenSeq word = tokenize(line);
    if (word.empty()) continue;
    if (!seenWords[current].insert(word.joined()).second) continue;
    lex.entries[current].push_back(std::move(word));
  }
  if (lex.emotions.empty()) throw ParseError(path, lines.size() + 1, "lexicon has no emotion sections");
  for (const auto& e : lex.emotions)
    if (lex.entries[e].empty()) throw Error(path + ": emotion '" + e + "' has no entries");
  return lex;
}

Corpus loadCorpus(const std::string& path) {
  Corpus corpus;
  corpus.sourcePath = path;
  for (const auto& line : readLines(path)) {
    TokenSeq s = tokenize(line);
    if (!s.empty()) corpus.sentences.push_back(std::move(s));
  }
  return corpus;
}

std::string formatIntensityDataset(const std::vector<IntensityInstance>& data) {
  std::ostringstream out;
  out << "id\ttext\taffect\tscore\n";
  for (const auto& d : data)
    out << d.id << '\t' << d.text << '\t' << d.affect << '\t' << (d.gold ? formatExact(*d.gold) : "NONE") << '\n';
  return out.str();
}

std::string formatTripleDataset(const std::vector<TripleInstance>& data) {
  std::ostringstream out;
  out << "id\tword1\tword2\tattribute\tlabel\n";
  for (const auto& d : data)
    out << d.id << '\t' << d.word1 << '\t' << d.word2 << '\t' << d.attributeText << '\t'
        << (d.gold ? std::to_string(*d.gold) : "NONE") << '\n';
  return out.str();
}

std::string formatLexicon(const Lexicon& lex) {
  std::ostringstream out;
  for (const auto& e : lex.emotions) {
    out << '#' << e << '\n';
    for (const auto& w : lex.entries.at(e)) out << w.joined() << '\n';
  }
  return out.str();
}

TokenSeq lexiconToTarget(const Lexicon& lex, const std::vector<std::string>& emotions) {
  if (emotions.empty()) throw Error("lexiconToTarget: no emotions requested");
  TokenSeq out;
  std::set<std::string> done;
  std::size_t words = 0;
  for (const auto& e : emotions) {
    auto it = lex.entries.find(e);
    if (it == lex.entries.end()) throw Error("lexiconToTarget: unknown emotion '" + e + "'");
    if (!done.insert(e).second) continue;
    for (const auto& w : it->second) {
      out.tokens.insert(out.tokens.end(), w.tokens.begin(), w.tokens.end());
      out.charCount += w.charCount;
      ++words;
    }
  }
  // words are rendered as one sentence separated by single spaces
  if (words > 1) out.charCount += words - 1;
  return out;
}

}  // namespace rtm
