#include "audit/tokenizer.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "audit/types.hpp"

namespace audit {

namespace {

// ASCII letters plus any byte of a non-ASCII code point count as letters;
// there is no Unicode case table here, so non-ASCII text passes through unchanged.
inline bool is_letter_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

inline bool is_word_byte(unsigned char c) {
  return is_letter_byte(c) || (c >= '0' && c <= '9');
}

}  // namespace

TokenSeq tokenize(std::string_view text) {
  TokenSeq out;
  std::string cur;
  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (is_word_byte(c)) {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                         : static_cast<char>(c));
    } else if (c == '\'' && !cur.empty() &&
               is_letter_byte(static_cast<unsigned char>(cur.back())) && i + 1 < n &&
               is_letter_byte(static_cast<unsigned char>(text[i + 1]))) {
      cur.push_back('\'');
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (const char ch : s) n += (static_cast<unsigned char>(ch) & 0xC0) != 0x80;
  return n;
}

Vocabulary build_vocabulary(const std::vector<TokenSeq>& docs, std::size_t min_doc_freq) {
  if (min_doc_freq == 0) throw ConfigError("build_vocabulary: min_doc_freq must be >= 1");
  std::unordered_map<std::string, std::size_t> doc_freq;
  std::unordered_set<std::string_view> seen;
  for (const TokenSeq& doc : docs) {
    seen.clear();
    for (const std::string& tok : doc) {
      if (seen.insert(tok).second) ++doc_freq[tok];
    }
  }
  Vocabulary vocab;
  vocab.tokens.reserve(doc_freq.size());
  for (const auto& [tok, df] : doc_freq) {
    if (df >= min_doc_freq) vocab.tokens.push_back(tok);
  }
  if (vocab.tokens.empty()) throw DataError("build_vocabulary: empty vocabulary");
  std::sort(vocab.tokens.begin(), vocab.tokens.end());
  vocab.index.reserve(vocab.tokens.size());
  for (std::uint32_t i = 0; i < vocab.tokens.size(); ++i) vocab.index.emplace(vocab.tokens[i], i);
  return vocab;
}

void save_vocabulary(const Vocabulary& vocab, std::ostream& out) {
  for (const std::string& tok : vocab.tokens) out << tok << '\n';
}

Vocabulary load_vocabulary(std::istream& in) {
  Vocabulary vocab;
  std::string line;
  while (std::getline(in, line)) vocab.tokens.push_back(line);
  if (vocab.tokens.empty()) throw DataError("load_vocabulary: empty vocabulary");
  if (!std::is_sorted(vocab.tokens.begin(), vocab.tokens.end()))
    throw DataError("load_vocabulary: tokens not sorted");
  for (std::uint32_t i = 0; i < vocab.tokens.size(); ++i) vocab.index.emplace(vocab.tokens[i], i);
  return vocab;
}

std::uint64_t vocabulary_hash(const Vocabulary& vocab) {
  std::uint64_t h = 14695981039346656037ULL;
  auto feed = [&h](unsigned char b) {
    h ^= b;
    h *= 1099511628211ULL;
  };
  for (const std::string& tok : vocab.tokens) {
    for (const char c : tok) feed(static_cast<unsigned char>(c));
    feed('\n');
  }
  return h;
}

}  // namespace audit
