#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace audit {

using TokenSeq = std::vector<std::string>;

// Lowercases ASCII letters and emits maximal runs of word characters
// (ASCII letters/digits plus any non-ASCII byte), allowing apostrophes that
// sit directly between letters, so "don't" stays one token. Pure and
// deterministic: equal inputs give equal token sequences.
TokenSeq tokenize(std::string_view text);

// Number of Unicode scalar values in a UTF-8 string (continuation bytes not counted).
std::size_t utf8_length(std::string_view s);

// Token -> dense index map. Tokens are sorted lexicographically (byte order)
// and indices are their sorted positions.
struct Vocabulary {
  std::vector<std::string> tokens;                         // sorted
  std::unordered_map<std::string, std::uint32_t> index;    // token -> position

  std::uint32_t size() const { return static_cast<std::uint32_t>(tokens.size()); }

  // -1 when the token is unknown
  std::int64_t find(const std::string& token) const {
    auto it = index.find(token);
    return it == index.end() ? -1 : static_cast<std::int64_t>(it->second);
  }
};

// Builds the vocabulary over the given documents, keeping tokens that appear in
// at least min_doc_freq distinct documents. Empty result raises DataError.
Vocabulary build_vocabulary(const std::vector<TokenSeq>& docs, std::size_t min_doc_freq = 1);

// Newline-delimited token list; index = line number.
void save_vocabulary(const Vocabulary& vocab, std::ostream& out);
Vocabulary load_vocabulary(std::istream& in);

// FNV-1a over tokens joined by '\n'; stable content fingerprint.
std::uint64_t vocabulary_hash(const Vocabulary& vocab);

}  // namespace audit
