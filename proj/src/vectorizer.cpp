#include "audit/vectorizer.hpp"

#include <algorithm>

namespace audit {

CountVector vectorize(const TokenSeq& seq, const Vocabulary& vocab, std::uint64_t* oov_count) {
  std::vector<std::uint32_t> hits;
  hits.reserve(seq.size());
  std::uint64_t oov = 0;
  for (const std::string& tok : seq) {
    const std::int64_t idx = vocab.find(tok);
    if (idx < 0) {
      ++oov;
    } else {
      hits.push_back(static_cast<std::uint32_t>(idx));
    }
  }
  std::sort(hits.begin(), hits.end());
  CountVector out;
  out.total_tokens = hits.size();
  for (std::size_t i = 0; i < hits.size();) {
    std::size_t j = i;
    while (j < hits.size() && hits[j] == hits[i]) ++j;
    out.pairs.emplace_back(hits[i], static_cast<std::uint32_t>(j - i));
    i = j;
  }
  if (oov_count) *oov_count += oov;
  return out;
}

}  // namespace audit
