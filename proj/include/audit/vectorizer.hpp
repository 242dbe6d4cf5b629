#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "audit/tokenizer.hpp"

namespace audit {

// Sparse bag-of-words counts: (vocabulary index, count) pairs with strictly
// increasing indices. total_tokens counts in-vocabulary tokens only.
struct CountVector {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  std::uint64_t total_tokens = 0;
};

// Counts in-vocabulary tokens; out-of-vocabulary tokens are dropped and, when
// oov_count is given, tallied there (the counter is incremented, not reset).
CountVector vectorize(const TokenSeq& seq, const Vocabulary& vocab,
                      std::uint64_t* oov_count = nullptr);

}  // namespace audit
