#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "slotfill/corpus.hpp"

namespace slotfill {

/// Template grammars producing ATIS-style flight queries with IOB slots.
enum class ToyGrammar {
  kCompact,  // 8 tags: O plus departure/arrival city, date (B/I) and airline (B)
  kFlights,  // ~20 slot types, multi-word values, varied slot order
};

ToyGrammar parse_grammar(std::string_view name);

/// Deterministic under `seed`.
Corpus generate_corpus(ToyGrammar grammar, std::size_t sentences, std::uint64_t seed);

}  // namespace slotfill
