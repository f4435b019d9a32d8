#pragma once

#include <cstddef>
#include <filesystem>

#include "slotfill/checkpoint.hpp"
#include "slotfill/corpus.hpp"

namespace slotfill {

/// Replaces the tags of `corpus` with model predictions. Unknown words map
/// to <unk>.
Corpus tag_corpus(const Checkpoint& checkpoint, const Corpus& corpus, std::size_t beam_size = 2,
                  std::size_t jobs = 1);

/// Reads CoNLL (token<TAB>tag, tags ignored) or one-token-per-line input and
/// writes token<TAB>predicted_tag with sentence breaks preserved. An empty
/// input produces an empty output. Returns the number of sentences tagged.
std::size_t tag_file(const Checkpoint& checkpoint, const std::filesystem::path& input,
                     const std::filesystem::path& output, std::size_t beam_size = 2,
                     std::size_t jobs = 1);

}  // namespace slotfill
