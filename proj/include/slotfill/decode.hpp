#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "slotfill/corpus.hpp"
#include "slotfill/metrics.hpp"
#include "slotfill/model.hpp"

namespace slotfill {

struct DecodeResult {
  std::vector<int> tags;  // tag ids, never the begin tag
  double log_prob = 0.0;  // sum of log probabilities of the chosen tags
};

/// Left-to-right beam search producing exactly one tag per input token.
/// Candidates are ranked by cumulative log-probability; ties go to the
/// lower tag id, then to the higher-ranked parent. No recombination.
template <typename T>
DecodeResult beam_decode(const ModelParams<T>& params, Mechanism mechanism,
                         std::span<const int> token_ids, std::size_t beam_size = 2);

/// Stepwise argmax, lower tag id on ties.
template <typename T>
DecodeResult greedy_decode(const ModelParams<T>& params, Mechanism mechanism,
                           std::span<const int> token_ids);

/// Log-probability the model assigns to a complete tag sequence. Sums in
/// the same order as the decoders, so equal sequences give equal scores.
template <typename T>
double sequence_log_prob(const ModelParams<T>& params, Mechanism mechanism,
                         std::span<const int> token_ids, std::span<const int> tags);

/// Decodes every sentence (ids must be encoded) and maps ids to tag strings.
/// Sentences are split across `jobs` threads sharing the read-only params.
template <typename T>
std::vector<std::vector<std::string>> decode_corpus(const ModelParams<T>& params,
                                                    Mechanism mechanism,
                                                    const TagVocabulary& tags,
                                                    const Corpus& corpus,
                                                    std::size_t beam_size = 2,
                                                    std::size_t jobs = 1);

/// Decodes an encoded, tagged corpus and scores it against its gold tags.
template <typename T>
F1Report evaluate(const ModelParams<T>& params, Mechanism mechanism, const TagVocabulary& tags,
                  const Corpus& corpus, std::size_t beam_size = 2, std::size_t jobs = 1);

}  // namespace slotfill
