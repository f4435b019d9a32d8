#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "slotfill/rng.hpp"

namespace slotfill {

struct Sentence {
  std::vector<std::string> tokens;
  std::vector<int> token_ids;  // filled by encode()
  std::size_t length() const { return tokens.size(); }
};

struct TagSequence {
  std::vector<std::string> tags;
  std::vector<int> tag_ids;  // filled by encode(); -1 for tags unseen in training
};

struct LabeledSentence {
  Sentence sentence;
  TagSequence tags;    // empty for untagged input
  std::size_t line = 0;  // 1-based line of the first token in the source file
};

using Corpus = std::vector<LabeledSentence>;

struct ConllOptions {
  bool allow_empty = false;     // an empty file yields an empty corpus
  bool allow_untagged = false;  // lines may carry only a token
};

/// Reads token<TAB>tag lines with blank-line sentence separators.
Corpus read_conll(const std::filesystem::path& path, ConllOptions options = {});
Corpus parse_conll(std::string_view text, std::string_view source = "<input>",
                   ConllOptions options = {});
/// Canonical form: one token<TAB>tag line per token, each sentence followed
/// by one empty line. Untagged sentences are written token-only.
std::string format_conll(const Corpus& corpus);
void write_conll(const std::filesystem::path& path, const Corpus& corpus);

/// Word ids ordered by descending training frequency, ties broken
/// lexicographically. Id 0 is padding and id 1 is <unk>.
class WordVocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  WordVocabulary();
  /// Restores a vocabulary from its id-ordered word list.
  explicit WordVocabulary(std::vector<std::string> words);

  int id(std::string_view word) const;  // <unk> for unknown words
  const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  std::uint64_t hash() const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

/// Tag ids: 0 is the begin tag <s>, then tags by descending frequency with
/// lexicographic ties.
class TagVocabulary {
 public:
  static constexpr std::string_view kBeginToken = "<s>";

  TagVocabulary();
  explicit TagVocabulary(std::vector<std::string> tags);

  std::optional<int> find(std::string_view tag) const;
  int id(std::string_view tag) const;  // throws ContractError for unknown tags
  const std::string& tag(int id) const { return tags_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tags_.size(); }
  const std::vector<std::string>& tags() const { return tags_; }
  std::uint64_t hash() const;

 private:
  std::vector<std::string> tags_;
  std::unordered_map<std::string, int> index_;
};

struct Vocabulary {
  WordVocabulary words;
  TagVocabulary tags;
};

/// Words seen fewer than `min_count` times in training map to <unk>.
Vocabulary build_vocab(const Corpus& train, std::size_t min_count = 2);

/// Fills token_ids and tag_ids in place.
void encode(Corpus& corpus, const Vocabulary& vocab);

enum class IobMode { kStrict, kRepair };

/// Checks that tags are O, B-X or I-X and that every I-X continues a chunk
/// of type X. Repair mode rewrites a dangling I-X to B-X instead of failing.
std::vector<std::string> validate_iob(std::span<const std::string> tags, IobMode mode);

/// Slot type -> known multi-word values.
struct SlotLexicon {
  std::map<std::string, std::set<std::vector<std::string>>> values;

  std::size_t size() const;
  bool operator==(const SlotLexicon&) const = default;
};

SlotLexicon harvest_lexicon(const Corpus& corpus);
/// One `slot<TAB>value` line per entry; value tokens are space-joined.
std::string format_lexicon(const SlotLexicon& lexicon);
SlotLexicon parse_lexicon(std::string_view text, std::string_view source = "<input>");

/// Emits each sentence followed by factor-1 variants in which every slot
/// chunk is independently replaced by a value drawn uniformly from the
/// lexicon entries of its type. Tags of a replacement are regenerated as
/// B-X I-X ... over its tokens. Slot types absent from the lexicon keep
/// their value. Encoded ids are not carried over.
Corpus augment(const Corpus& corpus, const SlotLexicon& lexicon, std::size_t factor, Rng& rng);

/// Deterministic random split; each part keeps the original order.
std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double train_fraction, Rng& rng);

}  // namespace slotfill
