#include "slotfill/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "slotfill/errors.hpp"
#include "slotfill/metrics.hpp"

namespace slotfill {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

bool is_space_only(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\v' || c == '\f';
  });
}

std::vector<std::pair<std::string, std::size_t>> sorted_by_frequency(
    const std::unordered_map<std::string, std::size_t>& counts) {
  std::vector<std::pair<std::string, std::size_t>> items(counts.begin(), counts.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return items;
}

std::uint64_t hash_list(const std::vector<std::string>& items) {
  std::uint64_t h = fnv1a64("");
  for (const std::string& s : items) {
    h = fnv1a64(s, h);
    h = fnv1a64(std::string_view("\n", 1), h);
  }
  return h;
}

}  // namespace

Corpus parse_conll(std::string_view text, std::string_view source, ConllOptions options) {
  const std::string src(source);
  Corpus corpus;
  LabeledSentence current;
  bool tagged_file = false, untagged_file = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;

  auto flush = [&]() {
    if (!current.sentence.tokens.empty()) corpus.push_back(std::move(current));
    current = LabeledSentence{};
  };

  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;

    if (!line.empty() && line.back() == '\r') {
      throw ParseError(src, line_no, "CR line ending; files must use LF");
    }
    if (line.empty()) {
      flush();
      continue;
    }
    if (is_space_only(line)) {
      throw ParseError(src, line_no, "whitespace-only line; sentence separators must be empty");
    }
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      if (!options.allow_untagged) {
        throw ParseError(src, line_no, "token without a tag (expected token<TAB>tag)");
      }
      untagged_file = true;
      if (current.sentence.tokens.empty()) current.line = line_no;
      current.sentence.tokens.emplace_back(line);
    } else {
      if (line.find('\t', tab + 1) != std::string_view::npos) {
        throw ParseError(src, line_no,
                         "column " + std::to_string(line.find('\t', tab + 1) + 1) +
                             ": more than two fields (expected token<TAB>tag)");
      }
      std::string_view token = line.substr(0, tab), tag = line.substr(tab + 1);
      if (token.empty()) throw ParseError(src, line_no, "column 1: empty token");
      if (tag.empty()) {
        throw ParseError(src, line_no, "column " + std::to_string(tab + 2) + ": empty tag");
      }
      tagged_file = true;
      if (current.sentence.tokens.empty()) current.line = line_no;
      current.sentence.tokens.emplace_back(token);
      current.tags.tags.emplace_back(tag);
    }
    if (tagged_file && untagged_file) {
      throw ParseError(src, line_no, "ragged input: tagged and untagged lines are mixed");
    }
  }
  flush();
  if (corpus.empty() && !options.allow_empty) throw ParseError(src, line_no, "no sentences in file");
  return corpus;
}

Corpus read_conll(const std::filesystem::path& path, ConllOptions options) {
  return parse_conll(read_file(path), path.string(), options);
}

std::string format_conll(const Corpus& corpus) {
  std::string out;
  for (const LabeledSentence& s : corpus) {
    const bool tagged = !s.tags.tags.empty();
    if (tagged && s.tags.tags.size() != s.sentence.tokens.size()) {
      throw ContractError("format_conll: sentence at line " + std::to_string(s.line) +
                          " has unequal token and tag counts");
    }
    for (std::size_t i = 0; i < s.sentence.tokens.size(); ++i) {
      out += s.sentence.tokens[i];
      if (tagged) {
        out += '\t';
        out += s.tags.tags[i];
      }
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

void write_conll(const std::filesystem::path& path, const Corpus& corpus) {
  write_file(path, format_conll(corpus));
}

WordVocabulary::WordVocabulary() : WordVocabulary(std::vector<std::string>{}) {}

WordVocabulary::WordVocabulary(std::vector<std::string> words) {
  if (words.empty()) words = {std::string(kPadToken), std::string(kUnkToken)};
  if (words.size() < 2 || words[kPad] != kPadToken || words[kUnk] != kUnkToken) {
    throw LoadError("word vocabulary must start with <pad> and <unk>");
  }
  words_ = std::move(words);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], static_cast<int>(i)).second) {
      throw LoadError("duplicate word '" + words_[i] + "' in vocabulary");
    }
  }
}

int WordVocabulary::id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? kUnk : it->second;
}

std::uint64_t WordVocabulary::hash() const { return hash_list(words_); }

TagVocabulary::TagVocabulary() : TagVocabulary(std::vector<std::string>{}) {}

TagVocabulary::TagVocabulary(std::vector<std::string> tags) {
  if (tags.empty()) tags = {std::string(kBeginToken)};
  if (tags[0] != kBeginToken) throw LoadError("tag vocabulary must start with <s>");
  tags_ = std::move(tags);
  for (std::size_t i = 0; i < tags_.size(); ++i) {
    if (!index_.emplace(tags_[i], static_cast<int>(i)).second) {
      throw LoadError("duplicate tag '" + tags_[i] + "' in vocabulary");
    }
  }
}

std::optional<int> TagVocabulary::find(std::string_view tag) const {
  auto it = index_.find(std::string(tag));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int TagVocabulary::id(std::string_view tag) const {
  auto found = find(tag);
  if (!found) throw ContractError("tag '" + std::string(tag) + "' is not in the tag vocabulary");
  return *found;
}

std::uint64_t TagVocabulary::hash() const { return hash_list(tags_); }

Vocabulary build_vocab(const Corpus& train, std::size_t min_count) {
  if (train.empty()) throw ContractError("build_vocab: empty training set");
  std::unordered_map<std::string, std::size_t> word_counts, tag_counts;
  for (const LabeledSentence& s : train) {
    for (const std::string& w : s.sentence.tokens) ++word_counts[w];
    for (const std::string& t : s.tags.tags) ++tag_counts[t];
  }
  std::vector<std::string> words{std::string(WordVocabulary::kPadToken),
                                 std::string(WordVocabulary::kUnkToken)};
  for (auto& [w, n] : sorted_by_frequency(word_counts)) {
    if (n >= min_count && w != WordVocabulary::kPadToken && w != WordVocabulary::kUnkToken) {
      words.push_back(w);
    }
  }
  std::vector<std::string> tags{std::string(TagVocabulary::kBeginToken)};
  for (auto& [t, n] : sorted_by_frequency(tag_counts)) {
    if (t != TagVocabulary::kBeginToken) tags.push_back(t);
  }
  return {WordVocabulary(std::move(words)), TagVocabulary(std::move(tags))};
}

void encode(Corpus& corpus, const Vocabulary& vocab) {
  for (LabeledSentence& s : corpus) {
    s.sentence.token_ids.clear();
    for (const std::string& w : s.sentence.tokens) s.sentence.token_ids.push_back(vocab.words.id(w));
    s.tags.tag_ids.clear();
    for (const std::string& t : s.tags.tags) s.tags.tag_ids.push_back(vocab.tags.find(t).value_or(-1));
  }
}

std::vector<std::string> validate_iob(std::span<const std::string> tags, IobMode mode) {
  std::vector<std::string> out(tags.begin(), tags.end());
  std::string prev_type;  // empty when outside a chunk
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::string& tag = out[i];
    if (tag == "O") {
      prev_type.clear();
      continue;
    }
    if (tag.size() < 3 || tag[1] != '-' || (tag[0] != 'B' && tag[0] != 'I')) {
      throw ValidationError(i + 1, "malformed tag '" + tag + "' (expected O, B-X or I-X)");
    }
    std::string type = tag.substr(2);
    if (tag[0] == 'I' && type != prev_type) {
      if (mode == IobMode::kStrict) {
        throw ValidationError(i + 1, "'" + tag + "' does not continue a " + type + " chunk");
      }
      out[i] = "B-" + type;
    }
    prev_type = std::move(type);
  }
  return out;
}

std::size_t SlotLexicon::size() const {
  std::size_t n = 0;
  for (const auto& [slot, vals] : values) n += vals.size();
  return n;
}

SlotLexicon harvest_lexicon(const Corpus& corpus) {
  SlotLexicon lex;
  for (const LabeledSentence& s : corpus) {
    if (s.tags.tags.empty()) continue;
    for (const ChunkSpan& c : extract_chunks(s.tags.tags)) {
      std::vector<std::string> value(s.sentence.tokens.begin() + static_cast<std::ptrdiff_t>(c.start),
                                     s.sentence.tokens.begin() + static_cast<std::ptrdiff_t>(c.end) + 1);
      lex.values[c.type].insert(std::move(value));
    }
  }
  return lex;
}

std::string format_lexicon(const SlotLexicon& lexicon) {
  std::string out;
  for (const auto& [slot, vals] : lexicon.values) {
    for (const auto& value : vals) {
      out += slot;
      out += '\t';
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (i) out += ' ';
        out += value[i];
      }
      out += '\n';
    }
  }
  return out;
}

SlotLexicon parse_lexicon(std::string_view text, std::string_view source) {
  SlotLexicon lex;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 == line.size()) {
      throw ParseError(std::string(source), line_no, "expected slot<TAB>value");
    }
    std::vector<std::string> value;
    std::istringstream words{std::string(line.substr(tab + 1))};
    for (std::string w; words >> w;) value.push_back(w);
    if (value.empty()) throw ParseError(std::string(source), line_no, "empty slot value");
    lex.values[std::string(line.substr(0, tab))].insert(std::move(value));
  }
  return lex;
}

Corpus augment(const Corpus& corpus, const SlotLexicon& lexicon, std::size_t factor, Rng& rng) {
  if (factor < 1) throw ConfigError("augmentation factor must be at least 1");
  // Flatten each type's value set once so sampling is index-based.
  std::map<std::string, std::vector<const std::vector<std::string>*>> pools;
  for (const auto& [slot, vals] : lexicon.values) {
    auto& pool = pools[slot];
    for (const auto& v : vals) pool.push_back(&v);
  }

  Corpus out;
  out.reserve(corpus.size() * factor);
  for (const LabeledSentence& s : corpus) {
    LabeledSentence original = s;
    out.push_back(original);
    if (factor == 1) continue;
    const std::vector<std::string> tags = validate_iob(s.tags.tags, IobMode::kRepair);
    const std::vector<ChunkSpan> chunks = extract_chunks(tags);
    for (std::size_t v = 1; v < factor; ++v) {
      LabeledSentence variant;
      variant.line = s.line;
      std::size_t next_chunk = 0;
      for (std::size_t i = 0; i < s.sentence.tokens.size();) {
        if (next_chunk < chunks.size() && chunks[next_chunk].start == i) {
          const ChunkSpan& c = chunks[next_chunk++];
          auto pool = pools.find(c.type);
          std::vector<std::string> value;
          if (pool == pools.end() || pool->second.empty()) {
            value.assign(s.sentence.tokens.begin() + static_cast<std::ptrdiff_t>(c.start),
                         s.sentence.tokens.begin() + static_cast<std::ptrdiff_t>(c.end) + 1);
          } else {
            value = *pool->second[static_cast<std::size_t>(rng.below(pool->second.size()))];
          }
          for (std::size_t k = 0; k < value.size(); ++k) {
            variant.sentence.tokens.push_back(value[k]);
            variant.tags.tags.push_back((k == 0 ? "B-" : "I-") + c.type);
          }
          i = c.end + 1;
        } else {
          variant.sentence.tokens.push_back(s.sentence.tokens[i]);
          variant.tags.tags.push_back(tags[i]);
          ++i;
        }
      }
      out.push_back(std::move(variant));
    }
  }
  return out;
}

std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double train_fraction, Rng& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("split fraction must lie strictly between 0 and 1");
  }
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(corpus.size())));
  std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> valid_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(valid_idx.begin(), valid_idx.end());
  std::pair<Corpus, Corpus> parts;
  for (std::size_t i : train_idx) parts.first.push_back(corpus[i]);
  for (std::size_t i : valid_idx) parts.second.push_back(corpus[i]);
  return parts;
}

}  // namespace slotfill
