#pragma once

// Fixture generators and independent oracles shared by the unit tests and
// the acceptance runner.

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "slotfill/corpus.hpp"
#include "slotfill/model.hpp"
#include "slotfill/rng.hpp"
#include "slotfill/training.hpp"

namespace slotfill::testing {

struct ModelFixture {
  ModelParams<double> params;
  std::vector<int> ids;
};

/// Small random model. `real_tags` excludes the begin tag.
inline ModelConfig small_config(Mechanism mechanism, std::size_t real_tags,
                                std::size_t vocab = 10, std::size_t hidden = 4) {
  ModelConfig c;
  c.vocab_size = vocab;
  c.num_tags = real_tags + 1;
  c.embedding_dim = 3;
  c.hidden_dim = hidden;
  c.label_dim = 3;
  c.mechanism = mechanism;
  return c;
}

inline std::vector<int> random_ids(Rng& rng, std::size_t vocab, std::size_t length) {
  std::vector<int> ids(length);
  for (int& id : ids) id = 2 + static_cast<int>(rng.below(vocab - 2));
  return ids;
}

/// Random model and sentence of length 1..max_len. A wide init range keeps
/// the output distributions far from uniform so that score ties are rare.
inline ModelFixture random_fixture(Mechanism mechanism, std::size_t real_tags, std::size_t max_len,
                                   std::uint64_t seed, double range = 1.5) {
  Rng rng = Rng(seed).stream("fixture");
  const ModelConfig config = small_config(mechanism, real_tags);
  ModelFixture f{init_params<double>(config, rng.next_u64(), range), {}};
  f.ids = random_ids(rng, config.vocab_size, 1 + rng.below(max_len));
  return f;
}

/// Best sequence over all |Y|^T tag sequences by enumeration; ties keep the
/// lexicographically smallest sequence.
template <typename Score>
std::pair<std::vector<int>, double> enumerate_best(std::size_t real_tags, std::size_t length,
                                                  Score&& score) {
  std::vector<int> seq(length, 1);
  std::vector<int> best;
  double best_score = 0.0;
  while (true) {
    const double s = score(seq);
    if (best.empty() || s > best_score) {
      best = seq;
      best_score = s;
    }
    std::size_t i = length;
    while (i > 0 && seq[i - 1] == static_cast<int>(real_tags)) seq[--i] = 1;
    if (i == 0) break;
    ++seq[i - 1];
  }
  return {best, best_score};
}

/// Random IOB-ish tags over a few types, including dangling I- tags.
inline std::vector<std::string> random_tags(Rng& rng, std::size_t length) {
  static const char* const kTypes[] = {"loc", "date", "air"};
  std::vector<std::string> tags(length);
  for (std::string& t : tags) {
    const auto r = rng.below(7);
    if (r < 3) {
      t = "O";
    } else {
      t = std::string(r < 5 ? "B-" : "I-") + kTypes[rng.below(3)];
    }
  }
  return tags;
}

/// Perturbs a tag sequence: each tag is redrawn with probability p.
inline std::vector<std::string> perturb_tags(Rng& rng, const std::vector<std::string>& tags,
                                             double p) {
  std::vector<std::string> out = tags;
  const auto fresh = random_tags(rng, tags.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (rng.bernoulli(p)) out[i] = fresh[i];
  }
  return out;
}

/// Chunk membership by exhaustive search over (type, start, end): a span
/// is a chunk when it opens a chunk, every later token continues it, and
/// the following token does not.
inline std::set<std::tuple<std::string, std::size_t, std::size_t>> brute_force_chunks(
    const std::vector<std::string>& tags) {
  auto type_of = [](const std::string& t) { return t.size() > 2 ? t.substr(2) : std::string(); };
  auto is_inside = [&](std::size_t j, const std::string& x) { return tags[j] == "I-" + x; };
  auto opens = [&](std::size_t s, const std::string& x) {
    if (tags[s] == "B-" + x) return true;
    if (!is_inside(s, x)) return false;
    return s == 0 || (tags[s - 1] != "B-" + x && tags[s - 1] != "I-" + x);
  };
  std::set<std::string> types;
  for (const auto& t : tags) {
    if (t != "O") types.insert(type_of(t));
  }
  std::set<std::tuple<std::string, std::size_t, std::size_t>> chunks;
  const std::size_t n = tags.size();
  for (const std::string& x : types) {
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t e = s; e < n; ++e) {
        if (!opens(s, x)) continue;
        bool ok = true;
        for (std::size_t j = s + 1; j <= e; ++j) ok = ok && is_inside(j, x);
        if (!ok) continue;
        if (e + 1 < n && is_inside(e + 1, x)) continue;
        chunks.emplace(x, s, e);
      }
    }
  }
  return chunks;
}

struct BruteCounts {
  std::size_t gold = 0, predicted = 0, correct = 0;
};

inline BruteCounts brute_force_counts(const std::vector<std::vector<std::string>>& gold,
                                      const std::vector<std::vector<std::string>>& pred) {
  BruteCounts c;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto g = brute_force_chunks(gold[i]);
    const auto p = brute_force_chunks(pred[i]);
    c.gold += g.size();
    c.predicted += p.size();
    for (const auto& chunk : p) c.correct += g.count(chunk);
  }
  return c;
}

/// Percent F1 from raw counts, computed independently of ChunkCounts.
inline double brute_force_f1(const BruteCounts& c) {
  const double p = c.predicted ? 100.0 * c.correct / c.predicted : 0.0;
  const double r = c.gold ? 100.0 * c.correct / c.gold : 0.0;
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

inline LabeledSentence labeled(const std::vector<std::string>& tokens,
                               const std::vector<std::string>& tags) {
  LabeledSentence s;
  s.sentence.tokens = tokens;
  s.tags.tags = tags;
  return s;
}

}  // namespace slotfill::testing
