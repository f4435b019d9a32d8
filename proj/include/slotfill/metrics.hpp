#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace slotfill {

/// A labelled chunk over 0-based inclusive token positions.
struct ChunkSpan {
  std::string type;
  std::size_t start = 0;
  std::size_t end = 0;

  auto operator<=>(const ChunkSpan&) const = default;
};

/// Chunks start at B-X and extend over following I-X of the same type. A
/// dangling I-X opens a new chunk, which is what repair-mode validation
/// would produce.
std::vector<ChunkSpan> extract_chunks(std::span<const std::string> tags);

struct ChunkCounts {
  std::size_t gold = 0;
  std::size_t predicted = 0;
  std::size_t correct = 0;

  double precision() const;  // percent; 0 when nothing was predicted
  double recall() const;     // percent; 0 when there is no gold chunk
  double f1() const;         // percent; 0 when P + R == 0

  ChunkCounts& operator+=(const ChunkCounts& o);
  bool operator==(const ChunkCounts&) const = default;
};

/// Micro-averaged chunk scores with a per-type breakdown.
struct F1Report {
  ChunkCounts overall;
  std::map<std::string, ChunkCounts> by_type;
  std::size_t tokens = 0;
  std::size_t correct_tags = 0;
  std::size_t sentences = 0;
  std::optional<std::size_t> beam_size;
  bool repaired = true;

  F1Report& operator+=(const F1Report& o);
};

/// Rounds a percentage to two decimals, as reported.
double round2(double percent);

/// Both sides are repaired before chunking. Throws ContractError naming
/// the first sentence whose lengths disagree.
F1Report f1_score(const std::vector<std::vector<std::string>>& gold,
                  const std::vector<std::vector<std::string>>& predicted);

/// conlleval-style summary block.
std::string format_report(const F1Report& report);
nlohmann::json report_to_json(const F1Report& report);

}  // namespace slotfill
