#include "slotfill/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "slotfill/corpus.hpp"
#include "slotfill/errors.hpp"

namespace slotfill {

std::vector<ChunkSpan> extract_chunks(std::span<const std::string> tags) {
  std::vector<ChunkSpan> chunks;
  std::string open_type;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string& tag = tags[i];
    const bool inside = tag.size() > 2 && tag[1] == '-' && (tag[0] == 'B' || tag[0] == 'I');
    if (!inside) {
      open_type.clear();
      continue;
    }
    std::string type = tag.substr(2);
    if (tag[0] == 'I' && !open_type.empty() && type == open_type) {
      chunks.back().end = i;
      continue;
    }
    chunks.push_back({type, i, i});
    open_type = std::move(type);
  }
  return chunks;
}

double ChunkCounts::precision() const {
  return predicted ? 100.0 * static_cast<double>(correct) / static_cast<double>(predicted) : 0.0;
}

double ChunkCounts::recall() const {
  return gold ? 100.0 * static_cast<double>(correct) / static_cast<double>(gold) : 0.0;
}

double ChunkCounts::f1() const {
  const double p = precision(), r = recall();
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

ChunkCounts& ChunkCounts::operator+=(const ChunkCounts& o) {
  gold += o.gold;
  predicted += o.predicted;
  correct += o.correct;
  return *this;
}

F1Report& F1Report::operator+=(const F1Report& o) {
  overall += o.overall;
  for (const auto& [type, counts] : o.by_type) by_type[type] += counts;
  tokens += o.tokens;
  correct_tags += o.correct_tags;
  sentences += o.sentences;
  return *this;
}

double round2(double percent) { return std::round(percent * 100.0) / 100.0; }

F1Report f1_score(const std::vector<std::vector<std::string>>& gold,
                  const std::vector<std::vector<std::string>>& predicted) {
  if (gold.size() != predicted.size()) {
    throw ContractError("f1_score: " + std::to_string(gold.size()) + " gold sentences but " +
                        std::to_string(predicted.size()) + " predictions");
  }
  F1Report report;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != predicted[s].size()) {
      throw ContractError("f1_score: sentence " + std::to_string(s) + " has " +
                          std::to_string(gold[s].size()) + " gold tags but " +
                          std::to_string(predicted[s].size()) + " predicted");
    }
    const auto g_tags = validate_iob(gold[s], IobMode::kRepair);
    const auto p_tags = validate_iob(predicted[s], IobMode::kRepair);
    const auto g = extract_chunks(g_tags);
    const auto p = extract_chunks(p_tags);
    for (const ChunkSpan& c : g) ++report.by_type[c.type].gold;
    for (const ChunkSpan& c : p) ++report.by_type[c.type].predicted;
    // Both lists are ordered by start position and non-overlapping.
    std::size_t i = 0, j = 0;
    while (i < g.size() && j < p.size()) {
      if (g[i].start < p[j].start) {
        ++i;
      } else if (p[j].start < g[i].start) {
        ++j;
      } else {
        if (g[i] == p[j]) ++report.by_type[g[i].type].correct;
        ++i;
        ++j;
      }
    }
    report.overall.gold += g.size();
    report.overall.predicted += p.size();
    for (std::size_t k = 0; k < g_tags.size(); ++k) {
      if (g_tags[k] == p_tags[k]) ++report.correct_tags;
    }
    report.tokens += g_tags.size();
    ++report.sentences;
  }
  for (const auto& [type, counts] : report.by_type) report.overall.correct += counts.correct;
  return report;
}

std::string format_report(const F1Report& report) {
  std::string out;
  out += fmt::format("# chunk scores; {} predictions{}\n",
                     report.repaired ? "IOB-repaired" : "raw",
                     report.beam_size ? fmt::format("; beam size {}", *report.beam_size) : "");
  const double accuracy = report.tokens ? 100.0 * static_cast<double>(report.correct_tags) /
                                              static_cast<double>(report.tokens)
                                        : 0.0;
  out += fmt::format("processed {} tokens with {} phrases; found: {} phrases; correct: {}.\n",
                     report.tokens, report.overall.gold, report.overall.predicted,
                     report.overall.correct);
  out += fmt::format("accuracy: {:6.2f}%; precision: {:6.2f}%; recall: {:6.2f}%; FB1: {:6.2f}\n",
                     accuracy, report.overall.precision(), report.overall.recall(),
                     report.overall.f1());
  for (const auto& [type, c] : report.by_type) {
    out += fmt::format("{:>17}: precision: {:6.2f}%; recall: {:6.2f}%; FB1: {:6.2f}  {}\n", type,
                       c.precision(), c.recall(), c.f1(), c.predicted);
  }
  return out;
}

nlohmann::json report_to_json(const F1Report& report) {
  auto counts = [](const ChunkCounts& c) {
    return nlohmann::json{{"gold", c.gold},
                          {"predicted", c.predicted},
                          {"correct", c.correct},
                          {"precision", round2(c.precision())},
                          {"recall", round2(c.recall())},
                          {"f1", round2(c.f1())}};
  };
  nlohmann::json j;
  j["overall"] = counts(report.overall);
  j["by_type"] = nlohmann::json::object();
  for (const auto& [type, c] : report.by_type) j["by_type"][type] = counts(c);
  j["tokens"] = report.tokens;
  j["correct_tags"] = report.correct_tags;
  j["sentences"] = report.sentences;
  j["repaired"] = report.repaired;
  j["beam_size"] = report.beam_size ? nlohmann::json(*report.beam_size) : nlohmann::json(nullptr);
  return j;
}

}  // namespace slotfill
