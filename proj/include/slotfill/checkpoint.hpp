#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "slotfill/corpus.hpp"
#include "slotfill/model.hpp"

namespace slotfill {

inline constexpr int kCheckpointVersion = 1;

/// Parameters plus everything needed to apply them to new text.
struct Checkpoint {
  ModelParams<double> params;
  Vocabulary vocab;
  std::map<std::string, std::string> info;  // free-form provenance (epoch, F1, ...)
};

/// Text container: a header line, the model configuration, vocabulary
/// hashes and lists, then each tensor by canonical name with its shape and
/// row-major values as hexadecimal floating point (bit-exact for 64-bit).
std::string format_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(std::string_view text, std::string_view source = "<input>");

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

template <typename T>
Checkpoint make_checkpoint(const ModelParams<T>& params, const Vocabulary& vocab,
                           std::map<std::string, std::string> info = {}) {
  return {params.template cast<double>(), vocab, std::move(info)};
}

}  // namespace slotfill
