#include "slotfill/tagging.hpp"

#include "slotfill/decode.hpp"

namespace slotfill {

Corpus tag_corpus(const Checkpoint& checkpoint, const Corpus& corpus, std::size_t beam_size,
                  std::size_t jobs) {
  Corpus out = corpus;
  encode(out, checkpoint.vocab);
  const auto predicted = decode_corpus(checkpoint.params, checkpoint.params.config().mechanism,
                                       checkpoint.vocab.tags, out, beam_size, jobs);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].tags.tags = predicted[i];
    out[i].tags.tag_ids.clear();
    for (const std::string& t : predicted[i]) out[i].tags.tag_ids.push_back(checkpoint.vocab.tags.id(t));
  }
  return out;
}

std::size_t tag_file(const Checkpoint& checkpoint, const std::filesystem::path& input,
                     const std::filesystem::path& output, std::size_t beam_size, std::size_t jobs) {
  ConllOptions options;
  options.allow_empty = true;
  options.allow_untagged = true;
  const Corpus corpus = read_conll(input, options);
  const Corpus tagged = tag_corpus(checkpoint, corpus, beam_size, jobs);
  write_conll(output, tagged);
  return tagged.size();
}

}  // namespace slotfill
