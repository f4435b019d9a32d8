#include "slotfill/decode.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "slotfill/errors.hpp"

namespace slotfill {

namespace {

template <typename T>
struct Hypothesis {
  std::vector<int> tags;
  double log_prob = 0.0;
  LstmState<T> state;
};

struct Candidate {
  std::size_t parent;
  int tag;
  double score;
};

template <typename T>
double log_of(T p) {
  return std::log(static_cast<double>(p));
}

}  // namespace

template <typename T>
DecodeResult beam_decode(const ModelParams<T>& params, Mechanism mechanism,
                         std::span<const int> token_ids, std::size_t beam_size) {
  if (beam_size < 1) throw ContractError("beam_decode: beam size must be at least 1");
  Tape<T> tape(false);
  const ModelVars<T> model = bind(tape, params);
  const EncoderStates<T> enc = blstm_encode(model, token_ids);
  const ContextSource<T> contexts(model, enc, context_mode(mechanism));
  const std::size_t num_tags = params.config().num_tags;

  std::vector<Hypothesis<T>> live(1);
  live[0].state = init_decoder_state(model, enc);
  std::vector<Candidate> candidates;
  std::vector<LstmState<T>> next_states;

  for (std::size_t t = 1; t <= token_ids.size(); ++t) {
    candidates.clear();
    next_states.clear();
    for (std::size_t h = 0; h < live.size(); ++h) {
      const Hypothesis<T>& hyp = live[h];
      const int prev = hyp.tags.empty() ? kBeginTag : hyp.tags.back();
      const DecoderOutput<T> out =
          decoder_step(model, hyp.state, prev, contexts.at(t, hyp.state.h));
      next_states.push_back(out.state);
      const auto dist = out.dist.value();
      for (std::size_t k = 1; k < num_tags; ++k) {
        candidates.push_back({h, static_cast<int>(k), hyp.log_prob + log_of(dist[k])});
      }
    }
    const std::size_t keep = std::min(beam_size, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), [](const Candidate& a, const Candidate& b) {
                        if (a.score != b.score) return a.score > b.score;
                        if (a.tag != b.tag) return a.tag < b.tag;
                        return a.parent < b.parent;
                      });
    std::vector<Hypothesis<T>> next;
    next.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
      const Candidate& c = candidates[i];
      Hypothesis<T> hyp;
      hyp.tags = live[c.parent].tags;
      hyp.tags.push_back(c.tag);
      hyp.log_prob = c.score;
      hyp.state = next_states[c.parent];
      next.push_back(std::move(hyp));
    }
    live = std::move(next);
  }
  return {std::move(live[0].tags), live[0].log_prob};
}

template <typename T>
DecodeResult greedy_decode(const ModelParams<T>& params, Mechanism mechanism,
                           std::span<const int> token_ids) {
  Tape<T> tape(false);
  const ModelVars<T> model = bind(tape, params);
  const EncoderStates<T> enc = blstm_encode(model, token_ids);
  const ContextSource<T> contexts(model, enc, context_mode(mechanism));
  LstmState<T> s = init_decoder_state(model, enc);
  DecodeResult result;
  int prev = kBeginTag;
  for (std::size_t t = 1; t <= token_ids.size(); ++t) {
    const DecoderOutput<T> out = decoder_step(model, s, prev, contexts.at(t, s.h));
    const auto dist = out.dist.value();
    std::size_t best = 1;
    for (std::size_t k = 2; k < dist.size(); ++k) {
      if (log_of(dist[k]) > log_of(dist[best])) best = k;
    }
    result.tags.push_back(static_cast<int>(best));
    result.log_prob += log_of(dist[best]);
    prev = static_cast<int>(best);
    s = out.state;
  }
  return result;
}

template <typename T>
double sequence_log_prob(const ModelParams<T>& params, Mechanism mechanism,
                         std::span<const int> token_ids, std::span<const int> tags) {
  Tape<T> tape(false);
  const ModelVars<T> model = bind(tape, params);
  const auto dists =
      teacher_forced_distributions(model, context_mode(mechanism), token_ids, tags);
  double total = 0.0;
  for (std::size_t t = 0; t < dists.size(); ++t) {
    total += log_of(dists[t].value()[static_cast<std::size_t>(tags[t])]);
  }
  return total;
}

template <typename T>
std::vector<std::vector<std::string>> decode_corpus(const ModelParams<T>& params,
                                                    Mechanism mechanism,
                                                    const TagVocabulary& tags,
                                                    const Corpus& corpus, std::size_t beam_size,
                                                    std::size_t jobs) {
  std::vector<std::vector<std::string>> out(corpus.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < corpus.size(); i += stride) {
      const Sentence& s = corpus[i].sentence;
      if (s.token_ids.size() != s.tokens.size()) {
        throw ContractError("decode_corpus: sentence " + std::to_string(i) + " is not encoded");
      }
      const DecodeResult r = beam_decode(params, mechanism, s.token_ids, beam_size);
      out[i].reserve(r.tags.size());
      for (int id : r.tags) out[i].push_back(tags.tag(id));
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, corpus.size()));
  if (jobs == 1) {
    work(0, 1);
    return out;
  }
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> threads;
  for (std::size_t j = 0; j < jobs; ++j) {
    threads.emplace_back([&, j] {
      try {
        work(j, jobs);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

template <typename T>
F1Report evaluate(const ModelParams<T>& params, Mechanism mechanism, const TagVocabulary& tags,
                  const Corpus& corpus, std::size_t beam_size, std::size_t jobs) {
  const auto predicted = decode_corpus(params, mechanism, tags, corpus, beam_size, jobs);
  std::vector<std::vector<std::string>> gold;
  gold.reserve(corpus.size());
  for (const LabeledSentence& s : corpus) gold.push_back(s.tags.tags);
  F1Report report = f1_score(gold, predicted);
  report.beam_size = beam_size;
  return report;
}

#define SLOTFILL_INSTANTIATE(T)                                                                 \
  template DecodeResult beam_decode(const ModelParams<T>&, Mechanism, std::span<const int>,    \
                                    std::size_t);                                              \
  template DecodeResult greedy_decode(const ModelParams<T>&, Mechanism, std::span<const int>); \
  template double sequence_log_prob(const ModelParams<T>&, Mechanism, std::span<const int>,    \
                                    std::span<const int>);                                     \
  template std::vector<std::vector<std::string>> decode_corpus(                                \
      const ModelParams<T>&, Mechanism, const TagVocabulary&, const Corpus&, std::size_t,      \
      std::size_t);                                                                            \
  template F1Report evaluate(const ModelParams<T>&, Mechanism, const TagVocabulary&,           \
                             const Corpus&, std::size_t, std::size_t);

SLOTFILL_INSTANTIATE(float)
SLOTFILL_INSTANTIATE(double)
#undef SLOTFILL_INSTANTIATE

}  // namespace slotfill
