// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "slotfill/checkpoint.hpp"
#include "slotfill/decode.hpp"
#include "slotfill/gradcheck.hpp"
#include "slotfill/metrics.hpp"
#include "slotfill/synthetic.hpp"
#include "slotfill/tagging.hpp"
#include "slotfill/training.hpp"
#include "test_support.hpp"

namespace slotfill {
namespace {

namespace st = slotfill::testing;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += fmt::format("{}{:.2f}", out.empty() ? "" : " ", x);
  return out;
}

// 1. End-to-end gradients against central differences, frozen dropout.
Outcome gradient_oracle() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string where;
  std::size_t checked = 0;
  for (Mechanism m : {Mechanism::kAttention, Mechanism::kFocus}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto f = make_gradcheck_fixture(m, seed);
      const auto r = check_loss_gradients(f.params, context_mode(m), f.example, 0.5, seed);
      checked += r.checked;
      if (r.max_rel_error > worst) {
        worst = r.max_rel_error;
        where = fmt::format("{} seed {} {}[{}]", to_string(m), seed, r.worst_tensor, r.worst_index);
      }
    }
  }
  const double secs = seconds_since(start);
  return {worst < 1e-4 && secs < 60.0,
          fmt::format("max rel. error {:.2e} ({}) over {} values, 10 fixtures, {:.1f}s", worst,
                      where, checked, secs)};
}

// 2. One-hot attention reproduces focus step by step.
Outcome focus_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto f = st::random_fixture(Mechanism::kFocus, 2 + seed % 5, 10, 1000 + seed);
    Rng rng(seed);
    std::vector<int> gold(f.ids.size());
    for (int& g : gold) g = 1 + static_cast<int>(rng.below(f.params.config().num_tags - 1));
    Tape<double> tape(false);
    const auto model = bind(tape, f.params);
    const auto a = teacher_forced_distributions(model, ContextMode::kFocus,
                                                std::span<const int>(f.ids), std::span<const int>(gold));
    const auto b = teacher_forced_distributions(model, ContextMode::kAlignedAttention,
                                                std::span<const int>(f.ids), std::span<const int>(gold));
    for (std::size_t t = 0; t < a.size(); ++t) {
      for (std::size_t k = 0; k < a[t].size(); ++k) {
        worst = std::max(worst, std::abs(a[t].value()[k] - b[t].value()[k]));
      }
    }
  }
  return {worst <= 1e-12,
          fmt::format("max |focus - aligned attention| = {:.1e} over 50 fixtures, {:.2f}s", worst,
                      seconds_since(start))};
}

// 3. Beam search against greedy decoding and exhaustive enumeration.
Outcome beam_oracles() {
  const auto start = std::chrono::steady_clock::now();
  std::size_t greedy_ok = 0, exhaustive_ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Mechanism m = seed % 2 ? Mechanism::kFocus : Mechanism::kAttention;
    const auto f = st::random_fixture(m, 2 + seed % 6, 10, 2000 + seed);
    const auto b = beam_decode(f.params, m, std::span<const int>(f.ids), 1);
    const auto g = greedy_decode(f.params, m, std::span<const int>(f.ids));
    greedy_ok += b.tags == g.tags;
  }
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Mechanism m = seed % 2 ? Mechanism::kFocus : Mechanism::kAttention;
    const auto f = st::random_fixture(m, 3, 4, 3000 + seed);
    const std::size_t T = f.ids.size();
    const auto [best, score] = st::enumerate_best(3, T, [&](const std::vector<int>& tags) {
      return sequence_log_prob(f.params, m, std::span<const int>(f.ids), std::span<const int>(tags));
    });
    const auto b = beam_decode(f.params, m, std::span<const int>(f.ids),
                               static_cast<std::size_t>(std::pow(3, T)));
    exhaustive_ok += b.tags == best && b.log_prob == score;
  }
  const double secs = seconds_since(start);
  return {greedy_ok == 100 && exhaustive_ok == 50 && secs < 60.0,
          fmt::format("beam 1 = greedy on {}/100; full beam = enumeration on {}/50; {:.1f}s",
                      greedy_ok, exhaustive_ok, secs)};
}

// 4. Chunk scorer against an independent brute-force matcher.
Outcome scorer_oracle() {
  Rng rng(4);
  std::size_t agree = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto gold = st::random_tags(rng, 1 + rng.below(12));
    const auto pred = st::perturb_tags(rng, gold, 0.3);
    const auto expect = st::brute_force_counts({gold}, {pred});
    const F1Report r = f1_score({gold}, {pred});
    agree += r.overall.gold == expect.gold && r.overall.predicted == expect.predicted &&
             r.overall.correct == expect.correct && r.overall.f1() == st::brute_force_f1(expect);
  }
  const F1Report hand = f1_score({{"O", "O", "O", "B-dept", "O", "B-arr", "I-arr"}},
                                 {{"O", "O", "O", "B-dept", "O", "O", "O"}});
  const double p = round2(hand.overall.precision());
  const double r = round2(hand.overall.recall());
  const double f = round2(hand.overall.f1());
  return {agree == 1000 && p == 100.00 && r == 50.00 && f == 66.67,
          fmt::format("brute-force agreement {}/1000; hand case P={:.2f} R={:.2f} F1={:.2f}", agree,
                      p, r, f)};
}

// 5. Focus model memorizes a 50-sentence, 8-tag toy corpus.
Outcome overfitting_fixture() {
  const auto start = std::chrono::steady_clock::now();
  const Corpus corpus = generate_corpus(ToyGrammar::kCompact, 50, 1);
  const Vocabulary vocab = build_vocab(corpus);
  const std::size_t real_tags = vocab.tags.size() - 1;

  TrainConfig config;
  config.mechanism = Mechanism::kFocus;
  config.hidden_dim = 32;
  config.learning_rate = 0.008;
  config.epochs = 200;

  std::size_t reached = 0;
  std::vector<std::string> per_seed;
  std::optional<Checkpoint> memorized;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    config.seed = seed;
    int hit_epoch = 0;
    const auto record = train<double>(config, vocab, corpus, corpus, [&](const EpochStats& s) {
      if (round2(s.val_f1) == 100.00) hit_epoch = s.epoch;
      return hit_epoch == 0;
    });
    reached += hit_epoch > 0;
    per_seed.push_back(hit_epoch ? fmt::format("{}", hit_epoch) : "-");
    if (hit_epoch && !memorized) memorized = make_checkpoint(record.best_params, vocab);
  }

  // The memorized checkpoint, applied through the tagging path, reproduces
  // its training labels.
  double tagged_f1 = -1.0;
  if (memorized) {
    const Corpus tagged = tag_corpus(*memorized, corpus, 2);
    std::vector<std::vector<std::string>> gold, pred;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      gold.push_back(corpus[i].tags.tags);
      pred.push_back(tagged[i].tags.tags);
    }
    tagged_f1 = round2(f1_score(gold, pred).overall.f1());
  }
  const double secs = seconds_since(start);
  std::string epochs;
  for (const auto& e : per_seed) epochs += (epochs.empty() ? "" : " ") + e;
  return {real_tags == 8 && reached >= 4 && tagged_f1 == 100.00 && secs < 600.0,
          fmt::format("{} tags; train F1 100.00 reached by {}/5 seeds (epochs: {}); tagged F1 "
                      "{:.2f}; {:.0f}s",
                      real_tags, reached, epochs, tagged_f1, secs)};
}

// 6. With 50 training sentences, focus is not worse than attention.
Outcome direction_check() {
  const auto start = std::chrono::steady_clock::now();
  const Corpus corpus = generate_corpus(ToyGrammar::kFlights, 500, 2);
  TrainConfig config;
  config.hidden_dim = 32;
  config.learning_rate = 0.04;
  config.epochs = 60;

  std::vector<double> focus, attention;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng split_rng = Rng(seed).stream("split");
    split_rng.shuffle(order);
    Corpus train_set, valid_set, test_set;
    for (std::size_t i = 0; i < order.size(); ++i) {
      Corpus& dst = i < 50 ? train_set : i < 100 ? valid_set : test_set;
      dst.push_back(corpus[order[i]]);
    }
    const Vocabulary vocab = build_vocab(train_set);
    config.seed = seed;
    for (Mechanism m : {Mechanism::kFocus, Mechanism::kAttention}) {
      config.mechanism = m;
      const auto record = train<double>(config, vocab, train_set, valid_set);
      Corpus test = test_set;
      encode(test, vocab);
      const double f1 = evaluate(record.best_params, m, vocab.tags, test, 2).overall.f1();
      (m == Mechanism::kFocus ? focus : attention).push_back(round2(f1));
    }
  }
  const double mf = median(focus), ma = median(attention);
  return {mf >= ma,
          fmt::format("median test F1 focus {:.2f} vs attention {:.2f} (focus: {}; attention: {}); "
                      "{:.0f}s",
                      mf, ma, join(focus), join(attention), seconds_since(start))};
}

bool same_bits(const ModelParams<double>& a, const ModelParams<double>& b) {
  std::vector<double> va, vb;
  a.visit([&](const std::string&, const Tensor<double>& t) { va.insert(va.end(), t.data().begin(), t.data().end()); });
  b.visit([&](const std::string&, const Tensor<double>& t) { vb.insert(vb.end(), t.data().begin(), t.data().end()); });
  return va.size() == vb.size() && std::memcmp(va.data(), vb.data(), va.size() * sizeof(double)) == 0;
}

// 7. Invariant suite.
Outcome invariants() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> failed;
  auto check = [&](bool ok, const char* name) {
    if (!ok) failed.emplace_back(name);
  };

  {  // attention weights sum to one
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto f = st::random_fixture(Mechanism::kAttention, 4, 15, 4000 + seed, 2.0);
      Tape<double> tape(false);
      const auto model = bind(tape, f.params);
      const auto enc = blstm_encode(model, std::span<const int>(f.ids));
      ContextSource<double> source(model, enc, ContextMode::kAttention);
      auto s = init_decoder_state(model, enc);
      int prev = kBeginTag;
      for (std::size_t t = 1; t <= f.ids.size(); ++t) {
        const auto out = decoder_step(model, s, prev, source.at(t, s.h));
        double total = 0.0;
        for (double a : source.last_weights().back().value()) total += a;
        worst = std::max(worst, std::abs(total - 1.0));
        s = out.state;
        prev = 1 + static_cast<int>(seed + t) % 4;
      }
    }
    check(worst <= 1e-6, "attention normalization");
  }
  {  // decode length
    bool ok = true;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      const Mechanism m = seed % 2 ? Mechanism::kFocus : Mechanism::kAttention;
      const auto f = st::random_fixture(m, 4, 20, 5000 + seed, 0.2);
      const auto r = beam_decode(f.params, m, std::span<const int>(f.ids), 2);
      ok = ok && r.tags.size() == f.ids.size() &&
           std::find(r.tags.begin(), r.tags.end(), kBeginTag) == r.tags.end();
    }
    check(ok, "decode length");
  }
  {  // initialization range
    bool ok = true;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      ModelConfig c = st::small_config(seed % 2 ? Mechanism::kFocus : Mechanism::kAttention, 6, 50, 8);
      c.embedding_dim = 16;
      init_params<double>(c, seed, 0.2).visit([&](const std::string&, const Tensor<double>& t) {
        for (double x : t.data()) ok = ok && x > -0.2 && x < 0.2;
      });
    }
    check(ok, "init range");
  }
  {  // augmentation factor count
    bool ok = true;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Corpus c = generate_corpus(ToyGrammar::kFlights, 5 + seed, seed);
      const std::size_t factor = 1 + seed % 10;
      Rng rng(seed);
      ok = ok && augment(c, harvest_lexicon(c), factor, rng).size() == factor * c.size();
    }
    check(ok, "augment factor");
  }
  {  // CoNLL byte round trip
    bool ok = true;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Corpus base = generate_corpus(ToyGrammar::kFlights, 30, seed);
      Rng rng(seed);
      const std::string text = format_conll(augment(base, harvest_lexicon(base), 3, rng));
      ok = ok && format_conll(parse_conll(text)) == text;
    }
    check(ok, "conll round trip");
  }
  {  // checkpoint bit round trip, through a file
    bool ok = true;
    const auto path = std::filesystem::temp_directory_path() / "slotfill_acceptance.ckpt";
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const Mechanism m = seed % 2 ? Mechanism::kFocus : Mechanism::kAttention;
      const Vocabulary vocab = build_vocab(generate_corpus(ToyGrammar::kFlights, 40, seed));
      TrainConfig tc;
      tc.embedding_dim = tc.label_dim = 6;
      tc.hidden_dim = 5;
      tc.mechanism = m;
      tc.peephole = seed % 3 != 0;
      const auto params = init_params<double>(tc.model_config(vocab), seed, 0.2);
      save_checkpoint(path, make_checkpoint(params, vocab));
      const Checkpoint back = load_checkpoint(path);
      ok = ok && same_bits(params, back.params) && back.params.config() == params.config() &&
           back.vocab.words.hash() == vocab.words.hash();
    }
    std::filesystem::remove(path);
    check(ok, "checkpoint round trip");
  }
  {  // full training run determinism
    const Corpus all = generate_corpus(ToyGrammar::kFlights, 60, 8);
    const Corpus tr(all.begin(), all.begin() + 40), va(all.begin() + 40, all.end());
    const Vocabulary vocab = build_vocab(tr);
    TrainConfig config;
    config.embedding_dim = config.hidden_dim = config.label_dim = 16;
    config.epochs = 4;
    config.seed = 11;
    bool ok = true;
    for (Mechanism m : {Mechanism::kAttention, Mechanism::kFocus}) {
      config.mechanism = m;
      const auto a = train<double>(config, vocab, tr, va);
      const auto b = train<double>(config, vocab, tr, va);
      ok = ok && same_bits(a.best_params, b.best_params) && a.best_epoch == b.best_epoch;
      for (std::size_t i = 0; i < a.epochs.size(); ++i) {
        ok = ok && a.epochs[i].loss == b.epochs[i].loss && a.epochs[i].val_f1 == b.epochs[i].val_f1;
      }
    }
    check(ok, "training determinism");
  }

  const double secs = seconds_since(start);
  std::string names;
  for (const auto& n : failed) names += (names.empty() ? "" : ", ") + n;
  return {failed.empty() && secs < 300.0,
          failed.empty() ? fmt::format("7 invariant groups hold; {:.0f}s", secs)
                         : fmt::format("violated: {}; {:.0f}s", names, secs)};
}

}  // namespace
}  // namespace slotfill

int main() {
  using namespace slotfill;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient oracle", gradient_oracle},
      {"focus/attention equivalence", focus_equivalence},
      {"beam oracles", beam_oracles},
      {"scorer oracle", scorer_oracle},
      {"overfitting fixture", overfitting_fixture},
      {"focus >= attention, limited data", direction_check},
      {"invariant suite", invariants},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << fmt::format("{} [{}] {}: {}", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                             o.detail)
              << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failures, criteria.size())
            << std::endl;
  return failures;
}
