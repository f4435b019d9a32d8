#include "slotfill/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "slotfill/decode.hpp"
#include "slotfill/errors.hpp"

namespace slotfill {

std::vector<double> default_learning_rate_grid() { return {0.004, 0.008, 0.016, 0.032, 0.04}; }

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be positive");
  }
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(init_range > 0.0)) throw ConfigError("init range must be positive");
  if (beam_size < 1) throw ConfigError("beam size must be at least 1");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  for (double lr : grid) {
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("grid learning rates must be positive");
  }
}

ModelConfig TrainConfig::model_config(const Vocabulary& vocab) const {
  ModelConfig m;
  m.vocab_size = vocab.words.size();
  m.num_tags = vocab.tags.size();
  m.embedding_dim = embedding_dim;
  m.hidden_dim = hidden_dim;
  m.label_dim = label_dim;
  m.decoder_dim = decoder_dim;
  m.scorer_dim = scorer_dim;
  m.peephole = peephole;
  m.mechanism = mechanism;
  m.validate();
  return m;
}

template <typename T>
ModelParams<T> init_params(const ModelConfig& config, std::uint64_t seed, double range) {
  ModelParams<T> params(config);
  Rng rng = Rng(seed).stream("init");
  params.visit([&](const std::string&, Tensor<T>& t) {
    for (T& v : t.data()) {
      // Rounding to float can land on the boundary; redraw in that case.
      do {
        v = static_cast<T>(rng.uniform(-range, range));
      } while (!(v > static_cast<T>(-range) && v < static_cast<T>(range)));
    }
  });
  return params;
}

template <typename T>
Var<T> sequence_loss(const ModelVars<T>& model, ContextMode mode, const LabeledSentence& example,
                     DropoutMasks<T>* dropout, LossDiagnostics* diagnostics) {
  const auto& ids = example.sentence.token_ids;
  const auto& gold = example.tags.tag_ids;
  if (ids.size() != example.sentence.tokens.size() || gold.size() != ids.size()) {
    throw ContractError("sequence_loss: sentence at line " + std::to_string(example.line) +
                        " is not encoded or has unequal token and tag counts");
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] <= kBeginTag) {
      throw ContractError("sequence_loss: tag '" + example.tags.tags[i] + "' at line " +
                          std::to_string(example.line + i) + " is not a known output tag");
    }
  }
  Tape<T>& tape = *model.tape;
  const auto dists = teacher_forced_distributions(model, mode, ids, gold, dropout);
  std::vector<Var<T>> logs;
  logs.reserve(dists.size());
  const T floor = static_cast<T>(kLogFloor);
  for (std::size_t t = 0; t < dists.size(); ++t) {
    Var<T> p = tape.pick(dists[t], static_cast<std::size_t>(gold[t]));
    if (p.item() < floor) {
      if (diagnostics) ++diagnostics->clamped_steps;
      p = tape.clamp_min(p, floor);
    }
    logs.push_back(tape.log(p));
  }
  return tape.neg(tape.sum(tape.stack(std::span<const Var<T>>(logs))));
}

template <typename T>
void sgd_step(ModelParams<T>& params, double learning_rate) {
  params.visit([](const std::string& name, Tensor<T>& t) {
    for (T g : t.grad()) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in " + name, name);
    }
  });
  const T lr = static_cast<T>(learning_rate);
  params.visit([lr](const std::string&, Tensor<T>& t) {
    auto data = t.data();
    auto grad = t.grad();
    for (std::size_t i = 0; i < data.size(); ++i) data[i] -= lr * grad[i];
    t.zero_grad();
  });
}

template <typename T>
TrainRecord<T> train(const TrainConfig& config, const Vocabulary& vocab, const Corpus& train_set,
                     const Corpus& validation, const EpochObserver& observer) {
  config.validate();
  if (train_set.empty()) throw ContractError("train: empty training set");
  if (validation.empty()) throw ContractError("train: empty validation set");

  Corpus data = train_set;
  encode(data, vocab);
  Corpus dev = validation;
  encode(dev, vocab);

  const ModelConfig model_config = config.model_config(vocab);
  const Rng root(config.seed);
  Rng shuffle_rng = root.stream("shuffle");
  Rng dropout_rng = root.stream("dropout");
  ModelParams<T> params = init_params<T>(model_config, config.seed, config.init_range);
  const ContextMode mode = context_mode(config.mechanism);

  TrainRecord<T> record;
  record.learning_rate = config.learning_rate;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    shuffle_rng.shuffle(order);
    EpochStats stats;
    stats.epoch = epoch;
    LossDiagnostics diag;
    for (std::size_t idx : order) {
      Tape<T> tape;
      const ModelVars<T> model = bind(tape, params);
      DropoutMasks<T> dropout(config.dropout, &dropout_rng);
      const Var<T> loss = sequence_loss(model, mode, data[idx], &dropout, &diag);
      if (!std::isfinite(loss.item())) {
        throw NumericError("non-finite loss on sentence at line " + std::to_string(data[idx].line));
      }
      stats.loss += static_cast<double>(loss.item());
      tape.backward(loss);
      sgd_step(params, config.learning_rate);
    }
    stats.clamped_steps = diag.clamped_steps;
    stats.val_f1 = evaluate(params, config.mechanism, vocab.tags, dev, config.beam_size,
                            config.jobs).overall.f1();
    stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    record.epochs.push_back(stats);
    if (stats.val_f1 > record.best_f1) {
      record.best_f1 = stats.val_f1;
      record.best_epoch = epoch;
      record.best_params = params;
    }
    if (observer && !observer(stats)) break;
  }
  return record;
}

template <typename T>
GridResult<T> grid_search(const TrainConfig& config, const Vocabulary& vocab, const Corpus& train_set,
                          const Corpus& validation) {
  if (config.grid.empty()) throw ConfigError("grid search needs at least one learning rate");
  GridResult<T> result;
  result.cells.resize(config.grid.size());
  auto run_cell = [&](std::size_t i) {
    GridCell<T>& cell = result.cells[i];
    cell.learning_rate = config.grid[i];
    TrainConfig cell_config = config;
    cell_config.learning_rate = config.grid[i];
    if (config.jobs > 1) cell_config.jobs = 1;
    try {
      cell.record = train<T>(cell_config, vocab, train_set, validation);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  };

  const std::size_t workers = std::min(config.jobs, config.grid.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < config.grid.size(); ++i) run_cell(i);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        for (std::size_t i = w; i < config.grid.size(); i += workers) run_cell(i);
      });
    }
    for (auto& th : threads) th.join();
  }

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const GridCell<T>& c = result.cells[i];
    if (!c.record) continue;
    if (!best) {
      best = i;
      continue;
    }
    const GridCell<T>& b = result.cells[*best];
    if (c.record->best_f1 > b.record->best_f1 ||
        (c.record->best_f1 == b.record->best_f1 && c.learning_rate < b.learning_rate)) {
      best = i;
    }
  }
  if (!best) throw NumericError("every grid cell failed; first error: " + result.cells[0].error);
  result.best = *best;
  return result;
}

template <typename T>
std::string format_grid(const GridResult<T>& result) {
  std::string out = "learning_rate\tbest_val_f1\tbest_epoch\n";
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const GridCell<T>& c = result.cells[i];
    if (c.record) {
      out += fmt::format("{:g}\t{:.2f}\t{}{}\n", c.learning_rate, c.record->best_f1,
                         c.record->best_epoch, i == result.best ? "\t*" : "");
    } else {
      out += fmt::format("{:g}\tfailed\t-\t{}\n", c.learning_rate, c.error);
    }
  }
  return out;
}

#define SLOTFILL_INSTANTIATE(T)                                                                  \
  template ModelParams<T> init_params(const ModelConfig&, std::uint64_t, double);               \
  template Var<T> sequence_loss(const ModelVars<T>&, ContextMode, const LabeledSentence&,       \
                                DropoutMasks<T>*, LossDiagnostics*);                            \
  template void sgd_step(ModelParams<T>&, double);                                              \
  template TrainRecord<T> train(const TrainConfig&, const Vocabulary&, const Corpus&,           \
                                const Corpus&, const EpochObserver&);                           \
  template GridResult<T> grid_search(const TrainConfig&, const Vocabulary&, const Corpus&,      \
                                     const Corpus&);                                            \
  template std::string format_grid(const GridResult<T>&);

SLOTFILL_INSTANTIATE(float)
SLOTFILL_INSTANTIATE(double)
#undef SLOTFILL_INSTANTIATE

}  // namespace slotfill
