#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "slotfill/corpus.hpp"
#include "slotfill/model.hpp"
#include "slotfill/rng.hpp"

namespace slotfill {

/// Learning rates tried by grid search when none are given.
std::vector<double> default_learning_rate_grid();

struct TrainConfig {
  double learning_rate = 0.008;
  int epochs = 100;
  double dropout = 0.5;
  double init_range = 0.2;
  std::uint64_t seed = 0;
  Mechanism mechanism = Mechanism::kFocus;
  std::vector<double> grid = default_learning_rate_grid();
  std::size_t beam_size = 2;
  std::size_t jobs = 1;  // grid cells / validation decoding

  // Model dimensions; vocabulary and tag counts come from the data.
  std::size_t embedding_dim = 100;
  std::size_t hidden_dim = 100;
  std::size_t label_dim = 100;
  std::size_t decoder_dim = 0;
  std::size_t scorer_dim = 0;
  bool peephole = true;

  void validate() const;
  ModelConfig model_config(const Vocabulary& vocab) const;
};

/// Uniform initialization on (-range, range) from the seed's "init" stream.
template <typename T>
ModelParams<T> init_params(const ModelConfig& config, std::uint64_t seed, double range = 0.2);

struct LossDiagnostics {
  std::size_t clamped_steps = 0;  // gold probability fell below the log floor
};

/// Probability floor applied before taking logs in the loss.
inline constexpr double kLogFloor = 1e-30;

/// Teacher-forced negative log-likelihood -sum_t log p(gold_t). Requires
/// encoded ids and known gold tags.
template <typename T>
Var<T> sequence_loss(const ModelVars<T>& model, ContextMode mode, const LabeledSentence& example,
                     DropoutMasks<T>* dropout = nullptr, LossDiagnostics* diagnostics = nullptr);

/// Plain SGD: theta -= lr * grad for every tensor, then clears gradients.
/// Throws NumericError naming the first tensor with a non-finite gradient,
/// leaving all parameters untouched.
template <typename T>
void sgd_step(ModelParams<T>& params, double learning_rate);

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;  // summed over training sentences
  double val_f1 = 0.0;
  double seconds = 0.0;
  std::size_t clamped_steps = 0;
};

template <typename T>
struct TrainRecord {
  double learning_rate = 0.0;
  std::vector<EpochStats> epochs;
  int best_epoch = 0;
  double best_f1 = -1.0;
  ModelParams<T> best_params;
};

/// Called after each epoch; returning false ends training early.
using EpochObserver = std::function<bool(const EpochStats&)>;

/// Per-sentence SGD with a seeded shuffle each epoch, validation F1 after
/// every epoch (beam search), keeping the parameters of the best epoch.
/// The vocabulary must have been built from `train` alone.
template <typename T>
TrainRecord<T> train(const TrainConfig& config, const Vocabulary& vocab, const Corpus& train,
                     const Corpus& validation, const EpochObserver& observer = {});

template <typename T>
struct GridCell {
  double learning_rate = 0.0;
  std::optional<TrainRecord<T>> record;
  std::string error;  // set when the run failed
};

template <typename T>
struct GridResult {
  std::vector<GridCell<T>> cells;
  std::size_t best = 0;  // index into cells
  const TrainRecord<T>& best_record() const { return *cells[best].record; }
};

/// One independent run per learning rate, each with the config's seed.
/// Winner: highest validation F1, ties to the smaller learning rate.
template <typename T>
GridResult<T> grid_search(const TrainConfig& config, const Vocabulary& vocab, const Corpus& train,
                          const Corpus& validation);

template <typename T>
std::string format_grid(const GridResult<T>& result);

}  // namespace slotfill
