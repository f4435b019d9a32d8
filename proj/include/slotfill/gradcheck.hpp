#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "slotfill/corpus.hpp"
#include "slotfill/model.hpp"

namespace slotfill {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double analytic = 0.0;  // at the worst entry
  double numeric = 0.0;
  std::size_t checked = 0;
};

/// |a - n| / max(1, |a|, |n|)
double gradient_rel_error(double analytic, double numeric);

/// Compares tape gradients of the sequence loss against central
/// differences for every parameter value. Dropout masks are drawn once and
/// replayed for every perturbed evaluation.
GradCheckResult check_loss_gradients(const ModelParams<double>& params, ContextMode mode,
                                     const LabeledSentence& example, double dropout,
                                     std::uint64_t seed, double step = 1e-5);

struct GradCheckFixture {
  ModelParams<double> params;
  LabeledSentence example;
};

/// Random instance with H=4, d_emb=3, d_lab=3, four output tags, T=5.
GradCheckFixture make_gradcheck_fixture(Mechanism mechanism, std::uint64_t seed);

}  // namespace slotfill
