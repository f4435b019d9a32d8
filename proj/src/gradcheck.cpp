#include "slotfill/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "slotfill/training.hpp"

namespace slotfill {

double gradient_rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

GradCheckResult check_loss_gradients(const ModelParams<double>& params, ContextMode mode,
                                     const LabeledSentence& example, double dropout,
                                     std::uint64_t seed, double step) {
  ModelParams<double> work = params;
  work.zero_grad();
  Rng rng = Rng(seed).stream("dropout");
  DropoutMasks<double> masks(dropout, &rng);
  {
    Tape<double> tape;
    const ModelVars<double> model = bind(tape, work);
    tape.backward(sequence_loss(model, mode, example, &masks));
  }
  masks.freeze();

  auto loss_at = [&]() {
    masks.rewind();
    Tape<double> tape(false);
    const ModelVars<double> model = bind(tape, std::as_const(work));
    return sequence_loss(model, mode, example, &masks).item();
  };

  GradCheckResult result;
  result.max_rel_error = -1.0;
  work.visit([&](const std::string& name, Tensor<double>& t) {
    auto data = t.data();
    auto grad = t.grad();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + step;
      const double up = loss_at();
      data[i] = saved - step;
      const double down = loss_at();
      data[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double err = gradient_rel_error(grad[i], numeric);
      ++result.checked;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_tensor = name;
        result.worst_index = i;
        result.analytic = grad[i];
        result.numeric = numeric;
      }
    }
  });
  return result;
}

GradCheckFixture make_gradcheck_fixture(Mechanism mechanism, std::uint64_t seed) {
  ModelConfig config;
  config.vocab_size = 8;
  config.num_tags = 5;  // begin tag + four output tags
  config.embedding_dim = 3;
  config.hidden_dim = 4;
  config.label_dim = 3;
  config.mechanism = mechanism;
  Rng rng = Rng(seed).stream("gradcheck");
  // A wider range than training init keeps gates away from the linear regime.
  GradCheckFixture f{init_params<double>(config, rng.next_u64(), 0.5), {}};
  for (int t = 0; t < 5; ++t) {
    const int word = 2 + static_cast<int>(rng.below(config.vocab_size - 2));
    const int tag = 1 + static_cast<int>(rng.below(config.num_tags - 1));
    f.example.sentence.tokens.push_back("w" + std::to_string(word));
    f.example.sentence.token_ids.push_back(word);
    f.example.tags.tags.push_back("t" + std::to_string(tag));
    f.example.tags.tag_ids.push_back(tag);
  }
  return f;
}

}  // namespace slotfill
