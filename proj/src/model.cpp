#include "slotfill/model.hpp"

#include <algorithm>

#include "slotfill/errors.hpp"

namespace slotfill {

std::string_view to_string(Mechanism m) {
  return m == Mechanism::kAttention ? "attention" : "focus";
}

Mechanism parse_mechanism(std::string_view name) {
  if (name == "attention") return Mechanism::kAttention;
  if (name == "focus") return Mechanism::kFocus;
  throw ConfigError("unknown mechanism '" + std::string(name) + "' (expected focus or attention)");
}

ContextMode context_mode(Mechanism m) {
  return m == Mechanism::kAttention ? ContextMode::kAttention : ContextMode::kFocus;
}

void ModelConfig::validate() const {
  if (vocab_size == 0) throw ConfigError("vocabulary is empty");
  if (num_tags < 2) throw ConfigError("need at least one tag besides the begin tag");
  if (embedding_dim == 0 || hidden_dim == 0 || label_dim == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (resolved_decoder_dim() < hidden_dim) {
    throw ConfigError("decoder width " + std::to_string(resolved_decoder_dim()) +
                      " cannot hold the encoder's backward state of width " +
                      std::to_string(hidden_dim));
  }
}

template <typename T>
LstmCellParams<T>::LstmCellParams(std::size_t input, std::size_t hidden, bool with_peephole)
    : input_dim(input), hidden_dim(hidden), peephole(with_peephole) {
  for (Tensor<T>* w : {&W_xi, &W_xf, &W_xc, &W_xo}) *w = Tensor<T>({hidden, input}, true);
  for (Tensor<T>* w : {&W_hi, &W_hf, &W_hc, &W_ho}) *w = Tensor<T>({hidden, hidden}, true);
  for (Tensor<T>* b : {&b_i, &b_f, &b_c, &b_o}) *b = Tensor<T>({hidden}, true);
  if (peephole) {
    for (Tensor<T>* w : {&w_ci, &w_cf, &w_co}) *w = Tensor<T>({hidden}, true);
  }
}

template <typename T>
ModelParams<T>::ModelParams(const ModelConfig& config) : config_(config) {
  config.validate();
  const std::size_t H = config.hidden_dim, S = config.resolved_decoder_dim();
  const std::size_t A = config.resolved_scorer_dim();
  embedding = Tensor<T>({config.vocab_size, config.embedding_dim}, true);
  enc_fwd = LstmCellParams<T>(config.embedding_dim, H, config.peephole);
  enc_bwd = LstmCellParams<T>(config.embedding_dim, H, config.peephole);
  label_embedding = Tensor<T>({config.num_tags, config.label_dim}, true);
  dec = LstmCellParams<T>(config.label_dim + 2 * H, S, config.peephole);
  att.W_s = Tensor<T>({A, S}, true);
  att.W_h = Tensor<T>({A, 2 * H}, true);
  att.b = Tensor<T>({A}, true);
  att.v = Tensor<T>({A}, true);
  out_W = Tensor<T>({config.num_tags, S}, true);
  out_b = Tensor<T>({config.num_tags}, true);
}

template <typename T>
void ModelParams<T>::zero_grad() {
  visit([](const std::string&, Tensor<T>& t) { t.zero_grad(); });
}

template <typename T>
std::size_t ModelParams<T>::num_values() const {
  std::size_t n = 0;
  visit([&](const std::string&, const Tensor<T>& t) { n += t.size(); });
  return n;
}

template <typename T>
template <typename U>
ModelParams<U> ModelParams<T>::cast() const {
  ModelParams<U> out(config_);
  std::vector<const Tensor<T>*> src;
  visit([&](const std::string&, const Tensor<T>& t) { src.push_back(&t); });
  std::size_t i = 0;
  out.visit([&](const std::string&, Tensor<U>& t) {
    auto from = src[i++]->data();
    auto to = t.data();
    for (std::size_t k = 0; k < from.size(); ++k) to[k] = static_cast<U>(from[k]);
  });
  return out;
}

namespace {

template <typename T, typename Cell>
LstmCellVars<T> bind_cell(Tape<T>& tape, Cell& cell) {
  LstmCellVars<T> v;
  v.input_dim = cell.input_dim;
  v.hidden_dim = cell.hidden_dim;
  v.peephole = cell.peephole;
  v.W_xi = tape.param(cell.W_xi);
  v.W_hi = tape.param(cell.W_hi);
  v.b_i = tape.param(cell.b_i);
  v.W_xf = tape.param(cell.W_xf);
  v.W_hf = tape.param(cell.W_hf);
  v.b_f = tape.param(cell.b_f);
  v.W_xc = tape.param(cell.W_xc);
  v.W_hc = tape.param(cell.W_hc);
  v.b_c = tape.param(cell.b_c);
  v.W_xo = tape.param(cell.W_xo);
  v.W_ho = tape.param(cell.W_ho);
  v.b_o = tape.param(cell.b_o);
  if (cell.peephole) {
    v.w_ci = tape.param(cell.w_ci);
    v.w_cf = tape.param(cell.w_cf);
    v.w_co = tape.param(cell.w_co);
  }
  return v;
}

template <typename T, typename Params>
ModelVars<T> bind_model(Tape<T>& tape, Params& p) {
  ModelVars<T> m;
  m.tape = &tape;
  m.config = p.config();
  m.embedding = tape.param(p.embedding);
  m.enc_fwd = bind_cell<T>(tape, p.enc_fwd);
  m.enc_bwd = bind_cell<T>(tape, p.enc_bwd);
  m.dec = bind_cell<T>(tape, p.dec);
  m.label_embedding = tape.param(p.label_embedding);
  m.att_W_s = tape.param(p.att.W_s);
  m.att_W_h = tape.param(p.att.W_h);
  m.att_b = tape.param(p.att.b);
  m.att_v = tape.param(p.att.v);
  m.out_W = tape.param(p.out_W);
  m.out_b = tape.param(p.out_b);
  return m;
}

}  // namespace

template <typename T>
ModelVars<T> bind(Tape<T>& tape, ModelParams<T>& params) {
  return bind_model<T>(tape, params);
}

template <typename T>
ModelVars<T> bind(Tape<T>& tape, const ModelParams<T>& params) {
  return bind_model<T>(tape, params);
}

template <typename T>
DropoutMasks<T>::DropoutMasks(double p, Rng* rng) : p_(p), rng_(rng) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("dropout probability must lie in [0, 1)");
  if (p > 0.0 && rng == nullptr) throw ContractError("dropout needs a random stream");
}

template <typename T>
Var<T> DropoutMasks<T>::apply(Tape<T>& tape, Var<T> x) {
  if (p_ == 0.0) return x;
  const std::size_t n = x.size();
  if (frozen_) {
    if (cursor_ >= masks_.size() || masks_[cursor_].size() != n) {
      throw ContractError("dropout replay does not match the recorded computation");
    }
    return tape.mul(x, tape.constant(x.shape(), masks_[cursor_++]));
  }
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p_));
  std::vector<T> mask(n);
  for (T& m : mask) m = rng_->bernoulli(p_) ? T(0) : keep_scale;
  masks_.push_back(mask);
  return tape.mul(x, tape.constant(x.shape(), std::move(mask)));
}

template <typename T>
LstmState<T> zero_state(Tape<T>& tape, std::size_t dim) {
  return {tape.zeros({dim}), tape.zeros({dim})};
}

template <typename T>
LstmState<T> lstm_cell_step(const LstmCellVars<T>& cell, const LstmState<T>& prev, Var<T> input) {
  if (input.shape() != Shape{cell.input_dim}) {
    throw DimensionError("lstm_cell_step: input of shape " + shape_str(input.shape()) +
                         ", cell expects [" + std::to_string(cell.input_dim) + "]");
  }
  if (prev.h.shape() != Shape{cell.hidden_dim} || prev.c.shape() != Shape{cell.hidden_dim}) {
    throw DimensionError("lstm_cell_step: state shape does not match hidden size " +
                         std::to_string(cell.hidden_dim));
  }
  const Var<T> x = input, h = prev.h, c = prev.c;
  Var<T> i_pre = matvec(cell.W_xi, x) + matvec(cell.W_hi, h) + cell.b_i;
  Var<T> f_pre = matvec(cell.W_xf, x) + matvec(cell.W_hf, h) + cell.b_f;
  if (cell.peephole) {
    i_pre = i_pre + cell.w_ci * c;
    f_pre = f_pre + cell.w_cf * c;
  }
  const Var<T> i = sigmoid(i_pre);
  const Var<T> f = sigmoid(f_pre);
  const Var<T> g = tanh(matvec(cell.W_xc, x) + matvec(cell.W_hc, h) + cell.b_c);
  const Var<T> c_next = f * c + i * g;
  Var<T> o_pre = matvec(cell.W_xo, x) + matvec(cell.W_ho, h) + cell.b_o;
  if (cell.peephole) o_pre = o_pre + cell.w_co * c_next;
  const Var<T> o = sigmoid(o_pre);
  return {o * tanh(c_next), c_next};
}

template <typename T>
EncoderStates<T> blstm_encode(const ModelVars<T>& model, std::span<const int> token_ids,
                              DropoutMasks<T>* dropout) {
  if (token_ids.empty()) throw ContractError("blstm_encode: empty sentence");
  Tape<T>& tape = *model.tape;
  const std::size_t n = token_ids.size(), H = model.config.hidden_dim;
  std::vector<Var<T>> inputs;
  inputs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int id = token_ids[i];
    if (id < 0 || static_cast<std::size_t>(id) >= model.config.vocab_size) {
      throw ContractError("blstm_encode: token id " + std::to_string(id) + " at position " +
                          std::to_string(i + 1) + " outside vocabulary of size " +
                          std::to_string(model.config.vocab_size));
    }
    Var<T> x = tape.row(model.embedding, static_cast<std::size_t>(id));
    if (dropout) x = dropout->apply(tape, x);
    inputs.push_back(x);
  }

  std::vector<Var<T>> fwd(n), bwd(n);
  LstmState<T> s = zero_state(tape, H);
  for (std::size_t i = 0; i < n; ++i) {
    s = lstm_cell_step(model.enc_fwd, s, inputs[i]);
    fwd[i] = s.h;
  }
  s = zero_state(tape, H);
  for (std::size_t i = n; i-- > 0;) {
    s = lstm_cell_step(model.enc_bwd, s, inputs[i]);
    bwd[i] = s.h;
  }

  EncoderStates<T> enc;
  enc.states.reserve(n);
  for (std::size_t i = 0; i < n; ++i) enc.states.push_back(tape.concat(bwd[i], fwd[i]));
  enc.first_backward = bwd[0];
  return enc;
}

template <typename T>
AttentionMemory<T> prepare_attention(const ModelVars<T>& model, const EncoderStates<T>& enc) {
  if (enc.states.empty()) throw ContractError("prepare_attention: no encoder states");
  AttentionMemory<T> mem;
  mem.states_matrix = model.tape->stack(std::span<const Var<T>>(enc.states));
  mem.keys.reserve(enc.states.size());
  for (const Var<T>& h : enc.states) mem.keys.push_back(matvec(model.att_W_h, h));
  return mem;
}

template <typename T>
AttentionResult<T> attention_context(const ModelVars<T>& model, Var<T> s_prev,
                                     const AttentionMemory<T>& memory,
                                     std::span<const T> forced_weights) {
  Tape<T>& tape = *model.tape;
  const std::size_t n = memory.keys.size();
  const Var<T> query = matvec(model.att_W_s, s_prev) + model.att_b;
  std::vector<Var<T>> scores;
  scores.reserve(n);
  for (const Var<T>& key : memory.keys) scores.push_back(dot(model.att_v, tanh(key + query)));
  Var<T> alpha = softmax(tape.stack(std::span<const Var<T>>(scores)));
  if (!forced_weights.empty()) {
    if (forced_weights.size() != n) {
      throw DimensionError("attention_context: forced weights of length " +
                           std::to_string(forced_weights.size()) + " for " + std::to_string(n) +
                           " encoder states");
    }
    alpha = tape.constant({n}, {forced_weights.begin(), forced_weights.end()});
  }
  const Var<T> row = tape.reshape(alpha, {1, n});
  const Var<T> context = tape.reshape(tape.matmul(row, memory.states_matrix),
                                      {model.config.state_dim()});
  return {context, alpha};
}

template <typename T>
Var<T> focus_context(const EncoderStates<T>& enc, std::size_t t) {
  if (t < 1 || t > enc.states.size()) {
    throw ContractError("focus_context: step " + std::to_string(t) + " outside 1.." +
                        std::to_string(enc.states.size()) +
                        " (focus cannot emit more labels than words)");
  }
  return enc.states[t - 1];
}

template <typename T>
LstmState<T> init_decoder_state(const ModelVars<T>& model, const EncoderStates<T>& enc) {
  if (enc.states.empty()) throw ContractError("init_decoder_state: no encoder states");
  Tape<T>& tape = *model.tape;
  const std::size_t S = model.config.resolved_decoder_dim(), H = model.config.hidden_dim;
  Var<T> h = enc.first_backward;
  if (S > H) h = tape.concat(h, tape.zeros({S - H}));
  return {h, tape.zeros({S})};
}

template <typename T>
DecoderOutput<T> decoder_step(const ModelVars<T>& model, const LstmState<T>& s_prev, int y_prev,
                              Var<T> context, DropoutMasks<T>* dropout) {
  if (y_prev < 0 || static_cast<std::size_t>(y_prev) >= model.config.num_tags) {
    throw ContractError("decoder_step: tag id " + std::to_string(y_prev) + " outside 0.." +
                        std::to_string(model.config.num_tags - 1));
  }
  Tape<T>& tape = *model.tape;
  const Var<T> label = tape.row(model.label_embedding, static_cast<std::size_t>(y_prev));
  const LstmState<T> s = lstm_cell_step(model.dec, s_prev, tape.concat(label, context));
  Var<T> h = s.h;
  if (dropout) h = dropout->apply(tape, h);
  const Var<T> logits = matvec(model.out_W, h) + model.out_b;
  // The begin tag is never emitted.
  return {s, tape.softmax(logits, 1)};
}

template <typename T>
ContextSource<T>::ContextSource(const ModelVars<T>& model, const EncoderStates<T>& enc,
                                ContextMode mode)
    : model_(&model), enc_(&enc), mode_(mode) {
  if (mode_ != ContextMode::kFocus) memory_ = prepare_attention(model, enc);
}

template <typename T>
Var<T> ContextSource<T>::at(std::size_t t, Var<T> s_prev) const {
  switch (mode_) {
    case ContextMode::kFocus:
      return focus_context(*enc_, t);
    case ContextMode::kAttention: {
      AttentionResult<T> r = attention_context(*model_, s_prev, memory_);
      weights_.push_back(r.weights);
      return r.context;
    }
    case ContextMode::kAlignedAttention: {
      const std::size_t n = enc_->length();
      if (t < 1 || t > n) throw ContractError("aligned attention: step outside sentence");
      std::vector<T> one_hot(n, T(0));
      one_hot[t - 1] = T(1);
      AttentionResult<T> r = attention_context(*model_, s_prev, memory_, std::span<const T>(one_hot));
      weights_.push_back(r.weights);
      return r.context;
    }
  }
  return {};
}

template <typename T>
std::vector<Var<T>> teacher_forced_distributions(const ModelVars<T>& model, ContextMode mode,
                                                 std::span<const int> token_ids,
                                                 std::span<const int> gold_tags,
                                                 DropoutMasks<T>* dropout) {
  if (token_ids.size() != gold_tags.size()) {
    throw ContractError("teacher_forced_distributions: " + std::to_string(token_ids.size()) +
                        " tokens but " + std::to_string(gold_tags.size()) + " tags");
  }
  const EncoderStates<T> enc = blstm_encode(model, token_ids, dropout);
  const ContextSource<T> contexts(model, enc, mode);
  LstmState<T> s = init_decoder_state(model, enc);
  int prev = kBeginTag;
  std::vector<Var<T>> dists;
  dists.reserve(token_ids.size());
  for (std::size_t t = 1; t <= token_ids.size(); ++t) {
    DecoderOutput<T> out = decoder_step(model, s, prev, contexts.at(t, s.h), dropout);
    dists.push_back(out.dist);
    s = out.state;
    prev = gold_tags[t - 1];
  }
  return dists;
}

#define SLOTFILL_INSTANTIATE(T)                                                                   \
  template struct LstmCellParams<T>;                                                             \
  template class ModelParams<T>;                                                                 \
  template class DropoutMasks<T>;                                                                \
  template class ContextSource<T>;                                                               \
  template ModelVars<T> bind(Tape<T>&, ModelParams<T>&);                                         \
  template ModelVars<T> bind(Tape<T>&, const ModelParams<T>&);                                   \
  template LstmState<T> zero_state(Tape<T>&, std::size_t);                                       \
  template LstmState<T> lstm_cell_step(const LstmCellVars<T>&, const LstmState<T>&, Var<T>);     \
  template EncoderStates<T> blstm_encode(const ModelVars<T>&, std::span<const int>,              \
                                         DropoutMasks<T>*);                                      \
  template AttentionMemory<T> prepare_attention(const ModelVars<T>&, const EncoderStates<T>&);   \
  template AttentionResult<T> attention_context(const ModelVars<T>&, Var<T>,                     \
                                                const AttentionMemory<T>&, std::span<const T>);  \
  template Var<T> focus_context(const EncoderStates<T>&, std::size_t);                           \
  template LstmState<T> init_decoder_state(const ModelVars<T>&, const EncoderStates<T>&);        \
  template DecoderOutput<T> decoder_step(const ModelVars<T>&, const LstmState<T>&, int, Var<T>,  \
                                         DropoutMasks<T>*);                                      \
  template std::vector<Var<T>> teacher_forced_distributions(                                     \
      const ModelVars<T>&, ContextMode, std::span<const int>, std::span<const int>,              \
      DropoutMasks<T>*);

SLOTFILL_INSTANTIATE(float)
SLOTFILL_INSTANTIATE(double)
#undef SLOTFILL_INSTANTIATE

template ModelParams<float> ModelParams<double>::cast<float>() const;
template ModelParams<double> ModelParams<float>::cast<double>() const;
template ModelParams<double> ModelParams<double>::cast<double>() const;
template ModelParams<float> ModelParams<float>::cast<float>() const;

}  // namespace slotfill
