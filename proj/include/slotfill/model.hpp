#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slotfill/rng.hpp"
#include "slotfill/tape.hpp"
#include "slotfill/tensor.hpp"

namespace slotfill {

/// How the decoder obtains its context vector c_t.
enum class Mechanism { kAttention, kFocus };

std::string_view to_string(Mechanism m);
Mechanism parse_mechanism(std::string_view name);

/// Tag id 0 is reserved for the begin-of-sequence label fed at step 1.
inline constexpr int kBeginTag = 0;

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t num_tags = 0;  // includes the begin tag
  std::size_t embedding_dim = 100;
  std::size_t hidden_dim = 100;  // per encoder direction
  std::size_t label_dim = 100;
  std::size_t decoder_dim = 0;  // 0 selects 2 * hidden_dim
  std::size_t scorer_dim = 0;   // 0 selects hidden_dim
  bool peephole = true;
  Mechanism mechanism = Mechanism::kFocus;

  std::size_t state_dim() const { return 2 * hidden_dim; }
  std::size_t resolved_decoder_dim() const { return decoder_dim ? decoder_dim : 2 * hidden_dim; }
  std::size_t resolved_scorer_dim() const { return scorer_dim ? scorer_dim : hidden_dim; }
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

template <typename T>
struct LstmCellParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  bool peephole = true;
  Tensor<T> W_xi, W_hi, w_ci, b_i;
  Tensor<T> W_xf, W_hf, w_cf, b_f;
  Tensor<T> W_xc, W_hc, b_c;
  Tensor<T> W_xo, W_ho, w_co, b_o;

  LstmCellParams() = default;
  LstmCellParams(std::size_t input, std::size_t hidden, bool with_peephole);

  /// Calls f(name, tensor) for each tensor in canonical order.
  template <typename Self, typename F>
  static void visit(Self& self, const std::string& prefix, F&& f) {
    f(prefix + "W_xi", self.W_xi);
    f(prefix + "W_hi", self.W_hi);
    if (self.peephole) f(prefix + "w_ci", self.w_ci);
    f(prefix + "b_i", self.b_i);
    f(prefix + "W_xf", self.W_xf);
    f(prefix + "W_hf", self.W_hf);
    if (self.peephole) f(prefix + "w_cf", self.w_cf);
    f(prefix + "b_f", self.b_f);
    f(prefix + "W_xc", self.W_xc);
    f(prefix + "W_hc", self.W_hc);
    f(prefix + "b_c", self.b_c);
    f(prefix + "W_xo", self.W_xo);
    f(prefix + "W_ho", self.W_ho);
    if (self.peephole) f(prefix + "w_co", self.w_co);
    f(prefix + "b_o", self.b_o);
  }
};

/// Scorer a(s, h) = v . tanh(W_s s + W_h h + b).
template <typename T>
struct AttentionParams {
  Tensor<T> W_s, W_h, b, v;
};

/// Every learnable tensor of the encoder-decoder. Value type: copying a
/// ModelParams snapshots the weights.
template <typename T>
class ModelParams {
 public:
  ModelParams() = default;
  /// All-zero parameters with gradient buffers.
  explicit ModelParams(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }

  Tensor<T> embedding;        // |V| x d_emb
  LstmCellParams<T> enc_fwd;  // left-to-right
  LstmCellParams<T> enc_bwd;  // right-to-left
  LstmCellParams<T> dec;
  Tensor<T> label_embedding;  // num_tags x d_lab
  AttentionParams<T> att;
  Tensor<T> out_W;  // num_tags x d_s
  Tensor<T> out_b;

  template <typename F>
  void visit(F&& f) { visit_impl(*this, f); }
  template <typename F>
  void visit(F&& f) const { visit_impl(*this, f); }

  void zero_grad();
  std::size_t num_values() const;

  /// Same weights at another precision.
  template <typename U>
  ModelParams<U> cast() const;

 private:
  template <typename Self, typename F>
  static void visit_impl(Self& self, F& f) {
    f(std::string("emb.E"), self.embedding);
    LstmCellParams<T>::visit(self.enc_fwd, "enc.fwd.", f);
    LstmCellParams<T>::visit(self.enc_bwd, "enc.bwd.", f);
    f(std::string("dec.L"), self.label_embedding);
    LstmCellParams<T>::visit(self.dec, "dec.", f);
    f(std::string("att.W_s"), self.att.W_s);
    f(std::string("att.W_h"), self.att.W_h);
    f(std::string("att.b"), self.att.b);
    f(std::string("att.v"), self.att.v);
    f(std::string("out.W"), self.out_W);
    f(std::string("out.b"), self.out_b);
  }

  ModelConfig config_;
};

/// Tape bindings of one LSTM cell.
template <typename T>
struct LstmCellVars {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  bool peephole = true;
  Var<T> W_xi, W_hi, w_ci, b_i;
  Var<T> W_xf, W_hf, w_cf, b_f;
  Var<T> W_xc, W_hc, b_c;
  Var<T> W_xo, W_ho, w_co, b_o;
};

/// A ModelParams bound to one tape. Binding is zero-copy.
template <typename T>
struct ModelVars {
  Tape<T>* tape = nullptr;
  ModelConfig config;
  Var<T> embedding;
  LstmCellVars<T> enc_fwd, enc_bwd, dec;
  Var<T> label_embedding;
  Var<T> att_W_s, att_W_h, att_b, att_v;
  Var<T> out_W, out_b;
};

/// Gradients flow into `params` when the tape records them.
template <typename T>
ModelVars<T> bind(Tape<T>& tape, ModelParams<T>& params);
/// Read-only binding for inference.
template <typename T>
ModelVars<T> bind(Tape<T>& tape, const ModelParams<T>& params);

/// Inverted dropout on non-recurrent connections.
///
/// Masks are drawn from the supplied stream and recorded in order; after
/// freeze() every apply() replays the recorded masks from the start of the
/// last rewind(), which makes a stochastic loss a deterministic function of
/// the parameters (needed for finite-difference checks).
template <typename T>
class DropoutMasks {
 public:
  DropoutMasks() = default;
  DropoutMasks(double p, Rng* rng);

  double p() const { return p_; }
  Var<T> apply(Tape<T>& tape, Var<T> x);

  void freeze() { frozen_ = true; cursor_ = 0; }
  void rewind() { cursor_ = 0; }
  const std::vector<std::vector<T>>& masks() const { return masks_; }

 private:
  double p_ = 0.0;
  Rng* rng_ = nullptr;
  bool frozen_ = false;
  std::size_t cursor_ = 0;
  std::vector<std::vector<T>> masks_;
};

template <typename T>
struct LstmState {
  Var<T> h;
  Var<T> c;
};

template <typename T>
struct EncoderStates {
  std::vector<Var<T>> states;  // h_i = [backward_i, forward_i], length T_x
  Var<T> first_backward;       // backward hidden state at position 1
  std::size_t length() const { return states.size(); }
};

/// Per-sentence precomputation for the attention scorer.
template <typename T>
struct AttentionMemory {
  Var<T> states_matrix;       // T_x x 2H
  std::vector<Var<T>> keys;   // W_h h_i
};

template <typename T>
struct AttentionResult {
  Var<T> context;
  Var<T> weights;
};

template <typename T>
struct DecoderOutput {
  LstmState<T> state;
  Var<T> dist;  // over all tag ids; the begin tag has probability 0
};

template <typename T>
LstmState<T> zero_state(Tape<T>& tape, std::size_t dim);

template <typename T>
LstmState<T> lstm_cell_step(const LstmCellVars<T>& cell, const LstmState<T>& prev, Var<T> input);

template <typename T>
EncoderStates<T> blstm_encode(const ModelVars<T>& model, std::span<const int> token_ids,
                              DropoutMasks<T>* dropout = nullptr);

template <typename T>
AttentionMemory<T> prepare_attention(const ModelVars<T>& model, const EncoderStates<T>& enc);

/// Soft context from the previous decoder hidden state. A non-empty
/// `forced_weights` replaces the computed alignment (scores are still
/// evaluated and returned unchanged otherwise).
template <typename T>
AttentionResult<T> attention_context(const ModelVars<T>& model, Var<T> s_prev,
                                     const AttentionMemory<T>& memory,
                                     std::span<const T> forced_weights = {});

/// c_t = h_t for 1-based step t.
template <typename T>
Var<T> focus_context(const EncoderStates<T>& enc, std::size_t t);

template <typename T>
LstmState<T> init_decoder_state(const ModelVars<T>& model, const EncoderStates<T>& enc);

template <typename T>
DecoderOutput<T> decoder_step(const ModelVars<T>& model, const LstmState<T>& s_prev, int y_prev,
                              Var<T> context, DropoutMasks<T>* dropout = nullptr);

/// How c_t is produced during a full decoder run. kAlignedAttention runs
/// the attention path with a one-hot alignment at position t.
enum class ContextMode { kAttention, kFocus, kAlignedAttention };

ContextMode context_mode(Mechanism m);

/// Stateful helper producing c_t for consecutive steps of one sentence.
template <typename T>
class ContextSource {
 public:
  ContextSource(const ModelVars<T>& model, const EncoderStates<T>& enc, ContextMode mode);
  /// Context for 1-based step t given the previous decoder hidden state.
  Var<T> at(std::size_t t, Var<T> s_prev) const;
  const std::vector<Var<T>>& last_weights() const { return weights_; }

 private:
  const ModelVars<T>* model_;
  const EncoderStates<T>* enc_;
  ContextMode mode_;
  AttentionMemory<T> memory_;
  mutable std::vector<Var<T>> weights_;
};

/// Teacher-forced decoder run: the distribution over tags at each step,
/// feeding gold[t-1] as the previous label.
template <typename T>
std::vector<Var<T>> teacher_forced_distributions(const ModelVars<T>& model, ContextMode mode,
                                                 std::span<const int> token_ids,
                                                 std::span<const int> gold_tags,
                                                 DropoutMasks<T>* dropout = nullptr);

}  // namespace slotfill
