#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "g2s/lstm.hpp"
#include "g2s/vocab.hpp"

namespace g2s {

inline constexpr int kDefaultBeam = 5;
inline constexpr int kDefaultMaxLength = 100;

// Maps each attention position to the token it would emit when copied.
// Tokens already in the vocabulary keep their id; others receive transient
// ids >= vocab size, valid for one example only.
class CopyMap {
 public:
  CopyMap() = default;
  // copyable may be empty (everything copyable).
  static CopyMap build(std::span<const std::string> surfaces, const std::vector<bool>& copyable,
                       const Vocab& vocab);

  std::size_t positions() const { return position_ids_.size(); }
  // Extended id per position; -1 for positions that are never copied.
  const std::vector<int>& position_ids() const { return position_ids_; }
  int vocab_size() const { return vocab_size_; }
  int extended_size() const { return vocab_size_ + static_cast<int>(extra_.size()); }
  bool all_copyable() const { return all_copyable_; }

  // Vocabulary id, else the transient id of a copyable token.
  std::optional<int> id_of(std::string_view token, const Vocab& vocab) const;
  bool copyable(std::string_view token) const;
  std::string token(int id, const Vocab& vocab) const;

 private:
  std::vector<int> position_ids_;
  std::vector<std::string> extra_;
  std::vector<std::string> copyable_tokens_;
  int vocab_size_ = 0;
  bool all_copyable_ = true;
};

struct AttentionMemory {
  Var vectors;    // width x N, column i = a_i
  Var projected;  // W_a a_i for every i
};

struct DecoderState {
  LstmState lstm;  // s_t and its cell
  Var context;     // mu_t
  Var coverage;    // gamma_t, N x 1
  int steps = 0;
};

struct AttentionResult {
  Var alpha;     // N x 1
  Var context;   // mu_t
  Var coverage;  // gamma_t
};

struct DecoderDims {
  Index embedding = 0;
  Index hidden = 0;
  Index memory = 0;     // width of a_i
  Index attention = 0;  // width of the attention pre-activation
  Index vocab = 0;
  Index encoder_state = 0;  // width of the mean encoder state
  bool copy = false;
};

struct StepResult {
  DecoderState state;
  AttentionResult attention;
  Var p_vocab;
  std::optional<Var> theta;
  Var p_final;
};

class Decoder {
 public:
  Decoder() = default;
  Decoder(ParameterStore& store, const DecoderDims& dims, Rng& rng);

  AttentionMemory prepare_memory(Tape& tape, Var vectors) const;

  // mu_0 = 0, gamma_0 = 0, s_0 = mean encoder state (projected when its
  // width differs from the decoder's), cell 0.
  DecoderState init(Tape& tape, const AttentionMemory& memory, Var mean_encoder_state) const;

  // LSTM update on [e_t; mu_{t-1}].
  LstmState decoder_step(Tape& tape, const DecoderState& state, Var input_embedding) const;

  AttentionResult attend(Tape& tape, Var s, const AttentionMemory& memory, Var coverage) const;

  // softmax(V_3 [s_t; mu_t] + b_3). `features` may be a dropped-out
  // [s_t; mu_t]; when invalid it is built from s and mu.
  Var vocab_distribution(Tape& tape, Var s, Var mu, Var features = {}) const;

  // sigma(w_mu . mu_t + w_s . s_t + w_e . e_t + b_5)
  Var copy_switch(Tape& tape, Var mu, Var s, Var e) const;

  // One full decoding step. rng non-null enables output dropout.
  StepResult step(Tape& tape, const AttentionMemory& memory, const CopyMap* copy_map,
                  const DecoderState& state, Var input_embedding, double dropout_rate = 0.0,
                  Rng* rng = nullptr) const;

  const DecoderDims& dims() const { return dims_; }

 private:
  DecoderDims dims_;
  LstmCell lstm_;
  Parameter* init_weight_ = nullptr;
  Parameter* init_bias_ = nullptr;
  Parameter* w_a_ = nullptr;
  Parameter* w_s_ = nullptr;
  Parameter* w_gamma_ = nullptr;
  Parameter* b_2_ = nullptr;
  Parameter* v_2_ = nullptr;
  Parameter* v_3_ = nullptr;
  Parameter* b_3_ = nullptr;
  Parameter* w_mu_ = nullptr;
  Parameter* w_state_ = nullptr;
  Parameter* w_e_ = nullptr;
  Parameter* b_5_ = nullptr;
};

// theta * P_vocab + (1 - theta) * P_attn over the extended vocabulary, where
// P_attn sums alpha over positions sharing a token. With some positions not
// copyable, P_attn is renormalized over the copyable ones.
Var final_distribution(Var theta, Var p_vocab, Var alpha, const CopyMap& copy_map);

// Decoding callback: advances `state` by feeding `input` and returns log
// probabilities over the extended vocabulary.
template <class State>
using StepFn = std::function<Eigen::VectorXd(State& state, int input)>;

struct Hypothesis {
  std::vector<int> tokens;  // without start / end markers
  double log_prob = 0.0;
  bool finished = false;
};

namespace detail {

// Indices of the k largest entries; ties go to the smaller index.
std::vector<int> top_k(const Eigen::VectorXd& v, int k);

}  // namespace detail

// Length-bounded beam search; hypotheses end at </s>; finished hypotheses
// are ranked by total log probability.
template <class State>
Hypothesis beam_search(const StepFn<State>& step, State initial, int beam, int max_len) {
  if (beam < 1) throw std::invalid_argument("beam size must be >= 1");
  struct Live {
    Hypothesis hyp;
    State state;
    int last;
  };
  std::vector<Live> live{{Hypothesis{}, std::move(initial), Vocab::kStart}};
  std::vector<Hypothesis> finished;

  for (int t = 0; t < max_len && !live.empty(); ++t) {
    struct Candidate {
      double score;
      int parent;
      int token;
    };
    std::vector<Candidate> cands;
    std::vector<State> next_states;
    next_states.reserve(live.size());
    for (std::size_t b = 0; b < live.size(); ++b) {
      State s = live[b].state;
      const Eigen::VectorXd lp = step(s, live[b].last);
      next_states.push_back(std::move(s));
      for (int tok : detail::top_k(lp, beam))
        cands.push_back({live[b].hyp.log_prob + lp(tok), static_cast<int>(b), tok});
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.parent != b.parent) return a.parent < b.parent;
      return a.token < b.token;
    });
    if (cands.size() > static_cast<std::size_t>(beam)) cands.resize(static_cast<std::size_t>(beam));

    std::vector<Live> next;
    for (const Candidate& c : cands) {
      Hypothesis h = live[static_cast<std::size_t>(c.parent)].hyp;
      h.log_prob = c.score;
      if (c.token == Vocab::kEnd) {
        h.finished = true;
        finished.push_back(std::move(h));
      } else {
        h.tokens.push_back(c.token);
        next.push_back({std::move(h), next_states[static_cast<std::size_t>(c.parent)], c.token});
      }
    }
    live = std::move(next);
    if (finished.size() >= static_cast<std::size_t>(beam)) break;
  }

  const std::vector<Hypothesis>* pool = &finished;
  std::vector<Hypothesis> unfinished;
  if (finished.empty()) {
    for (auto& l : live) unfinished.push_back(l.hyp);
    pool = &unfinished;
  }
  if (pool->empty()) return {};
  const Hypothesis* best = &pool->front();
  for (const auto& h : *pool)
    if (h.log_prob > best->log_prob) best = &h;
  return *best;
}

// Argmax decoding; stops at </s> or after max_len tokens.
template <class State>
Hypothesis greedy_search(const StepFn<State>& step, State state, int max_len) {
  Hypothesis h;
  int last = Vocab::kStart;
  for (int t = 0; t < max_len; ++t) {
    const Eigen::VectorXd lp = step(state, last);
    const int tok = detail::top_k(lp, 1).front();
    h.log_prob += lp(tok);
    if (tok == Vocab::kEnd) {
      h.finished = true;
      break;
    }
    h.tokens.push_back(tok);
    last = tok;
  }
  return h;
}

}  // namespace g2s
