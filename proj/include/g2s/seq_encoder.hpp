#pragma once

#include <vector>

#include "g2s/lstm.hpp"

namespace g2s {

// Which directions the sequence encoder runs; one-direction modes exist for
// ablations.
enum class SeqDirection { both, forward, backward };

struct SeqEncoding {
  std::vector<Var> forward;   // left-to-right states, index j = token j
  std::vector<Var> backward;  // right-to-left states, index j = token j
  Var inputs;                 // x_j, one column per token
};

// Bidirectional single-layer LSTM over the linearized graph.
class SeqEncoder {
 public:
  SeqEncoder() = default;
  SeqEncoder(ParameterStore& store, Index input, Index hidden, SeqDirection direction, Rng& rng);

  SeqEncoding encode(Tape& tape, Var inputs) const;

  // a_j = [backward_j; forward_j; x_j] (absent directions dropped).
  Var attention_memory(const SeqEncoding& enc) const;

  // Mean over tokens of the concatenated directional states.
  Var mean_state(const SeqEncoding& enc) const;

  Index state_width() const;
  Index memory_width(Index input) const { return state_width() + input; }
  SeqDirection direction() const { return direction_; }

 private:
  LstmCell forward_;
  LstmCell backward_;
  SeqDirection direction_ = SeqDirection::both;
};

}  // namespace g2s
