#pragma once

#include <string>

#include "g2s/params.hpp"

namespace g2s {

struct LstmState {
  Var h;
  Var c;
};

// Standard LSTM cell; gate rows are laid out as [input; forget; output; candidate].
class LstmCell {
 public:
  LstmCell() = default;
  LstmCell(ParameterStore& store, const std::string& prefix, Index input, Index hidden, Rng& rng);

  LstmState step(Tape& tape, Var x, const LstmState& prev) const;
  LstmState zero_state(Tape& tape) const;

  Index input_size() const { return input_; }
  Index hidden_size() const { return hidden_; }

 private:
  Parameter* weight_ = nullptr;  // 4H x (input + H)
  Parameter* bias_ = nullptr;    // 4H x 1
  Index input_ = 0;
  Index hidden_ = 0;
};

}  // namespace g2s
