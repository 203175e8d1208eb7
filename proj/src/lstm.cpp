#include "g2s/lstm.hpp"

namespace g2s {

LstmCell::LstmCell(ParameterStore& store, const std::string& prefix, Index input, Index hidden, Rng& rng)
    : input_(input), hidden_(hidden) {
  weight_ = &store.add(prefix + ".weight", glorot(4 * hidden, input + hidden, rng));
  Matrix b = Matrix::Zero(4 * hidden, 1);
  b.middleRows(hidden, hidden).setOnes();
  bias_ = &store.add(prefix + ".bias", std::move(b));
}

LstmState LstmCell::zero_state(Tape& tape) const {
  return {tape.constant(Matrix::Zero(hidden_, 1)), tape.constant(Matrix::Zero(hidden_, 1))};
}

LstmState LstmCell::step(Tape& tape, Var x, const LstmState& prev) const {
  if (x.rows() != input_ || x.cols() != 1)
    throw ShapeError("lstm step: input " + shape_str(x.value()) + ", expected [" +
                     std::to_string(input_) + "x1]");
  const Var parts[] = {x, prev.h};
  Var gates = add(matmul(tape.parameter(*weight_), concat_rows(parts)), tape.parameter(*bias_));
  Var i = sigmoid(slice_rows(gates, 0, hidden_));
  Var f = sigmoid(slice_rows(gates, hidden_, hidden_));
  Var o = sigmoid(slice_rows(gates, 2 * hidden_, hidden_));
  Var g = tanh(slice_rows(gates, 3 * hidden_, hidden_));
  Var c = add(mul(f, prev.c), mul(i, g));
  Var h = mul(o, tanh(c));
  return {h, c};
}

}  // namespace g2s
