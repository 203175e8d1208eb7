#include "g2s/seq_encoder.hpp"

namespace g2s {

SeqEncoder::SeqEncoder(ParameterStore& store, Index input, Index hidden, SeqDirection direction, Rng& rng)
    : direction_(direction) {
  if (direction != SeqDirection::backward) forward_ = LstmCell(store, "seq.forward", input, hidden, rng);
  if (direction != SeqDirection::forward) backward_ = LstmCell(store, "seq.backward", input, hidden, rng);
}

Index SeqEncoder::state_width() const {
  return forward_.hidden_size() + backward_.hidden_size();
}

SeqEncoding SeqEncoder::encode(Tape& tape, Var inputs) const {
  const Index n = inputs.cols();
  if (n < 1) throw std::invalid_argument("sequence encoder: empty input");
  SeqEncoding enc;
  enc.inputs = inputs;
  std::vector<Var> cols;
  cols.reserve(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) cols.push_back(column(inputs, j));

  if (direction_ != SeqDirection::backward) {
    LstmState s = forward_.zero_state(tape);
    for (Index j = 0; j < n; ++j) {
      s = forward_.step(tape, cols[static_cast<std::size_t>(j)], s);
      enc.forward.push_back(s.h);
    }
  }
  if (direction_ != SeqDirection::forward) {
    enc.backward.resize(static_cast<std::size_t>(n));
    LstmState s = backward_.zero_state(tape);
    for (Index j = n - 1; j >= 0; --j) {
      s = backward_.step(tape, cols[static_cast<std::size_t>(j)], s);
      enc.backward[static_cast<std::size_t>(j)] = s.h;
    }
  }
  return enc;
}

namespace {

std::vector<Var> state_columns(const SeqEncoding& enc) {
  const std::size_t n = std::max(enc.forward.size(), enc.backward.size());
  std::vector<Var> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Var> parts;
    if (!enc.backward.empty()) parts.push_back(enc.backward[j]);
    if (!enc.forward.empty()) parts.push_back(enc.forward[j]);
    out.push_back(parts.size() == 1 ? parts[0] : concat_rows(parts));
  }
  return out;
}

}  // namespace

Var SeqEncoder::attention_memory(const SeqEncoding& enc) const {
  const Var states = concat_cols(state_columns(enc));
  const Var parts[] = {states, enc.inputs};
  return concat_rows(parts);
}

Var SeqEncoder::mean_state(const SeqEncoding& enc) const {
  return mean_cols(concat_cols(state_columns(enc)));
}

}  // namespace g2s
