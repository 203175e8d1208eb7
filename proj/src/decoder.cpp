#include "g2s/decoder.hpp"

#include <algorithm>
#include <numeric>

namespace g2s {

namespace {
constexpr double kSwitchBound = 30.0;
}

CopyMap CopyMap::build(std::span<const std::string> surfaces, const std::vector<bool>& copyable,
                       const Vocab& vocab) {
  if (!copyable.empty() && copyable.size() != surfaces.size())
    throw std::invalid_argument("copy map: copyable flags do not match positions");
  CopyMap m;
  m.vocab_size_ = vocab.size();
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    const bool can = copyable.empty() || copyable[i];
    if (!can) {
      m.all_copyable_ = false;
      m.position_ids_.push_back(-1);
      continue;
    }
    const std::string& s = surfaces[i];
    if (std::find(m.copyable_tokens_.begin(), m.copyable_tokens_.end(), s) == m.copyable_tokens_.end())
      m.copyable_tokens_.push_back(s);
    if (auto id = vocab.find(s)) {
      m.position_ids_.push_back(*id);
      continue;
    }
    auto it = std::find(m.extra_.begin(), m.extra_.end(), s);
    if (it == m.extra_.end()) {
      m.extra_.push_back(s);
      it = m.extra_.end() - 1;
    }
    m.position_ids_.push_back(m.vocab_size_ + static_cast<int>(it - m.extra_.begin()));
  }
  return m;
}

std::optional<int> CopyMap::id_of(std::string_view token, const Vocab& vocab) const {
  if (auto id = vocab.find(token)) return id;
  auto it = std::find(extra_.begin(), extra_.end(), token);
  if (it == extra_.end()) return std::nullopt;
  return vocab_size_ + static_cast<int>(it - extra_.begin());
}

bool CopyMap::copyable(std::string_view token) const {
  return std::find(copyable_tokens_.begin(), copyable_tokens_.end(), token) != copyable_tokens_.end();
}

std::string CopyMap::token(int id, const Vocab& vocab) const {
  if (id < vocab_size_) return vocab.token(id);
  const auto k = static_cast<std::size_t>(id - vocab_size_);
  if (k >= extra_.size()) throw std::out_of_range("copy map id " + std::to_string(id));
  return extra_[k];
}

Decoder::Decoder(ParameterStore& store, const DecoderDims& dims, Rng& rng) : dims_(dims) {
  const Index h = dims.hidden, m = dims.memory, a = dims.attention;
  lstm_ = LstmCell(store, "decoder.lstm", dims.embedding + m, h, rng);
  if (dims.encoder_state != h) {
    init_weight_ = &store.add("decoder.init.weight", glorot(h, dims.encoder_state, rng));
    init_bias_ = &store.add("decoder.init.bias", Matrix::Zero(h, 1));
  }
  w_a_ = &store.add("attention.w_a", glorot(a, m, rng));
  w_s_ = &store.add("attention.w_s", glorot(a, h, rng));
  w_gamma_ = &store.add("attention.w_gamma", glorot(a, 1, rng));
  b_2_ = &store.add("attention.b", Matrix::Zero(a, 1));
  v_2_ = &store.add("attention.v", glorot(a, 1, rng));
  v_3_ = &store.add("output.weight", glorot(dims.vocab, h + m, rng));
  b_3_ = &store.add("output.bias", Matrix::Zero(dims.vocab, 1));
  if (dims.copy) {
    w_mu_ = &store.add("copy.w_mu", glorot(m, 1, rng));
    w_state_ = &store.add("copy.w_s", glorot(h, 1, rng));
    w_e_ = &store.add("copy.w_e", glorot(dims.embedding, 1, rng));
    b_5_ = &store.add("copy.b", Matrix::Zero(1, 1));
  }
}

AttentionMemory Decoder::prepare_memory(Tape& tape, Var vectors) const {
  if (vectors.rows() != dims_.memory || vectors.cols() < 1)
    throw ShapeError("attention memory " + shape_str(vectors.value()) + ", expected " +
                     std::to_string(dims_.memory) + " rows and at least one column");
  return {vectors, matmul(tape.parameter(*w_a_), vectors)};
}

DecoderState Decoder::init(Tape& tape, const AttentionMemory& memory, Var mean_encoder_state) const {
  if (!memory.vectors.valid() || memory.vectors.cols() < 1)
    throw std::invalid_argument("decoder init: empty attention memory");
  if (mean_encoder_state.rows() != dims_.encoder_state)
    throw ShapeError("decoder init: encoder state " + shape_str(mean_encoder_state.value()) + ", expected " +
                     std::to_string(dims_.encoder_state) + " rows");
  Var s0 = mean_encoder_state;
  if (init_weight_)
    s0 = add(matmul(tape.parameter(*init_weight_), mean_encoder_state), tape.parameter(*init_bias_));
  DecoderState st;
  st.lstm = {s0, tape.constant(Matrix::Zero(dims_.hidden, 1))};
  st.context = tape.constant(Matrix::Zero(dims_.memory, 1));
  st.coverage = tape.constant(Matrix::Zero(memory.vectors.cols(), 1));
  return st;
}

LstmState Decoder::decoder_step(Tape& tape, const DecoderState& state, Var input_embedding) const {
  const Var parts[] = {input_embedding, state.context};
  return lstm_.step(tape, concat_rows(parts), state.lstm);
}

AttentionResult Decoder::attend(Tape& tape, Var s, const AttentionMemory& memory, Var coverage) const {
  const Index n = memory.vectors.cols();
  if (coverage.rows() != n || coverage.cols() != 1)
    throw ShapeError("attend: coverage " + shape_str(coverage.value()) + " for " + std::to_string(n) +
                     " memory vectors");
  Var query = add(matmul(tape.parameter(*w_s_), s), tape.parameter(*b_2_));
  Var pre = add_bias(memory.projected, query);
  pre = add(pre, matmul(tape.parameter(*w_gamma_), transpose(coverage)));
  Var scores = matmul(transpose(tanh(pre)), tape.parameter(*v_2_));
  Var alpha = softmax(scores);
  return {alpha, matmul(memory.vectors, alpha), add(coverage, alpha)};
}

Var Decoder::vocab_distribution(Tape& tape, Var s, Var mu, Var features) const {
  if (!features.valid()) {
    const Var parts[] = {s, mu};
    features = concat_rows(parts);
  }
  return softmax(add(matmul(tape.parameter(*v_3_), features), tape.parameter(*b_3_)));
}

Var Decoder::copy_switch(Tape& tape, Var mu, Var s, Var e) const {
  if (!dims_.copy) throw std::logic_error("copy switch requested on a decoder without copy");
  const Var terms[] = {matmul(transpose(tape.parameter(*w_mu_)), mu),
                       matmul(transpose(tape.parameter(*w_state_)), s),
                       matmul(transpose(tape.parameter(*w_e_)), e), tape.parameter(*b_5_)};
  // Bounded so theta stays strictly inside (0, 1) in double precision.
  return sigmoid(clamp(sum(terms), -kSwitchBound, kSwitchBound));
}

StepResult Decoder::step(Tape& tape, const AttentionMemory& memory, const CopyMap* copy_map,
                         const DecoderState& state, Var input_embedding, double dropout_rate, Rng* rng) const {
  StepResult r;
  const LstmState lstm = decoder_step(tape, state, input_embedding);
  r.attention = attend(tape, lstm.h, memory, state.coverage);
  Var features;
  if (rng && dropout_rate > 0.0) {
    const Var parts[] = {lstm.h, r.attention.context};
    features = dropout(concat_rows(parts), dropout_rate, *rng);
  }
  r.p_vocab = vocab_distribution(tape, lstm.h, r.attention.context, features);
  if (dims_.copy && copy_map) {
    r.theta = copy_switch(tape, r.attention.context, lstm.h, input_embedding);
    r.p_final = final_distribution(*r.theta, r.p_vocab, r.attention.alpha, *copy_map);
  } else {
    r.p_final = r.p_vocab;
  }
  r.state.lstm = lstm;
  r.state.context = r.attention.context;
  r.state.coverage = r.attention.coverage;
  r.state.steps = state.steps + 1;
  return r;
}

Var final_distribution(Var theta, Var p_vocab, Var alpha, const CopyMap& copy_map) {
  if (static_cast<std::size_t>(alpha.rows()) != copy_map.positions() || alpha.cols() != 1)
    throw ShapeError("final distribution: alpha " + shape_str(alpha.value()) + " vs copy map with " +
                     std::to_string(copy_map.positions()) + " positions");
  if (p_vocab.rows() != copy_map.vocab_size())
    throw ShapeError("final distribution: P_vocab " + shape_str(p_vocab.value()) + " vs vocabulary of " +
                     std::to_string(copy_map.vocab_size()));
  const Index size = copy_map.extended_size();
  const auto& ids = copy_map.position_ids();
  if (std::all_of(ids.begin(), ids.end(), [](int id) { return id < 0; })) return pad_rows(p_vocab, size);
  Var p_attn = scatter_rows(alpha, copy_map.position_ids(), size);
  if (!copy_map.all_copyable()) p_attn = mul_scalar(p_attn, reciprocal(sum_all(p_attn)));
  return add(mul_scalar(pad_rows(p_vocab, size), theta), mul_scalar(p_attn, one_minus(theta)));
}

namespace detail {

std::vector<int> top_k(const Eigen::VectorXd& v, int k) {
  std::vector<int> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), 0);
  const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(kk), idx.end(),
                    [&](int a, int b) { return v(a) != v(b) ? v(a) > v(b) : a < b; });
  idx.resize(kk);
  return idx;
}

}  // namespace detail

}  // namespace g2s
