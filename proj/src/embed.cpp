#include "g2s/embed.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace g2s {

EmbeddingTable random_embeddings(const Vocab& vocab, Index dim, std::uint64_t seed) {
  Rng rng(seed);
  return {uniform(dim, vocab.size(), kOovInitBound, rng), 0};
}

EmbeddingTable load_pretrained(const std::string& path, const Vocab& vocab, Index dim,
                               std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");

  struct Row {
    int id;
    std::vector<double> values;
  };
  std::vector<Row> rows;
  Index file_dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string word;
    if (!(ss >> word)) continue;
    std::vector<double> values;
    std::string field;
    while (ss >> field) {
      try {
        values.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad number '" + field + "'");
      }
    }
    // word2vec-style "count dim" header
    if (line_no == 1 && values.size() == 1 && word.find_first_not_of("0123456789") == std::string::npos)
      continue;
    const Index d = static_cast<Index>(values.size());
    if (file_dim == 0) file_dim = d;
    if (d != file_dim || d == 0)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": vector has " +
                               std::to_string(d) + " dimensions, expected " + std::to_string(file_dim));
    if (auto id = vocab.find(word)) rows.push_back({*id, std::move(values)});
  }
  if (file_dim == 0) throw std::runtime_error("'" + path + "' holds no vectors");
  if (dim != 0 && dim != file_dim)
    throw std::runtime_error("'" + path + "' has dimension " + std::to_string(file_dim) +
                             ", model expects " + std::to_string(dim));

  EmbeddingTable table = random_embeddings(vocab, file_dim, seed);
  std::set<int> seen;
  for (const Row& r : rows) {
    if (!seen.insert(r.id).second) continue;  // first occurrence wins
    for (Index i = 0; i < file_dim; ++i) table.vectors(i, r.id) = r.values[static_cast<std::size_t>(i)];
  }
  table.matched = seen.size();
  return table;
}

Vocab build_char_vocab(const std::vector<std::vector<std::string>>& streams) {
  std::set<std::string> chars;
  for (const auto& s : streams)
    for (const auto& t : s)
      for (char c : t) chars.insert(std::string(1, c));
  return Vocab::from_tokens({chars.begin(), chars.end()});
}

CharEncoder::CharEncoder(ParameterStore& store, Vocab chars, Index char_dim, Index hidden,
                         int max_chars, Rng& rng)
    : chars_(std::move(chars)), max_chars_(max_chars) {
  table_ = &store.add("char.embedding", uniform(char_dim, chars_.size(), 0.1, rng));
  lstm_ = LstmCell(store, "char.lstm", char_dim, hidden, rng);
}

Var CharEncoder::encode(Tape& tape, std::string_view token) const {
  const std::size_t n = std::min(token.size(), static_cast<std::size_t>(max_chars_));
  std::vector<int> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = chars_.id(std::string(1, token[i]));
  LstmState state = lstm_.zero_state(tape);
  if (n == 0) return state.h;
  Var embedded = lookup(tape, *table_, ids);
  for (std::size_t i = 0; i < n; ++i) state = lstm_.step(tape, column(embedded, static_cast<Index>(i)), state);
  return state.h;
}

Var CharEncoder::encode_all(Tape& tape, std::span<const std::string> tokens) const {
  std::vector<Var> cols;
  cols.reserve(tokens.size());
  for (const auto& t : tokens) cols.push_back(encode(tape, t));
  return concat_cols(cols);
}

InputProjection::InputProjection(ParameterStore& store, const std::string& prefix, Index word_dim,
                                 Index char_dim, Index output, Rng& rng)
    : word_dim_(word_dim), char_dim_(char_dim), output_(output) {
  weight_ = &store.add(prefix + ".weight", glorot(output, word_dim + char_dim, rng));
  bias_ = &store.add(prefix + ".bias", Matrix::Zero(output, 1));
}

Var InputProjection::apply(Tape& tape, Var embedding, std::optional<Var> char_state) const {
  if (embedding.rows() != word_dim_)
    throw ShapeError("input projection: embedding " + shape_str(embedding.value()) + ", expected " +
                     std::to_string(word_dim_) + " rows");
  if (char_state.has_value() != (char_dim_ > 0))
    throw ShapeError(char_dim_ > 0 ? "input projection: character state required"
                                   : "input projection: unexpected character state");
  Var in = embedding;
  if (char_state) {
    if (char_state->rows() != char_dim_ || char_state->cols() != embedding.cols())
      throw ShapeError("input projection: character state " + shape_str(char_state->value()) +
                       " does not match embedding " + shape_str(embedding.value()));
    const Var parts[] = {embedding, *char_state};
    in = concat_rows(parts);
  }
  return add_bias(matmul(tape.parameter(*weight_), in), tape.parameter(*bias_));
}

}  // namespace g2s
