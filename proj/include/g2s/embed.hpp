#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "g2s/lstm.hpp"
#include "g2s/params.hpp"
#include "g2s/vocab.hpp"

namespace g2s {

// Word vectors stored column-wise: column k is the vector of vocab id k.
struct EmbeddingTable {
  Matrix vectors;
  std::size_t matched = 0;  // rows taken from a pretrained file
};

inline constexpr double kOovInitBound = 0.05;

// Every row uniform(-0.05, 0.05) from the given seed.
EmbeddingTable random_embeddings(const Vocab& vocab, Index dim, std::uint64_t seed);

// Reads "word v1 ... vD" lines. Vocabulary words found in the file get the
// file vector; the rest keep their seeded uniform initialization. dim = 0
// takes the dimension from the file.
EmbeddingTable load_pretrained(const std::string& path, const Vocab& vocab, Index dim,
                               std::uint64_t seed);

// One entry per byte seen in the streams.
Vocab build_char_vocab(const std::vector<std::vector<std::string>>& streams);

// Forward LSTM over the first max_chars bytes of a token; returns the last
// hidden state.
class CharEncoder {
 public:
  CharEncoder() = default;
  CharEncoder(ParameterStore& store, Vocab chars, Index char_dim, Index hidden, int max_chars, Rng& rng);

  Var encode(Tape& tape, std::string_view token) const;
  // hidden x tokens.size()
  Var encode_all(Tape& tape, std::span<const std::string> tokens) const;

  Index output_size() const { return lstm_.hidden_size(); }
  const Vocab& chars() const { return chars_; }

 private:
  Vocab chars_;
  Parameter* table_ = nullptr;
  LstmCell lstm_;
  int max_chars_ = 20;
};

// x = W [e; h_c] + b, applied column-wise.
class InputProjection {
 public:
  InputProjection() = default;
  InputProjection(ParameterStore& store, const std::string& prefix, Index word_dim, Index char_dim,
                  Index output, Rng& rng);

  Var apply(Tape& tape, Var embedding, std::optional<Var> char_state = std::nullopt) const;

  Index input_size() const { return word_dim_ + char_dim_; }
  Index output_size() const { return output_; }

 private:
  Parameter* weight_ = nullptr;
  Parameter* bias_ = nullptr;
  Index word_dim_ = 0;
  Index char_dim_ = 0;
  Index output_ = 0;
};

}  // namespace g2s
