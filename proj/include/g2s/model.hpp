#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "g2s/amr.hpp"
#include "g2s/config.hpp"
#include "g2s/corpus.hpp"
#include "g2s/decoder.hpp"
#include "g2s/embed.hpp"
#include "g2s/graph_encoder.hpp"
#include "g2s/seq_encoder.hpp"

namespace g2s {

// One example in model-ready form. Encoder positions are graph nodes
// (graph mode) or linearized tokens (seq mode).
struct Instance {
  std::vector<std::string> surfaces;
  std::vector<int> word_ids;
  std::vector<bool> copyable;
  std::vector<EdgeTriple> edges;
  std::vector<int> label_ids;
  NeighborIndex neighbors;
  CopyMap copy_map;
  std::vector<std::string> target;
};

struct RunOptions {
  double dropout = 0.0;
  Rng* rng = nullptr;  // non-null turns dropout on
  int threads = 1;
};

struct Encoded {
  AttentionMemory memory;
  DecoderState initial;
  const CopyMap* copy_map = nullptr;
};

struct LossStats {
  double loss = 0.0;
  std::size_t tokens = 0;
  std::size_t correct = 0;      // teacher-forced argmax hits
  std::size_t unreachable = 0;  // gold tokens neither in vocab nor copyable
  std::size_t copy_positions = 0;
  double theta_sum = 0.0;  // switch value summed over copy positions

  LossStats& operator+=(const LossStats& o);
  double accuracy() const { return tokens ? static_cast<double>(correct) / static_cast<double>(tokens) : 0.0; }
  double mean_theta() const { return copy_positions ? theta_sum / static_cast<double>(copy_positions) : 0.0; }
};

struct DecodeOptions {
  int beam = kDefaultBeam;
  int max_len = kDefaultMaxLength;
  bool greedy = false;
};

struct ModelVocabs {
  Vocab words;
  Vocab labels;
  Vocab chars;
};

ModelVocabs build_model_vocabs(const std::vector<CorpusEntry>& corpus, int min_count = 1);

class Model {
 public:
  Model(const ModelConfig& config, ModelVocabs vocabs, const EmbeddingTable& embeddings, std::uint64_t seed);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  Instance prepare(const AmrGraph& graph, std::vector<std::string> target = {}) const;
  Instance prepare(const CorpusEntry& entry) const;

  Encoded encode(Tape& tape, const Instance& inst, const RunOptions& opts = {}) const;
  // input_id may be an extended id; those feed the unk embedding.
  StepResult step(Tape& tape, const Encoded& enc, const DecoderState& state, int input_id,
                  const RunOptions& opts = {}) const;

  // Teacher-forced negative log likelihood summed over target tokens + </s>.
  Var loss(Tape& tape, const Instance& inst, const RunOptions& opts = {}, LossStats* stats = nullptr) const;

  Hypothesis search(const Instance& inst, const DecodeOptions& opts) const;
  std::vector<std::string> generate(const Instance& inst, const DecodeOptions& opts) const;
  // Examples decoded independently across `threads` workers.
  std::vector<std::vector<std::string>> generate_all(const std::vector<Instance>& insts,
                                                     const DecodeOptions& opts, int threads) const;

  // Extended id of a gold token, or nullopt when it can only be unk.
  std::optional<int> gold_id(const Instance& inst, const std::string& token) const;

  const ModelConfig& config() const { return config_; }
  const ModelVocabs& vocabs() const { return vocabs_; }
  ParameterStore& params() { return store_; }
  const ParameterStore& params() const { return store_; }

 private:
  Var word_embeddings(Tape& tape, const std::vector<int>& ids) const;
  Var node_inputs(Tape& tape, const Instance& inst, std::optional<Var> chars) const;

  ModelConfig config_;
  ModelVocabs vocabs_;
  ParameterStore store_;
  Parameter* words_ = nullptr;
  Parameter* label_table_ = nullptr;
  CharEncoder char_;
  InputProjection input_;
  GraphEncoder graph_;
  SeqEncoder seq_;
  Decoder decoder_;
};

}  // namespace g2s
