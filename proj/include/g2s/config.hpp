#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

#include "g2s/decoder.hpp"
#include "g2s/graph_encoder.hpp"
#include "g2s/seq_encoder.hpp"

namespace g2s {

enum class EncoderKind { seq, graph };

struct ModelConfig {
  EncoderKind encoder = EncoderKind::graph;
  bool copy = false;
  bool use_char = false;
  int steps = kDefaultTransitionSteps;
  int hidden = 300;
  int word_dim = 300;
  int label_dim = 300;
  int char_dim = 100;
  int char_hidden = 100;
  int max_chars = 20;
  int input_dim = 0;      // 0: same as hidden
  int attention_dim = 0;  // 0: same as hidden
  int neighbor_cap = kDefaultNeighborCap;
  GraphDirection graph_direction = GraphDirection::both;
  SeqDirection seq_direction = SeqDirection::both;
  bool freeze_embeddings = true;

  int resolved_input_dim() const { return input_dim > 0 ? input_dim : hidden; }
  int resolved_attention_dim() const { return attention_dim > 0 ? attention_dim : hidden; }
};

struct TrainConfig {
  ModelConfig model;
  double learning_rate = 0.001;
  double dropout = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double clip_norm = 5.0;
  int epochs = 30;
  int batch_size = 16;
  int beam = kDefaultBeam;
  int max_len = kDefaultMaxLength;
  int min_count = 1;
  int threads = 1;
  std::uint64_t seed = 1;
};

nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

std::string to_string(EncoderKind k);
EncoderKind parse_encoder_kind(const std::string& s);
std::string to_string(GraphDirection d);
GraphDirection parse_graph_direction(const std::string& s);
std::string to_string(SeqDirection d);
SeqDirection parse_seq_direction(const std::string& s);

}  // namespace g2s
