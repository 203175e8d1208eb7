#include "g2s/config.hpp"

#include <stdexcept>

namespace g2s {

std::string to_string(EncoderKind k) { return k == EncoderKind::seq ? "seq" : "graph"; }

EncoderKind parse_encoder_kind(const std::string& s) {
  if (s == "seq") return EncoderKind::seq;
  if (s == "graph") return EncoderKind::graph;
  throw std::invalid_argument("unknown encoder '" + s + "' (expected seq or graph)");
}

std::string to_string(GraphDirection d) {
  switch (d) {
    case GraphDirection::incoming: return "incoming";
    case GraphDirection::outgoing: return "outgoing";
    default: return "both";
  }
}

GraphDirection parse_graph_direction(const std::string& s) {
  if (s == "both") return GraphDirection::both;
  if (s == "incoming") return GraphDirection::incoming;
  if (s == "outgoing") return GraphDirection::outgoing;
  throw std::invalid_argument("unknown graph direction '" + s + "'");
}

std::string to_string(SeqDirection d) {
  switch (d) {
    case SeqDirection::forward: return "forward";
    case SeqDirection::backward: return "backward";
    default: return "both";
  }
}

SeqDirection parse_seq_direction(const std::string& s) {
  if (s == "both") return SeqDirection::both;
  if (s == "forward") return SeqDirection::forward;
  if (s == "backward") return SeqDirection::backward;
  throw std::invalid_argument("unknown sequence direction '" + s + "'");
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"encoder", to_string(c.encoder)},
          {"copy", c.copy},
          {"char", c.use_char},
          {"steps", c.steps},
          {"hidden", c.hidden},
          {"word_dim", c.word_dim},
          {"label_dim", c.label_dim},
          {"char_dim", c.char_dim},
          {"char_hidden", c.char_hidden},
          {"max_chars", c.max_chars},
          {"input_dim", c.input_dim},
          {"attention_dim", c.attention_dim},
          {"neighbor_cap", c.neighbor_cap},
          {"graph_direction", to_string(c.graph_direction)},
          {"seq_direction", to_string(c.seq_direction)},
          {"freeze_embeddings", c.freeze_embeddings}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.encoder = parse_encoder_kind(j.at("encoder").get<std::string>());
  c.copy = j.at("copy").get<bool>();
  c.use_char = j.at("char").get<bool>();
  c.steps = j.at("steps").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.word_dim = j.at("word_dim").get<int>();
  c.label_dim = j.at("label_dim").get<int>();
  c.char_dim = j.at("char_dim").get<int>();
  c.char_hidden = j.at("char_hidden").get<int>();
  c.max_chars = j.at("max_chars").get<int>();
  c.input_dim = j.at("input_dim").get<int>();
  c.attention_dim = j.at("attention_dim").get<int>();
  c.neighbor_cap = j.at("neighbor_cap").get<int>();
  c.graph_direction = parse_graph_direction(j.at("graph_direction").get<std::string>());
  c.seq_direction = parse_seq_direction(j.at("seq_direction").get<std::string>());
  c.freeze_embeddings = j.at("freeze_embeddings").get<bool>();
  return c;
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"model", to_json(c.model)},
          {"learning_rate", c.learning_rate},
          {"dropout", c.dropout},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"adam_epsilon", c.adam_epsilon},
          {"clip_norm", c.clip_norm},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"beam", c.beam},
          {"max_len", c.max_len},
          {"min_count", c.min_count},
          {"threads", c.threads},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.model = model_config_from_json(j.at("model"));
  c.learning_rate = j.at("learning_rate").get<double>();
  c.dropout = j.at("dropout").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.adam_epsilon = j.at("adam_epsilon").get<double>();
  c.clip_norm = j.at("clip_norm").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.beam = j.at("beam").get<int>();
  c.max_len = j.at("max_len").get<int>();
  c.min_count = j.at("min_count").get<int>();
  c.threads = j.at("threads").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace g2s
