#include "g2s/model.hpp"

#include <cmath>
#include <stdexcept>

#include "g2s/parallel.hpp"

namespace g2s {

LossStats& LossStats::operator+=(const LossStats& o) {
  loss += o.loss;
  tokens += o.tokens;
  correct += o.correct;
  unreachable += o.unreachable;
  copy_positions += o.copy_positions;
  theta_sum += o.theta_sum;
  return *this;
}

namespace {

std::vector<std::string> node_surfaces(const AmrGraph& g) {
  std::vector<std::string> out;
  out.reserve(g.node_count());
  for (const auto& n : g.nodes()) out.push_back(surface_form(n));
  return out;
}

bool has_tokens(const std::vector<std::vector<std::string>>& streams) {
  for (const auto& s : streams)
    if (!s.empty()) return true;
  return false;
}

}  // namespace

ModelVocabs build_model_vocabs(const std::vector<CorpusEntry>& corpus, int min_count) {
  if (corpus.empty()) throw std::invalid_argument("build_model_vocabs: empty corpus");
  std::vector<std::vector<std::string>> words, labels, surfaces;
  for (const auto& entry : corpus) {
    auto nodes = node_surfaces(entry.graph);
    auto lin = linearize(entry.graph).tokens;
    surfaces.push_back(nodes);
    surfaces.push_back(lin);
    words.push_back(std::move(nodes));
    words.push_back(std::move(lin));
    if (entry.sentence) words.push_back(tokenize(*entry.sentence));
    std::vector<std::string> ls;
    for (const auto& e : entry.graph.edges()) ls.push_back(e.label);
    labels.push_back(std::move(ls));
  }
  ModelVocabs v;
  v.words = Vocab::build(words, min_count);
  if (has_tokens(labels)) v.labels = Vocab::build(labels, 1);
  v.chars = build_char_vocab(surfaces);
  return v;
}

Model::Model(const ModelConfig& config, ModelVocabs vocabs, const EmbeddingTable& embeddings, std::uint64_t seed)
    : config_(config), vocabs_(std::move(vocabs)) {
  if (config_.hidden < 1 || config_.word_dim < 1 || config_.label_dim < 1 || config_.steps < 0)
    throw std::invalid_argument("model config: sizes must be positive and steps >= 0");
  if (embeddings.vectors.rows() != config_.word_dim || embeddings.vectors.cols() != vocabs_.words.size())
    throw ShapeError("word embeddings " + shape_str(embeddings.vectors) + ", expected [" +
                     std::to_string(config_.word_dim) + "x" + std::to_string(vocabs_.words.size()) + "]");
  Rng rng(seed);
  const Index in_dim = config_.resolved_input_dim();
  words_ = &store_.add("embedding.words", embeddings.vectors, config_.freeze_embeddings);
  Index char_out = 0;
  if (config_.use_char) {
    char_ = CharEncoder(store_, vocabs_.chars, config_.char_dim, config_.char_hidden, config_.max_chars, rng);
    char_out = config_.char_hidden;
  }
  input_ = InputProjection(store_, "input", config_.word_dim, char_out, in_dim, rng);

  DecoderDims d;
  d.embedding = config_.word_dim;
  d.hidden = config_.hidden;
  d.attention = config_.resolved_attention_dim();
  d.vocab = vocabs_.words.size();
  d.copy = config_.copy;
  if (config_.encoder == EncoderKind::graph) {
    label_table_ = &store_.add("embedding.labels",
                               uniform(config_.label_dim, vocabs_.labels.size(), kOovInitBound, rng));
    graph_ = GraphEncoder(store_, config_.label_dim + config_.word_dim + char_out, in_dim, config_.hidden, rng);
    d.memory = config_.hidden + in_dim;
    d.encoder_state = config_.hidden;
  } else {
    seq_ = SeqEncoder(store_, in_dim, config_.hidden, config_.seq_direction, rng);
    d.memory = seq_.memory_width(in_dim);
    d.encoder_state = seq_.state_width();
  }
  decoder_ = Decoder(store_, d, rng);
}

Instance Model::prepare(const AmrGraph& graph, std::vector<std::string> target) const {
  if (graph.node_count() == 0) throw GraphError("cannot encode an empty graph");
  Instance inst;
  if (config_.encoder == EncoderKind::graph) {
    inst.surfaces = node_surfaces(graph);
    inst.copyable.assign(inst.surfaces.size(), true);
    inst.edges = edge_list(graph);
    for (const auto& e : inst.edges) inst.label_ids.push_back(vocabs_.labels.id(e.label));
    inst.neighbors = NeighborIndex::build(inst.surfaces.size(), inst.edges, config_.neighbor_cap);
  } else {
    LinearizedAmr lin = linearize(graph);
    inst.surfaces = std::move(lin.tokens);
    inst.copyable = std::move(lin.is_concept);
  }
  for (const auto& s : inst.surfaces) inst.word_ids.push_back(vocabs_.words.id(s));
  inst.copy_map = CopyMap::build(inst.surfaces, inst.copyable, vocabs_.words);
  inst.target = std::move(target);
  return inst;
}

Instance Model::prepare(const CorpusEntry& entry) const {
  return prepare(entry.graph, entry.sentence ? tokenize(*entry.sentence) : std::vector<std::string>{});
}

Var Model::word_embeddings(Tape& tape, const std::vector<int>& ids) const {
  std::vector<int> safe(ids);
  for (int& id : safe)
    if (id < 0 || id >= vocabs_.words.size()) id = Vocab::kUnk;
  return lookup(tape, *words_, safe);
}

Var Model::node_inputs(Tape& tape, const Instance& inst, std::optional<Var> chars) const {
  return input_.apply(tape, word_embeddings(tape, inst.word_ids), chars);
}

Encoded Model::encode(Tape& tape, const Instance& inst, const RunOptions& opts) const {
  const auto n = static_cast<Index>(inst.surfaces.size());
  if (n == 0) throw std::invalid_argument("encode: instance has no positions");
  const bool drop = opts.rng && opts.dropout > 0.0;
  std::optional<Var> chars;
  if (config_.use_char) chars = char_.encode_all(tape, inst.surfaces);
  Var x = node_inputs(tape, inst, chars);
  if (drop) x = dropout(x, opts.dropout, *opts.rng);

  Encoded enc;
  enc.copy_map = &inst.copy_map;
  Var memory, mean_state;
  if (config_.encoder == EncoderKind::graph) {
    const Index d = input_.output_size();
    Var x_in, x_out;
    if (inst.edges.empty()) {
      x_in = x_out = tape.constant(Matrix::Zero(d, n));
    } else {
      std::vector<std::vector<int>> sources;
      sources.reserve(inst.edges.size());
      for (const auto& e : inst.edges) sources.push_back({e.source});
      std::vector<Var> parts{lookup(tape, *label_table_, inst.label_ids),
                             gather_sum(word_embeddings(tape, inst.word_ids), sources)};
      if (chars) parts.push_back(gather_sum(*chars, sources));
      Var reprs = graph_.edge_representations(tape, concat_rows(parts));
      if (drop) reprs = dropout(reprs, opts.dropout, *opts.rng);
      x_in = gather_sum(reprs, inst.neighbors.in_edges);
      x_out = gather_sum(reprs, inst.neighbors.out_edges);
    }
    const TransitionOptions t{config_.steps, config_.graph_direction, opts.threads};
    const GraphState final_state =
        graph_.run(tape, graph_.initial_state(tape, inst.surfaces.size()), x_in, x_out, inst.neighbors, t);
    memory = graph_attention_memory(final_state, x);
    mean_state = mean_cols(final_state.h);
  } else {
    const SeqEncoding s = seq_.encode(tape, x);
    memory = seq_.attention_memory(s);
    mean_state = seq_.mean_state(s);
  }
  enc.memory = decoder_.prepare_memory(tape, memory);
  enc.initial = decoder_.init(tape, enc.memory, mean_state);
  return enc;
}

StepResult Model::step(Tape& tape, const Encoded& enc, const DecoderState& state, int input_id,
                       const RunOptions& opts) const {
  const Var e = word_embeddings(tape, {input_id});
  return decoder_.step(tape, enc.memory, config_.copy ? enc.copy_map : nullptr, state, e, opts.dropout,
                       opts.dropout > 0.0 ? opts.rng : nullptr);
}

std::optional<int> Model::gold_id(const Instance& inst, const std::string& token) const {
  if (config_.copy) return inst.copy_map.id_of(token, vocabs_.words);
  return vocabs_.words.find(token);
}

Var Model::loss(Tape& tape, const Instance& inst, const RunOptions& opts, LossStats* stats) const {
  const Encoded enc = encode(tape, inst, opts);
  DecoderState state = enc.initial;
  int input = Vocab::kStart;
  std::vector<Var> terms;
  LossStats local;
  for (std::size_t t = 0; t <= inst.target.size(); ++t) {
    const bool last = t == inst.target.size();
    const std::optional<int> gold = last ? std::optional<int>(Vocab::kEnd) : gold_id(inst, inst.target[t]);
    const int g = gold.value_or(Vocab::kUnk);
    const StepResult r = step(tape, enc, state, input, opts);
    terms.push_back(log(pick(r.p_final, g)));
    ++local.tokens;
    if (!gold) ++local.unreachable;
    else if (detail::top_k(r.p_final.value().col(0), 1).front() == g) ++local.correct;
    if (config_.copy && !last && inst.copy_map.copyable(inst.target[t])) {
      ++local.copy_positions;
      local.theta_sum += r.theta->scalar();
    }
    state = r.state;
    input = g;
  }
  Var total = neg(sum(terms));
  local.loss = total.scalar();
  if (stats) *stats += local;
  return total;
}

Hypothesis Model::search(const Instance& inst, const DecodeOptions& opts) const {
  Tape tape(false);
  const Encoded enc = encode(tape, inst);
  const StepFn<DecoderState> fn = [&](DecoderState& state, int input) -> Eigen::VectorXd {
    const StepResult r = step(tape, enc, state, input);
    state = r.state;
    return r.p_final.value().col(0).array().log().matrix();
  };
  if (opts.greedy) return greedy_search(fn, enc.initial, opts.max_len);
  return beam_search(fn, enc.initial, opts.beam, opts.max_len);
}

std::vector<std::string> Model::generate(const Instance& inst, const DecodeOptions& opts) const {
  const Hypothesis h = search(inst, opts);
  std::vector<std::string> out;
  out.reserve(h.tokens.size());
  for (int id : h.tokens) out.push_back(inst.copy_map.token(id, vocabs_.words));
  return out;
}

std::vector<std::vector<std::string>> Model::generate_all(const std::vector<Instance>& insts,
                                                          const DecodeOptions& opts, int threads) const {
  std::vector<std::vector<std::string>> out(insts.size());
  parallel_for(static_cast<std::ptrdiff_t>(insts.size()), threads, [&](std::ptrdiff_t b, std::ptrdiff_t e) {
    for (std::ptrdiff_t i = b; i < e; ++i) out[static_cast<std::size_t>(i)] = generate(insts[static_cast<std::size_t>(i)], opts);
  });
  return out;
}

}  // namespace g2s
