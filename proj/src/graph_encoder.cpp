#include "g2s/graph_encoder.hpp"

#include <memory>

#include "g2s/parallel.hpp"

namespace g2s {

NeighborIndex NeighborIndex::build(std::size_t nodes, std::span<const EdgeTriple> edges, int cap) {
  NeighborIndex idx;
  idx.in_edges.resize(nodes);
  idx.out_edges.resize(nodes);
  idx.in_nodes.resize(nodes);
  idx.out_nodes.resize(nodes);
  const auto limit = static_cast<std::size_t>(cap);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    if (e.source < 0 || e.target < 0 || static_cast<std::size_t>(e.source) >= nodes ||
        static_cast<std::size_t>(e.target) >= nodes)
      throw GraphError("neighbor index: edge endpoint out of range");
    if (idx.in_edges[e.target].size() < limit) {
      idx.in_edges[e.target].push_back(static_cast<int>(k));
      idx.in_nodes[e.target].push_back(e.source);
    }
    if (idx.out_edges[e.source].size() < limit) {
      idx.out_edges[e.source].push_back(static_cast<int>(k));
      idx.out_nodes[e.source].push_back(e.target);
    }
  }
  return idx;
}

namespace {

struct CellCache {
  Matrix gates;   // 4H x n, post-sigmoid
  Matrix tanh_c;  // H x n
};

void check_cols(Var v, Index rows, Index cols, const char* what) {
  if (v.rows() != rows || v.cols() != cols)
    throw ShapeError(std::string("graph_lstm_cell: ") + what + " is " + shape_str(v.value()) +
                     ", expected [" + std::to_string(rows) + "x" + std::to_string(cols) + "]");
}

}  // namespace

Var graph_lstm_cell(Var x_in, Var x_out, Var h_in, Var h_out, Var c_prev, Var w_in, Var w_out,
                    Var u_in, Var u_out, Var bias, GraphDirection direction, int threads) {
  Tape& t = x_in.tape();
  const Index hidden = c_prev.rows();
  const Index n = c_prev.cols();
  const Index e = x_in.rows();
  check_cols(x_in, e, n, "x_in");
  check_cols(x_out, e, n, "x_out");
  check_cols(h_in, hidden, n, "h_in");
  check_cols(h_out, hidden, n, "h_out");
  check_cols(w_in, 4 * hidden, e, "W");
  check_cols(w_out, 4 * hidden, e, "W_hat");
  check_cols(u_in, 4 * hidden, hidden, "U");
  check_cols(u_out, 4 * hidden, hidden, "U_hat");
  check_cols(bias, 4 * hidden, 1, "b");

  const bool use_in = direction != GraphDirection::outgoing;
  const bool use_out = direction != GraphDirection::incoming;

  auto cache = std::make_shared<CellCache>();
  cache->gates.resize(4 * hidden, n);
  cache->tanh_c.resize(hidden, n);
  Matrix out(2 * hidden, n);

  parallel_for(n, threads, [&](std::ptrdiff_t b, std::ptrdiff_t end) {
    const Index cols = end - b;
    if (cols <= 0) return;
    Matrix pre = bias.value().replicate(1, cols);
    if (use_in) {
      pre.noalias() += w_in.value() * x_in.value().middleCols(b, cols);
      pre.noalias() += u_in.value() * h_in.value().middleCols(b, cols);
    }
    if (use_out) {
      pre.noalias() += w_out.value() * x_out.value().middleCols(b, cols);
      pre.noalias() += u_out.value() * h_out.value().middleCols(b, cols);
    }
    auto gates = cache->gates.middleCols(b, cols);
    gates = (1.0 / (1.0 + (-pre.array()).exp())).matrix();
    const auto i = gates.topRows(hidden).array();
    const auto o = gates.middleRows(hidden, hidden).array();
    const auto f = gates.middleRows(2 * hidden, hidden).array();
    const auto u = gates.bottomRows(hidden).array();
    auto c = out.bottomRows(hidden).middleCols(b, cols);
    c = (f * c_prev.value().middleCols(b, cols).array() + i * u).matrix();
    auto tc = cache->tanh_c.middleCols(b, cols);
    tc = c.array().tanh().matrix();
    out.topRows(hidden).middleCols(b, cols) = (o * tc.array()).matrix();
  });

  const Var in[] = {x_in, x_out, h_in, h_out, c_prev, w_in, w_out, u_in, u_out, bias};
  return t.record(std::move(out), in,
                  [&t, x_in, x_out, h_in, h_out, c_prev, w_in, w_out, u_in, u_out, bias, cache,
                   hidden, n, e, use_in, use_out, threads](const Matrix& g) {
    Matrix dpre(4 * hidden, n);
    Matrix dc_prev(hidden, n);
    parallel_for(n, threads, [&](std::ptrdiff_t b, std::ptrdiff_t end) {
      const Index cols = end - b;
      if (cols <= 0) return;
      const auto gates = cache->gates.middleCols(b, cols).array();
      const auto i = gates.topRows(hidden);
      const auto o = gates.middleRows(hidden, hidden);
      const auto f = gates.middleRows(2 * hidden, hidden);
      const auto u = gates.bottomRows(hidden);
      const auto tc = cache->tanh_c.middleCols(b, cols).array();
      const auto dh = g.topRows(hidden).middleCols(b, cols).array();
      const Eigen::ArrayXXd dc = g.bottomRows(hidden).middleCols(b, cols).array() + dh * o * (1.0 - tc.square());
      auto dp = dpre.middleCols(b, cols);
      dp.topRows(hidden) = (dc * u).matrix();
      dp.middleRows(hidden, hidden) = (dh * tc).matrix();
      dp.middleRows(2 * hidden, hidden) = (dc * c_prev.value().middleCols(b, cols).array()).matrix();
      dp.bottomRows(hidden) = (dc * i).matrix();
      dp = (dp.array() * gates * (1.0 - gates)).matrix();
      dc_prev.middleCols(b, cols) = (dc * f).matrix();
    });

    t.accumulate(c_prev, dc_prev);
    if (t.requires_grad(bias)) t.accumulate(bias, dpre.rowwise().sum());
    auto backprop = [&](Var x, Var w) {
      if (t.requires_grad(w)) t.accumulate(w, dpre * x.value().transpose());
      if (t.requires_grad(x)) {
        Matrix dx(x.rows(), n);
        parallel_for(n, threads, [&](std::ptrdiff_t b, std::ptrdiff_t end) {
          if (end > b) dx.middleCols(b, end - b).noalias() = w.value().transpose() * dpre.middleCols(b, end - b);
        });
        t.accumulate(x, dx);
      }
    };
    if (use_in) {
      backprop(x_in, w_in);
      backprop(h_in, u_in);
    }
    if (use_out) {
      backprop(x_out, w_out);
      backprop(h_out, u_out);
    }
    (void)e;
  });
}

GraphEncoder::GraphEncoder(ParameterStore& store, Index edge_feature, Index edge_dim, Index hidden, Rng& rng)
    : edge_dim_(edge_dim), hidden_(hidden) {
  edge_weight_ = &store.add("graph.edge.weight", glorot(edge_dim, edge_feature, rng));
  edge_bias_ = &store.add("graph.edge.bias", Matrix::Zero(edge_dim, 1));
  initial_ = &store.add("graph.h0", Matrix::Zero(hidden, 1));
  w_in_ = &store.add("graph.w_in", glorot(4 * hidden, edge_dim, rng));
  w_out_ = &store.add("graph.w_out", glorot(4 * hidden, edge_dim, rng));
  u_in_ = &store.add("graph.u_in", glorot(4 * hidden, hidden, rng));
  u_out_ = &store.add("graph.u_out", glorot(4 * hidden, hidden, rng));
  bias_ = &store.add("graph.bias", Matrix::Zero(4 * hidden, 1));
}

Var GraphEncoder::edge_representations(Tape& tape, Var edge_features) const {
  if (edge_features.rows() != edge_weight_->value().cols())
    throw ShapeError("edge representation: features " + shape_str(edge_features.value()) +
                     ", expected " + std::to_string(edge_weight_->value().cols()) + " rows");
  return add_bias(matmul(tape.parameter(*edge_weight_), edge_features), tape.parameter(*edge_bias_));
}

GraphState GraphEncoder::initial_state(Tape& tape, std::size_t nodes) const {
  const auto n = static_cast<Index>(nodes);
  return {broadcast_cols(tape.parameter(*initial_), n), tape.constant(Matrix::Zero(hidden_, n)), 0};
}

NeighborInputs GraphEncoder::gather_neighbor_inputs(Tape& tape, const GraphState& prev, Var edge_reprs,
                                                    const NeighborIndex& index) const {
  (void)tape;
  return {gather_sum(edge_reprs, index.in_edges), gather_sum(edge_reprs, index.out_edges),
          gather_sum(prev.h, index.in_nodes), gather_sum(prev.h, index.out_nodes)};
}

GraphState GraphEncoder::transition_step(Tape& tape, const GraphState& prev, Var x_in, Var x_out,
                                         const NeighborIndex& index, const TransitionOptions& options) const {
  Var h_in = gather_sum(prev.h, index.in_nodes);
  Var h_out = gather_sum(prev.h, index.out_nodes);
  Var hc = graph_lstm_cell(x_in, x_out, h_in, h_out, prev.c, tape.parameter(*w_in_), tape.parameter(*w_out_),
                           tape.parameter(*u_in_), tape.parameter(*u_out_), tape.parameter(*bias_),
                           options.direction, options.threads);
  return {slice_rows(hc, 0, hidden_), slice_rows(hc, hidden_, hidden_), prev.step + 1};
}

GraphState GraphEncoder::run(Tape& tape, GraphState state, Var x_in, Var x_out, const NeighborIndex& index,
                             const TransitionOptions& options) const {
  if (options.steps < 0) throw std::invalid_argument("transition steps must be >= 0");
  for (int s = 0; s < options.steps; ++s) state = transition_step(tape, state, x_in, x_out, index, options);
  return state;
}

GraphState GraphEncoder::encode(Tape& tape, Var edge_reprs, const NeighborIndex& index,
                                const TransitionOptions& options) const {
  const std::size_t n = index.node_count();
  Var x_in = gather_sum(edge_reprs, index.in_edges);
  Var x_out = gather_sum(edge_reprs, index.out_edges);
  return run(tape, initial_state(tape, n), x_in, x_out, index, options);
}

Var graph_attention_memory(const GraphState& final_state, Var node_inputs) {
  const Var parts[] = {final_state.h, node_inputs};
  return concat_rows(parts);
}

}  // namespace g2s
