#pragma once

#include <optional>
#include <span>
#include <vector>

#include "g2s/amr.hpp"
#include "g2s/params.hpp"

namespace g2s {

enum class GraphDirection { both, incoming, outgoing };

inline constexpr int kDefaultTransitionSteps = 9;
inline constexpr int kDefaultNeighborCap = 10;

// Per-node incident edges, each list truncated to the first `cap` edges in
// declaration order. The node lists are the other endpoint of the same edges.
struct NeighborIndex {
  std::vector<std::vector<int>> in_edges;
  std::vector<std::vector<int>> out_edges;
  std::vector<std::vector<int>> in_nodes;   // sources of in_edges
  std::vector<std::vector<int>> out_nodes;  // targets of out_edges

  static NeighborIndex build(std::size_t nodes, std::span<const EdgeTriple> edges,
                             int cap = kDefaultNeighborCap);
  std::size_t node_count() const { return in_edges.size(); }
};

// g_t: one column per node.
struct GraphState {
  Var h;
  Var c;
  int step = 0;
};

struct NeighborInputs {
  Var x_in;   // sum of incoming edge representations
  Var x_out;  // sum of outgoing edge representations
  Var h_in;   // sum of h_{t-1} over incoming-edge sources
  Var h_out;  // sum of h_{t-1} over outgoing-edge targets
};

struct TransitionOptions {
  int steps = kDefaultTransitionSteps;
  GraphDirection direction = GraphDirection::both;
  // Node updates inside one transition are split across this many threads.
  int threads = 1;
};

// One synchronous gated update of every node. Inputs are column-per-node;
// weights hold the four gates stacked as [input; output; forget; candidate].
// Returns [h; c] stacked (2H x nodes). Node j's column reads only column j of
// each input, so any partition of the columns gives the same result.
Var graph_lstm_cell(Var x_in, Var x_out, Var h_in, Var h_out, Var c_prev, Var w_in, Var w_out,
                    Var u_in, Var u_out, Var bias, GraphDirection direction, int threads);

// Graph-state LSTM encoder.
class GraphEncoder {
 public:
  GraphEncoder() = default;
  // edge_feature: width of [e_l; e_i (; h_i^c)]; edge_dim: width of x_{i,j}^l.
  GraphEncoder(ParameterStore& store, Index edge_feature, Index edge_dim, Index hidden, Rng& rng);

  // x_{i,j}^l = W4 [e_l; e_i (; h_i^c)] + b4, one column per edge.
  Var edge_representations(Tape& tape, Var edge_features) const;

  // g_0: every h = the shared trainable h_0, every c = 0.
  GraphState initial_state(Tape& tape, std::size_t nodes) const;

  NeighborInputs gather_neighbor_inputs(Tape& tape, const GraphState& prev, Var edge_reprs,
                                        const NeighborIndex& index) const;

  GraphState transition_step(Tape& tape, const GraphState& prev, Var x_in, Var x_out,
                             const NeighborIndex& index, const TransitionOptions& options) const;

  // Runs options.steps transitions from `initial`. x_in / x_out are the
  // per-node edge-input sums, fixed across steps.
  GraphState run(Tape& tape, GraphState initial, Var x_in, Var x_out, const NeighborIndex& index,
                 const TransitionOptions& options) const;

  GraphState encode(Tape& tape, Var edge_reprs, const NeighborIndex& index,
                    const TransitionOptions& options) const;

  Index hidden_size() const { return hidden_; }
  Index edge_dim() const { return edge_dim_; }

 private:
  Parameter* edge_weight_ = nullptr;  // W4
  Parameter* edge_bias_ = nullptr;    // b4
  Parameter* initial_ = nullptr;      // h_0
  Parameter* w_in_ = nullptr;
  Parameter* w_out_ = nullptr;
  Parameter* u_in_ = nullptr;
  Parameter* u_out_ = nullptr;
  Parameter* bias_ = nullptr;
  Index edge_dim_ = 0;
  Index hidden_ = 0;
};

// a_j = [h_T^j; x_j], one column per node.
Var graph_attention_memory(const GraphState& final_state, Var node_inputs);

}  // namespace g2s
