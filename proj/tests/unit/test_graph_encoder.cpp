#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "g2s/graph_encoder.hpp"

using namespace g2s;

namespace {

double sigma(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct EncoderRig {
  ParameterStore store;
  Rng rng;
  GraphEncoder enc;
  EncoderRig(Index hidden, Index edge_dim, std::uint64_t seed = 1) : rng(seed) {
    enc = GraphEncoder(store, 3, edge_dim, hidden, rng);
    store.find("graph.h0")->value() = uniform(hidden, 1, 0.5, rng);
    store.find("graph.bias")->value() = uniform(4 * hidden, 1, 0.5, rng);
  }
};

std::vector<EdgeTriple> path_edges(int n) {
  std::vector<EdgeTriple> e;
  for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, "next"});
  return e;
}

}  // namespace

TEST(NeighborIndex, CapsPerDirection) {
  std::vector<EdgeTriple> edges;
  for (int s = 1; s <= 12; ++s) edges.push_back({s, 0, "op"});
  const NeighborIndex idx = NeighborIndex::build(13, edges);
  ASSERT_EQ(idx.in_edges[0].size(), 10u);
  EXPECT_EQ(idx.in_edges[0].front(), 0);
  EXPECT_EQ(idx.in_edges[0].back(), 9);
  EXPECT_EQ(idx.in_nodes[0], (std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}));
  EXPECT_TRUE(idx.out_edges[0].empty());
  EXPECT_EQ(idx.out_nodes[12], std::vector<int>{0});
  EXPECT_THROW(NeighborIndex::build(2, std::vector<EdgeTriple>{{0, 5, "x"}}), GraphError);
}

TEST(GatherNeighborInputs, SumsAndEmptySums) {
  EncoderRig s(2, 3);
  const std::vector<EdgeTriple> edges{{1, 0, "a"}, {2, 0, "b"}, {0, 2, "c"}};
  const NeighborIndex idx = NeighborIndex::build(3, edges);
  Tape t;
  Rng rng(4);
  const Var reprs = t.constant(uniform(3, 3, 1.0, rng));
  GraphState g = s.enc.initial_state(t, 3);
  g.h = t.constant(uniform(2, 3, 1.0, rng));
  const NeighborInputs in = s.enc.gather_neighbor_inputs(t, g, reprs, idx);
  EXPECT_EQ(in.x_in.value().col(0), reprs.value().col(0) + reprs.value().col(1));
  EXPECT_EQ(in.h_in.value().col(0), g.h.value().col(1) + g.h.value().col(2));
  EXPECT_EQ(in.x_out.value().col(0), reprs.value().col(2));
  EXPECT_EQ(in.h_out.value().col(0), g.h.value().col(2));
  EXPECT_TRUE(in.x_in.value().col(1).isZero(0));
  EXPECT_TRUE(in.h_in.value().col(1).isZero(0));
}

TEST(GraphLstmCell, IsolatedNodeHandComputation) {
  const double bi = 0.3, bo = -0.7, bf = 1.1, bu = 0.4;
  Tape t;
  const Var z1 = t.constant(Matrix::Zero(1, 1));
  const Var w = t.constant(Matrix::Constant(4, 1, 0.9));
  const Var b = t.constant((Matrix(4, 1) << bi, bo, bf, bu).finished());
  const Var hc = graph_lstm_cell(z1, z1, z1, z1, z1, w, w, w, w, b, GraphDirection::both, 1);
  const double c = sigma(bf) * 0.0 + sigma(bi) * sigma(bu);
  EXPECT_NEAR(hc.value()(1, 0), c, 1e-15);
  EXPECT_NEAR(hc.value()(0, 0), sigma(bo) * std::tanh(c), 1e-15);
}

TEST(GraphEncoder, ZeroStepsReturnsInitialState) {
  EncoderRig s(4, 3);
  const auto edges = path_edges(3);
  const NeighborIndex idx = NeighborIndex::build(3, edges);
  Tape t;
  const Var reprs = t.constant(Matrix::Ones(3, 2));
  const GraphState g = s.enc.encode(t, reprs, idx, {0, GraphDirection::both, 1});
  for (Index j = 0; j < 3; ++j) EXPECT_EQ(g.h.value().col(j), s.store.find("graph.h0")->value().col(0));
  EXPECT_TRUE(g.c.value().isZero(0));
  EXPECT_EQ(kDefaultTransitionSteps, 9);
}

TEST(GraphEncoder, HiddenStatesBounded) {
  EncoderRig s(5, 3);
  s.store.find("graph.w_in")->value() *= 50.0;
  const auto edges = path_edges(4);
  const NeighborIndex idx = NeighborIndex::build(4, edges);
  Tape t;
  Rng rng(2);
  const Var reprs = t.constant(uniform(3, 3, 10.0, rng));
  const GraphState g = s.enc.encode(t, reprs, idx, {});
  EXPECT_LT(g.h.value().cwiseAbs().maxCoeff(), 1.0);
  EXPECT_EQ(g.step, 9);
}

TEST(GraphEncoder, AttentionMemory) {
  EncoderRig s(4, 3);
  Tape t;
  const NeighborIndex single = NeighborIndex::build(1, {});
  const Var x1 = t.constant(Matrix::Ones(3, 1));
  const GraphState g1 = s.enc.run(t, s.enc.initial_state(t, 1), t.constant(Matrix::Zero(3, 1)),
                                  t.constant(Matrix::Zero(3, 1)), single, {});
  const Var m1 = graph_attention_memory(g1, x1);
  EXPECT_EQ(m1.cols(), 1);
  EXPECT_EQ(m1.rows(), 7);

  const auto edges = path_edges(5);
  const NeighborIndex idx = NeighborIndex::build(5, edges);
  Rng rng(3);
  const Var reprs = t.constant(uniform(3, 4, 1.0, rng));
  const Var x = t.constant(uniform(3, 5, 1.0, rng));
  const GraphState g = s.enc.encode(t, reprs, idx, {});
  const Var m = graph_attention_memory(g, x);
  EXPECT_EQ(m.cols(), 5);
  EXPECT_EQ(Matrix(m.value().topRows(4)), g.h.value());
  EXPECT_EQ(Matrix(m.value().bottomRows(3)), x.value());
}

TEST(GraphEncoder, LocalityOnPath) {
  EncoderRig s(4, 3, 11);
  const int n = 6;
  const auto edges = path_edges(n);
  const NeighborIndex idx = NeighborIndex::build(n, edges);
  Rng rng(5);
  const Matrix x_in = uniform(3, n, 1.0, rng), x_out = uniform(3, n, 1.0, rng);
  const Matrix h0 = s.store.find("graph.h0")->value().replicate(1, n);
  auto node0 = [&](int steps, int perturbed) {
    Tape t;
    Matrix h = h0, xi = x_in, xo = x_out;
    if (perturbed >= 0) {
      h.col(perturbed).array() += 0.5;
      xi.col(perturbed).array() += 0.5;
      xo.col(perturbed).array() += 0.5;
    }
    GraphState g{t.constant(h), t.constant(Matrix::Zero(4, n)), 0};
    return Eigen::VectorXd(
        s.enc.run(t, g, t.constant(xi), t.constant(xo), idx, {steps, GraphDirection::both, 1}).h.value().col(0));
  };
  for (int steps = 1; steps <= 3; ++steps) {
    const Eigen::VectorXd base = node0(steps, -1);
    for (int k = 1; k < n; ++k) {
      const Eigen::VectorXd moved = node0(steps, k);
      if (k > steps)
        EXPECT_EQ(moved, base) << "T=" << steps << " k=" << k;
      else
        EXPECT_NE(moved, base) << "T=" << steps << " k=" << k;
    }
  }
}

TEST(GraphEncoder, DirectionAblationRespectsEdgeDirection) {
  EncoderRig s(3, 3, 13);
  const auto edges = path_edges(4);  // 0 -> 1 -> 2 -> 3
  const NeighborIndex idx = NeighborIndex::build(4, edges);
  const Matrix h0 = s.store.find("graph.h0")->value().replicate(1, 4);
  auto run = [&](GraphDirection d, int perturbed) {
    Tape t;
    Matrix h = h0;
    h.col(perturbed).array() += 0.5;
    GraphState g{t.constant(h), t.constant(Matrix::Zero(3, 4)), 0};
    const Var zero = t.constant(Matrix::Zero(3, 4));
    return Matrix(s.enc.run(t, g, zero, zero, idx, {5, d, 1}).h.value());
  };
  auto base = [&](GraphDirection d) {
    Tape t;
    GraphState g{t.constant(h0), t.constant(Matrix::Zero(3, 4)), 0};
    const Var zero = t.constant(Matrix::Zero(3, 4));
    return Matrix(s.enc.run(t, g, zero, zero, idx, {5, d, 1}).h.value());
  };
  // Incoming-only: a node hears its ancestors, never its descendants.
  EXPECT_EQ(run(GraphDirection::incoming, 3).col(0), base(GraphDirection::incoming).col(0));
  EXPECT_NE(run(GraphDirection::incoming, 0).col(3), base(GraphDirection::incoming).col(3));
  // Outgoing-only: the reverse.
  EXPECT_EQ(run(GraphDirection::outgoing, 0).col(3), base(GraphDirection::outgoing).col(3));
  EXPECT_NE(run(GraphDirection::outgoing, 3).col(0), base(GraphDirection::outgoing).col(0));
}

TEST(GraphEncoder, PermutationEquivariance) {
  EncoderRig s(4, 3, 17);
  const std::vector<EdgeTriple> edges{{0, 1, "a"}, {0, 2, "b"}, {2, 3, "c"}, {1, 3, "d"}, {3, 4, "e"}};
  const int n = 5;
  Rng rng(6);
  const Matrix reprs = uniform(3, static_cast<Index>(edges.size()), 1.0, rng);
  const std::vector<int> perm{3, 0, 4, 1, 2};  // old index -> new index
  std::vector<EdgeTriple> moved;
  for (const auto& e : edges) moved.push_back({perm[e.source], perm[e.target], e.label});
  Tape t;
  const GraphState a = s.enc.encode(t, t.constant(reprs), NeighborIndex::build(n, edges), {});
  const GraphState b = s.enc.encode(t, t.constant(reprs), NeighborIndex::build(n, moved), {});
  for (int j = 0; j < n; ++j)
    EXPECT_LT((a.h.value().col(j) - b.h.value().col(perm[j])).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(GraphEncoder, ParallelMatchesSerial) {
  EncoderRig s(6, 3, 19);
  const int n = 40;
  std::vector<EdgeTriple> edges;
  Rng rng(8);
  for (int j = 1; j < n; ++j) edges.push_back({static_cast<int>(rng() % j), j, "r"});
  for (int k = 0; k < 15; ++k) {
    const int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
    if (a != b) edges.push_back({a, b, "x"});
  }
  const NeighborIndex idx = NeighborIndex::build(n, edges);
  const Matrix reprs = uniform(3, static_cast<Index>(edges.size()), 1.0, rng);
  Tape t;
  const GraphState serial = s.enc.encode(t, t.constant(reprs), idx, {9, GraphDirection::both, 1});
  const GraphState parallel = s.enc.encode(t, t.constant(reprs), idx, {9, GraphDirection::both, 4});
  EXPECT_LT((serial.h.value() - parallel.h.value()).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((serial.c.value() - parallel.c.value()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(GraphEncoder, EdgeRepresentationIsAffine) {
  ParameterStore store;
  Rng rng(1);
  const GraphEncoder enc(store, 4, 6, 3, rng);
  Matrix w = Matrix::Zero(6, 4);
  w.topRows(4) = Matrix::Identity(4, 4);
  store.find("graph.edge.weight")->value() = w;
  Tape t;
  const Matrix feats = uniform(4, 2, 1.0, rng);
  const Matrix out = enc.edge_representations(t, t.constant(feats)).value();
  EXPECT_EQ(Matrix(out.topRows(4)), feats);
  EXPECT_TRUE(out.bottomRows(2).isZero(0));
  EXPECT_EQ(out.col(0), enc.edge_representations(t, t.constant(feats)).value().col(0));
  EXPECT_THROW(enc.edge_representations(t, t.constant(Matrix::Zero(5, 1))), ShapeError);
}
