#include <gtest/gtest.h>

#include "g2s/seq_encoder.hpp"

using namespace g2s;

namespace {

Matrix random_inputs(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  return uniform(rows, cols, 1.0, rng);
}

}  // namespace

TEST(SeqEncoder, SingleToken) {
  ParameterStore store;
  Rng rng(1);
  const SeqEncoder enc(store, 4, 6, SeqDirection::both, rng);
  Tape t;
  const Var x = t.constant(random_inputs(4, 1, 2));
  const SeqEncoding e = enc.encode(t, x);
  ASSERT_EQ(e.forward.size(), 1u);
  ASSERT_EQ(e.backward.size(), 1u);
  // Reference: one cell step from a zero state per direction.
  LstmCell fwd, bwd;
  {
    ParameterStore s2;
    Rng r2(1);
    fwd = LstmCell(s2, "seq.forward", 4, 6, r2);
    bwd = LstmCell(s2, "seq.backward", 4, 6, r2);
    Tape t2;
    const Var x2 = t2.constant(x.value());
    EXPECT_EQ(fwd.step(t2, x2, fwd.zero_state(t2)).h.value(), e.forward[0].value());
    EXPECT_EQ(bwd.step(t2, x2, bwd.zero_state(t2)).h.value(), e.backward[0].value());
  }
}

TEST(SeqEncoder, MemoryLayout) {
  ParameterStore store;
  Rng rng(3);
  const SeqEncoder enc(store, 5, 300, SeqDirection::both, rng);
  Tape t;
  const Var x = t.constant(random_inputs(5, 7, 4));
  const SeqEncoding e = enc.encode(t, x);
  const Var mem = enc.attention_memory(e);
  EXPECT_EQ(mem.rows(), 300 + 300 + 5);
  EXPECT_EQ(mem.cols(), 7);
  EXPECT_EQ(enc.memory_width(5), 605);
  for (Index j = 0; j < 7; ++j) {
    EXPECT_EQ(Matrix(mem.value().block(0, j, 300, 1)), e.backward[static_cast<std::size_t>(j)].value());
    EXPECT_EQ(Matrix(mem.value().block(300, j, 300, 1)), e.forward[static_cast<std::size_t>(j)].value());
    EXPECT_EQ(Matrix(mem.value().block(600, j, 5, 1)), x.value().col(j));
  }
  const Var mean = enc.mean_state(e);
  EXPECT_EQ(mean.rows(), 600);
  Matrix expected = Matrix::Zero(600, 1);
  for (Index j = 0; j < 7; ++j) {
    expected.topRows(300) += e.backward[static_cast<std::size_t>(j)].value();
    expected.bottomRows(300) += e.forward[static_cast<std::size_t>(j)].value();
  }
  EXPECT_LT((mean.value() - expected / 7.0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SeqEncoder, ReversalSwapsDirections) {
  ParameterStore store;
  Rng rng(5);
  const SeqEncoder enc(store, 3, 4, SeqDirection::both, rng);
  // Swap the two directions' weights into a second encoder.
  ParameterStore swapped_store;
  Rng rng2(5);
  const SeqEncoder swapped(swapped_store, 3, 4, SeqDirection::both, rng2);
  for (const char* part : {".weight", ".bias"}) {
    swapped_store.find(std::string("seq.forward") + part)->value() =
        store.find(std::string("seq.backward") + part)->value();
    swapped_store.find(std::string("seq.backward") + part)->value() =
        store.find(std::string("seq.forward") + part)->value();
  }
  const Matrix x = random_inputs(3, 6, 6);
  const Matrix reversed = x.rowwise().reverse();
  Tape t;
  const SeqEncoding a = enc.encode(t, t.constant(x));
  const SeqEncoding b = swapped.encode(t, t.constant(reversed));
  for (std::size_t j = 0; j < 6; ++j) {
    EXPECT_EQ(b.forward[5 - j].value(), a.backward[j].value());
    EXPECT_EQ(b.backward[5 - j].value(), a.forward[j].value());
  }
}

TEST(SeqEncoder, SingleDirectionAblation) {
  for (SeqDirection d : {SeqDirection::forward, SeqDirection::backward}) {
    ParameterStore store;
    Rng rng(7);
    const SeqEncoder enc(store, 3, 4, d, rng);
    Tape t;
    const SeqEncoding e = enc.encode(t, t.constant(random_inputs(3, 5, 8)));
    EXPECT_EQ(enc.state_width(), 4);
    EXPECT_EQ(enc.attention_memory(e).rows(), 4 + 3);
    EXPECT_EQ(enc.mean_state(e).rows(), 4);
  }
}

TEST(SeqEncoder, Deterministic) {
  ParameterStore store;
  Rng rng(9);
  const SeqEncoder enc(store, 3, 4, SeqDirection::both, rng);
  Tape t;
  const Matrix x = random_inputs(3, 4, 10);
  EXPECT_EQ(enc.attention_memory(enc.encode(t, t.constant(x))).value(),
            enc.attention_memory(enc.encode(t, t.constant(x))).value());
}
