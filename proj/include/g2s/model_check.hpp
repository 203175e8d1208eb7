#pragma once

#include <cstdint>
#include <memory>

#include "g2s/gradcheck.hpp"
#include "g2s/model.hpp"

namespace g2s {

// Small fixed example: a 4-node graph with a re-entrancy and a concept
// outside the 20-word vocabulary, so the copy path needs a transient id.
struct CheckFixture {
  CorpusEntry entry;
  ModelVocabs vocabs;
};

CheckFixture gradcheck_fixture();

// Builds a model for `config` on the fixture (word embeddings left trainable
// so their lookup is checked too) and compares gradients of the
// teacher-forced loss against finite differences.
GradCheckResult check_model_gradients(ModelConfig config, const GradCheckOptions& options,
                                      std::uint64_t seed = 11);

}  // namespace g2s
