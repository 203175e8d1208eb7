#include "g2s/model_check.hpp"

namespace g2s {

CheckFixture gradcheck_fixture() {
  CheckFixture f;
  f.entry.id = "check";
  f.entry.amr_text = "(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b :ARG4 (c / zanzibar)))";
  f.entry.graph = parse_penman(f.entry.amr_text);
  f.entry.sentence = "the boy wants to go to zanzibar";
  f.vocabs.words = Vocab::from_tokens({"want", "boy", "go", ":arg0", ":arg1", ":arg4", "(", ")", "the", "wants",
                                       "to", "a", "an", "of", "and", "city"});
  f.vocabs.labels = Vocab::from_tokens({"ARG0", "ARG1", "ARG4"});
  f.vocabs.chars = build_char_vocab({linearize(f.entry.graph).tokens});
  return f;
}

GradCheckResult check_model_gradients(ModelConfig config, const GradCheckOptions& options, std::uint64_t seed) {
  CheckFixture f = gradcheck_fixture();
  config.freeze_embeddings = false;
  const EmbeddingTable table = random_embeddings(f.vocabs.words, config.word_dim, seed);
  Model model(config, f.vocabs, table, seed);
  const Instance inst = model.prepare(f.entry);
  const auto fn = [&](Tape& tape) { return model.loss(tape, inst); };
  const auto params = model.params().trainable();
  return finite_diff_check(fn, params, options);
}

}  // namespace g2s
