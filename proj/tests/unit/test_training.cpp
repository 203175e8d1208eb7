#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "g2s/adam.hpp"
#include "g2s/checkpoint.hpp"
#include "g2s/trainer.hpp"

using namespace g2s;
namespace fs = std::filesystem;

namespace {

ModelConfig tiny_config(bool copy = false) {
  ModelConfig c;
  c.copy = copy;
  c.steps = 3;
  c.hidden = 8;
  c.word_dim = 8;
  c.label_dim = 8;
  return c;
}

std::vector<CorpusEntry> toy(std::size_t n = 20) {
  auto corpus = read_corpus(std::string(G2S_TEST_DATA) + "/toy20.amr");
  corpus.resize(std::min(n, corpus.size()));
  return corpus;
}

std::unique_ptr<Model> make_model(const ModelConfig& c, const std::vector<CorpusEntry>& corpus,
                                  std::uint64_t seed = 5) {
  ModelVocabs v = build_model_vocabs(corpus);
  const EmbeddingTable emb = random_embeddings(v.words, c.word_dim, seed);
  return std::make_unique<Model>(c, std::move(v), emb, seed);
}

std::vector<Instance> prepare_all(const Model& m, const std::vector<CorpusEntry>& corpus) {
  std::vector<Instance> out;
  for (const auto& e : corpus) out.push_back(m.prepare(e));
  return out;
}

std::string temp_path(const std::string& name) {
  return (fs::temp_directory_path() / ("g2s_test_" + std::to_string(::getpid()) + "_" + name)).string();
}


}  // namespace

TEST(Adam, ScalarTraceMatchesHandComputation) {
  Parameter p("x", Matrix::Constant(1, 1, 1.0));
  Parameter* ps[] = {&p};
  const AdamOptions opt;
  double x = 1.0, m = 0.0, v = 0.0;
  const double grads[] = {0.5, -0.2, 1.0};
  for (int t = 1; t <= 3; ++t) {
    const double g = grads[t - 1];
    p.grad()(0, 0) = g;
    adam_step(ps, opt);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.999, t));
    x -= 0.001 * mh / (std::sqrt(vh) + 1e-8);
    EXPECT_NEAR(p.value()(0, 0), x, 1e-15) << "step " << t;
  }
  EXPECT_EQ(p.steps(), 3);
}

TEST(Adam, ZeroGradientIsNoOpAndFirstStepIsLearningRate) {
  Parameter still("a", Matrix::Constant(2, 2, 0.7));
  Parameter moving("b", Matrix::Zero(1, 3));
  moving.grad() << 3.0, -0.01, 250.0;
  Parameter* ps[] = {&still, &moving};
  adam_step(ps, {});
  EXPECT_EQ(still.value(), Matrix::Constant(2, 2, 0.7));
  EXPECT_NEAR(moving.value()(0), -0.001, 1e-9);
  EXPECT_NEAR(moving.value()(1), 0.001, 1e-6);
  EXPECT_NEAR(moving.value()(2), -0.001, 1e-9);
}

TEST(Adam, FrozenParametersUntouched) {
  Parameter frozen("f", Matrix::Ones(2, 1), true);
  frozen.grad().setConstant(1.0);
  Parameter* ps[] = {&frozen};
  adam_step(ps, {});
  EXPECT_EQ(frozen.value(), Matrix::Ones(2, 1));
}

TEST(Clipping, RescalesToMaxNorm) {
  Parameter a("a", Matrix::Zero(1, 2)), b("b", Matrix::Zero(1, 1));
  a.grad() << 6.0, 0.0;
  b.grad() << 8.0;
  Parameter* ps[] = {&a, &b};
  EXPECT_DOUBLE_EQ(clip_grad_norm(ps, 5.0), 10.0);
  EXPECT_NEAR(global_grad_norm(ps), 5.0, 1e-12);
  EXPECT_NEAR(a.grad()(0), 3.0, 1e-12);
  EXPECT_NEAR(b.grad()(0), 4.0, 1e-12);
  EXPECT_NEAR(clip_grad_norm(ps, 5.0), 5.0, 1e-12);
  EXPECT_NEAR(a.grad()(0), 3.0, 1e-12);
}

TEST(Loss, ZeroOutputLayerGivesUniformLoss) {
  const auto corpus = toy(4);
  for (EncoderKind kind : {EncoderKind::graph, EncoderKind::seq}) {
    ModelConfig c = tiny_config();
    c.encoder = kind;
    auto model = make_model(c, corpus);
    model->params().find("output.weight")->value().setZero();
    model->params().find("output.bias")->value().setZero();
    const double v = model->vocabs().words.size();
    for (const auto& e : corpus) {
      const Instance inst = model->prepare(e);
      Tape t;
      LossStats stats;
      const double loss = model->loss(t, inst, {}, &stats).scalar();
      const double m = static_cast<double>(inst.target.size() + 1);
      EXPECT_NEAR(loss, m * std::log(v), 1e-9);
      EXPECT_EQ(stats.tokens, inst.target.size() + 1);
    }
  }
}

TEST(Loss, SingleTokenLossIsNegativeLogProbability) {
  const auto corpus = toy(3);
  for (bool copy : {false, true}) {
    auto model = make_model(tiny_config(copy), corpus);
    Instance inst = model->prepare(corpus[0]);
    inst.target = {"boy"};
    Tape t;
    const double loss = model->loss(t, inst).scalar();
    Tape u;
    const Encoded enc = model->encode(u, inst);
    const StepResult s1 = model->step(u, enc, enc.initial, Vocab::kStart);
    const int boy = *model->gold_id(inst, "boy");
    const StepResult s2 = model->step(u, enc, s1.state, boy);
    const double expected = -std::log(s1.p_final.value()(boy)) - std::log(s2.p_final.value()(Vocab::kEnd));
    EXPECT_NEAR(loss, expected, 1e-12);
  }
}

TEST(Training, FrozenEmbeddingsStayFixed) {
  const auto corpus = toy(6);
  auto model = make_model(tiny_config(), corpus);
  const Matrix words = model->params().find("embedding.words")->value();
  const Matrix out = model->params().find("output.weight")->value();
  TrainConfig tc;
  tc.model = model->config();
  Trainer trainer(*model, tc);
  const auto data = prepare_all(*model, corpus);
  trainer.train_epoch(data);
  EXPECT_EQ(model->params().find("embedding.words")->value(), words);
  EXPECT_NE(model->params().find("output.weight")->value(), out);
}

TEST(Training, EmptyCorpusIsRejected) {
  const auto corpus = toy(2);
  auto model = make_model(tiny_config(), corpus);
  TrainConfig tc;
  tc.model = model->config();
  tc.epochs = 1;
  EXPECT_THROW(train(*model, TrainPlan{}, tc, nullptr, ""), std::invalid_argument);
  EXPECT_THROW(build_model_vocabs({}), std::exception);
}

TEST(Checkpoint, RoundTripIsBitIdentical) {
  const auto corpus = toy(5);
  auto model = make_model(tiny_config(true), corpus);
  TrainConfig tc;
  tc.model = model->config();
  tc.epochs = 1;
  Trainer trainer(*model, tc);
  const auto data = prepare_all(*model, corpus);
  trainer.train_epoch(data);

  const std::string path = temp_path("roundtrip.ckpt");
  save_checkpoint(path, *model, tc, {{"epoch", 1}});
  const LoadedCheckpoint loaded = load_checkpoint(path);
  EXPECT_EQ(loaded.meta.at("epoch"), 1);
  EXPECT_EQ(loaded.config.model.hidden, 8);
  EXPECT_TRUE(loaded.config.model.copy);
  EXPECT_EQ(loaded.model->vocabs().words, model->vocabs().words);
  ASSERT_EQ(loaded.model->params().all().size(), model->params().all().size());
  for (std::size_t k = 0; k < model->params().all().size(); ++k) {
    const Parameter& a = *model->params().all()[k];
    const Parameter& b = *loaded.model->params().all()[k];
    EXPECT_EQ(a.name(), b.name());
    EXPECT_EQ(a.frozen(), b.frozen());
    EXPECT_EQ(a.value(), b.value()) << a.name();
  }
  const DecodeOptions opts{3, 20, false};
  for (const auto& e : corpus) {
    const Instance x = model->prepare(e), y = loaded.model->prepare(e);
    EXPECT_EQ(model->generate(x, opts), loaded.model->generate(y, opts));
    Tape t1, t2;
    EXPECT_EQ(model->loss(t1, x).scalar(), loaded.model->loss(t2, y).scalar());
  }
  fs::remove(path);
}

TEST(Checkpoint, DamagedFilesAreRejected) {
  const auto corpus = toy(2);
  auto model = make_model(tiny_config(), corpus);
  const std::string path = temp_path("damaged.ckpt");
  save_checkpoint(path, *model, TrainConfig{});
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write = [&](const std::string& b) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
  };

  std::string flipped = bytes;
  flipped[flipped.size() / 2] ^= 0x5a;
  write(flipped);
  EXPECT_THROW(load_checkpoint(path), CheckpointError);

  write(bytes.substr(0, bytes.size() - 20));
  EXPECT_THROW(load_checkpoint(path), CheckpointError);

  std::string version = bytes;
  version[8] = static_cast<char>(kCheckpointVersion + 1);
  write(version);
  EXPECT_THROW(load_checkpoint(path), CheckpointError);

  std::string magic = bytes;
  magic[0] = 'X';
  write(magic);
  EXPECT_THROW(load_checkpoint(path), CheckpointError);

  write(bytes);
  EXPECT_NO_THROW(load_checkpoint(path));
  fs::remove(path);
  EXPECT_THROW(load_checkpoint(path), CheckpointError);
}

TEST(Training, SavedCheckpointIsBestDevEpoch) {
  const auto corpus = toy(20);
  const std::vector<CorpusEntry> train_part(corpus.begin(), corpus.begin() + 14);
  const std::vector<CorpusEntry> dev_part(corpus.begin() + 14, corpus.end());
  auto model = make_model(tiny_config(), corpus);
  TrainConfig tc;
  tc.model = model->config();
  tc.epochs = 4;
  tc.batch_size = 4;
  tc.beam = 2;
  tc.max_len = 15;
  tc.learning_rate = 0.02;
  TrainPlan plan;
  plan.train = prepare_all(*model, train_part);
  plan.dev = prepare_all(*model, dev_part);
  const std::string path = temp_path("best.ckpt");
  std::ostringstream log;
  const TrainResult r = train(*model, plan, tc, &log, path);
  ASSERT_EQ(r.history.size(), 4u);
  double best = -1.0;
  for (const auto& h : r.history) best = std::max(best, h.dev_bleu);
  EXPECT_EQ(r.best_bleu, best);
  EXPECT_EQ(r.history[static_cast<std::size_t>(r.best_epoch - 1)].dev_bleu, best);

  const LoadedCheckpoint loaded = load_checkpoint(path);
  std::vector<Instance> dev;
  for (const auto& e : dev_part) dev.push_back(loaded.model->prepare(e));
  const Trainer check(*loaded.model, loaded.config);
  EXPECT_NEAR(check.bleu(dev), best, 1e-9);

  std::istringstream lines(log.str());
  std::string line;
  int count = 0;
  while (std::getline(lines, line))
    if (!line.empty() && line[0] != '#') ++count;
  EXPECT_EQ(count, 4);
  fs::remove(path);
}
