#include "g2s/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "CLI11.hpp"
#include "json.hpp"

#include "g2s/bleu.hpp"
#include "g2s/checkpoint.hpp"
#include "g2s/corpus.hpp"
#include "g2s/model_check.hpp"
#include "g2s/trainer.hpp"

namespace g2s {

namespace {

struct ArchFlags {
  std::string encoder = "graph";
  bool copy = false;
  bool use_char = false;
  int steps = kDefaultTransitionSteps;
  int hidden = 300;
  int word_dim = 300;
  int label_dim = 300;
  int input_dim = 0;
  int char_dim = 100;
  int char_hidden = 100;
  std::string graph_direction = "both";
  std::string seq_direction = "both";

  void add_to(CLI::App& app) {
    app.add_option("--encoder", encoder, "Encoder: seq or graph")->check(CLI::IsMember({"seq", "graph"}))->capture_default_str();
    app.add_flag("--copy", copy, "Enable the copy mechanism");
    app.add_flag("--char", use_char, "Add character-LSTM token features");
    app.add_option("--steps", steps, "Graph state transitions T")->check(CLI::NonNegativeNumber)->capture_default_str();
    app.add_option("--hidden", hidden, "Hidden size")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--word-dim", word_dim, "Word embedding size")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--label-dim", label_dim, "Edge label embedding size")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--input-dim", input_dim, "Projected input size (0: hidden)")->check(CLI::NonNegativeNumber)->capture_default_str();
    app.add_option("--char-dim", char_dim, "Character embedding size")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--char-hidden", char_hidden, "Character LSTM size")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--graph-direction", graph_direction, "both, incoming or outgoing")
        ->check(CLI::IsMember({"both", "incoming", "outgoing"}))->capture_default_str();
    app.add_option("--seq-direction", seq_direction, "both, forward or backward")
        ->check(CLI::IsMember({"both", "forward", "backward"}))->capture_default_str();
  }

  ModelConfig config() const {
    ModelConfig c;
    c.encoder = parse_encoder_kind(encoder);
    c.copy = copy;
    c.use_char = use_char;
    c.steps = steps;
    c.hidden = hidden;
    c.word_dim = word_dim;
    c.label_dim = label_dim;
    c.input_dim = input_dim;
    c.char_dim = char_dim;
    c.char_hidden = char_hidden;
    c.graph_direction = parse_graph_direction(graph_direction);
    c.seq_direction = parse_seq_direction(seq_direction);
    return c;
  }
};

std::vector<CorpusEntry> load_corpus(const std::string& amr, const std::string& sentences, bool need_sentences) {
  auto corpus = read_corpus(amr);
  if (!sentences.empty()) attach_sentences(corpus, sentences);
  if (need_sentences)
    for (const auto& e : corpus)
      if (!e.sentence)
        throw std::runtime_error("'" + amr + "': entry '" + e.id + "' has no sentence (use # ::snt or a sentence file)");
  return corpus;
}

std::vector<Instance> prepare_all(const Model& model, const std::vector<CorpusEntry>& corpus) {
  std::vector<Instance> out;
  out.reserve(corpus.size());
  for (const auto& e : corpus) out.push_back(model.prepare(e));
  return out;
}

std::string join(const std::vector<std::string>& toks) {
  std::string s;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) s += ' ';
    s += toks[i];
  }
  return s;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  for (const auto& l : lines) f << l << '\n';
}

int cmd_preprocess(const std::string& input, const std::string& sentences, const std::string& out_dir,
                   int min_count, std::ostream& out) {
  const auto corpus = load_corpus(input, sentences, false);
  std::filesystem::create_directories(out_dir);
  const ModelVocabs v = build_model_vocabs(corpus, min_count);
  const std::filesystem::path dir(out_dir);
  v.words.save((dir / "vocab.txt").string());
  v.labels.save((dir / "labels.txt").string());
  v.chars.save((dir / "chars.txt").string());
  std::vector<std::string> lin, snt;
  std::ofstream graphs(dir / "graphs.jsonl");
  if (!graphs) throw std::runtime_error("cannot write '" + (dir / "graphs.jsonl").string() + "'");
  for (const auto& e : corpus) {
    lin.push_back(linearize(e.graph).str());
    if (e.sentence) snt.push_back(join(tokenize(*e.sentence)));
    nlohmann::json j;
    j["id"] = e.id;
    j["root"] = e.graph.root();
    j["nodes"] = nlohmann::json::array();
    for (const auto& n : e.graph.nodes()) j["nodes"].push_back(surface_form(n));
    j["edges"] = nlohmann::json::array();
    for (const auto& ed : e.graph.edges()) j["edges"].push_back({ed.source, ed.target, ed.label});
    graphs << j.dump() << '\n';
  }
  write_lines((dir / "linearized.txt").string(), lin);
  if (!snt.empty()) write_lines((dir / "sentences.txt").string(), snt);
  out << "preprocessed " << corpus.size() << " graphs, " << v.words.size() << " words, " << v.labels.size()
      << " labels\n";
  return 0;
}

int cmd_stats(const std::string& input, const std::vector<std::string>& pair, std::ostream& out) {
  const auto corpus = read_corpus(input);
  std::vector<AmrGraph> graphs;
  for (const auto& e : corpus) graphs.push_back(e.graph);
  out << "# diameter\tcumulative_fraction\n";
  for (const auto& [d, frac] : diameter_histogram(graphs)) out << d << '\t' << fixed(frac, 3) << '\n';

  std::size_t edges = 0;
  long total = 0;
  int worst = 0;
  for (const auto& g : graphs) {
    const LinearizedAmr lin = linearize(g);
    for (const auto& e : g.edges()) {
      const int d = std::abs(lin.node_positions[e.source] - lin.node_positions[e.target]);
      ++edges;
      total += d;
      worst = std::max(worst, d);
    }
  }
  out << "# edge endpoint token distance: edges " << edges << " mean "
      << fixed(edges ? static_cast<double>(total) / static_cast<double>(edges) : 0.0, 3) << " max " << worst << '\n';
  if (pair.size() == 2) {
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      try {
        const int d = token_distance(linearize(corpus[i].graph), pair[0], pair[1]);
        out << "# distance\t" << (corpus[i].id.empty() ? std::to_string(i + 1) : corpus[i].id) << '\t' << pair[0]
            << '\t' << pair[1] << '\t' << d << '\n';
      } catch (const std::invalid_argument&) {
      }
    }
  }
  return 0;
}

struct TrainFlags {
  std::string train, train_snt, dev, dev_snt, aux, aux_snt, embeddings, out, log;
};

int cmd_train(const TrainFlags& f, TrainConfig cfg, std::ostream& out) {
  const auto train_corpus = load_corpus(f.train, f.train_snt, true);
  if (train_corpus.empty()) throw std::runtime_error("'" + f.train + "' holds no graphs");
  std::vector<CorpusEntry> dev_corpus, aux_corpus;
  if (!f.dev.empty()) dev_corpus = load_corpus(f.dev, f.dev_snt, true);
  if (!f.aux.empty()) aux_corpus = load_corpus(f.aux, f.aux_snt, true);

  std::vector<CorpusEntry> vocab_source = train_corpus;
  vocab_source.insert(vocab_source.end(), aux_corpus.begin(), aux_corpus.end());
  ModelVocabs vocabs = build_model_vocabs(vocab_source, cfg.min_count);
  const EmbeddingTable table = f.embeddings.empty()
                                   ? random_embeddings(vocabs.words, cfg.model.word_dim, cfg.seed)
                                   : load_pretrained(f.embeddings, vocabs.words, cfg.model.word_dim, cfg.seed);
  Model model(cfg.model, std::move(vocabs), table, cfg.seed);
  TrainPlan plan{prepare_all(model, train_corpus), prepare_all(model, dev_corpus), prepare_all(model, aux_corpus)};

  std::ofstream log_file;
  std::ostream* log = &out;
  if (!f.log.empty()) {
    log_file.open(f.log);
    if (!log_file) throw std::runtime_error("cannot write '" + f.log + "'");
    log = &log_file;
  }
  const TrainResult r = train(model, plan, cfg, log, f.out);
  out << "best epoch " << r.best_epoch << " dev_bleu " << fixed(r.best_bleu, 2) << " saved to " << f.out << '\n';
  return 0;
}

int cmd_generate(CLI::App& sub, const std::string& model_path, const std::string& input, const std::string& output,
                 int beam, bool greedy, int max_len, int threads, std::ostream& out, std::ostream& err) {
  LoadedCheckpoint ck = load_checkpoint(model_path);
  for (const char* arch : {"--encoder", "--copy", "--char", "--steps", "--hidden", "--word-dim", "--label-dim",
                           "--input-dim", "--graph-direction", "--seq-direction"})
    if (sub.count(arch) > 0) err << "warning: " << arch << " ignored; the architecture comes from the checkpoint\n";
  DecodeOptions d;
  d.beam = sub.count("--beam") ? beam : ck.config.beam;
  d.max_len = sub.count("--max-len") ? max_len : ck.config.max_len;
  d.greedy = greedy;
  const int workers = sub.count("--threads") ? threads : ck.config.threads;
  const auto corpus = read_corpus(input);
  const auto outputs = ck.model->generate_all(prepare_all(*ck.model, corpus), d, workers);
  std::ofstream file;
  std::ostream* sink = &out;
  if (!output.empty()) {
    file.open(output);
    if (!file) throw std::runtime_error("cannot write '" + output + "'");
    sink = &file;
  }
  for (const auto& toks : outputs) *sink << join(toks) << '\n';
  return 0;
}

int cmd_eval(const std::string& hyp, const std::string& ref, std::ostream& out) {
  const double b = corpus_bleu(read_lines(hyp), read_lines(ref));
  out << "BLEU = " << fixed(b, 4) << '\n';
  return 0;
}

int cmd_gradcheck(CLI::App& sub, const ArchFlags& arch, const std::string& model_path, int samples, double epsilon,
                  std::uint64_t seed, std::ostream& out) {
  std::vector<ModelConfig> configs;
  if (!model_path.empty()) {
    configs.push_back(load_checkpoint(model_path).config.model);
  } else {
    ModelConfig base = arch.config();
    base.copy = true;
    base.use_char = true;
    if (sub.count("--encoder")) {
      configs.push_back(base);
    } else {
      for (EncoderKind k : {EncoderKind::graph, EncoderKind::seq}) {
        base.encoder = k;
        configs.push_back(base);
      }
    }
  }
  GradCheckOptions opts;
  opts.epsilon = epsilon;
  opts.stencil = Stencil::five_point;
  opts.floor = 1e-6;
  opts.max_entries_per_param = samples;
  opts.seed = seed;
  double worst = 0.0;
  for (const auto& cfg : configs) {
    const std::string tag = to_string(cfg.encoder) + (cfg.copy ? "+copy" : "") + (cfg.use_char ? "+char" : "");
    const GradCheckResult r = check_model_gradients(cfg, opts, seed);
    for (const auto& [name, e] : r.per_parameter) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.3e", e);
      out << tag << '\t' << name << '\t' << buf << '\n';
    }
    worst = std::max(worst, r.max_relative_error);
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", worst);
  const bool ok = worst < 1e-4;
  out << "max relative error " << buf << (ok ? " ok" : " FAILED") << '\n';
  return ok ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph-to-sequence AMR-to-text generation"};
  app.require_subcommand(1);

  std::string input, sentences, out_dir, model_path, output, hyp, ref;
  int min_count = 1;
  auto* pre = app.add_subcommand("preprocess", "Vocabularies, linearizations and graph files from a corpus");
  pre->add_option("--input", input, "AMR corpus")->required()->check(CLI::ExistingFile);
  pre->add_option("--sentences", sentences, "Sentence file, one per graph")->check(CLI::ExistingFile);
  pre->add_option("--out-dir", out_dir, "Output directory")->required();
  pre->add_option("--min-count", min_count, "Minimum token count")->check(CLI::PositiveNumber)->capture_default_str();

  std::vector<std::string> pair;
  auto* stats = app.add_subcommand("stats", "Diameter histogram and linearization distance report");
  stats->add_option("--input", input, "AMR corpus")->required()->check(CLI::ExistingFile);
  stats->add_option("--pair", pair, "Two concept tokens to measure")->expected(2);

  TrainConfig cfg;
  ArchFlags arch;
  TrainFlags tf;
  auto* tr = app.add_subcommand("train", "Train a model");
  arch.add_to(*tr);
  tr->add_option("--train", tf.train, "Training AMR corpus")->required()->check(CLI::ExistingFile);
  tr->add_option("--train-snt", tf.train_snt, "Training sentences")->check(CLI::ExistingFile);
  tr->add_option("--dev", tf.dev, "Dev AMR corpus")->check(CLI::ExistingFile);
  tr->add_option("--dev-snt", tf.dev_snt, "Dev sentences")->check(CLI::ExistingFile);
  tr->add_option("--aux", tf.aux, "Auxiliary corpus run before every epoch")->check(CLI::ExistingFile);
  tr->add_option("--aux-snt", tf.aux_snt, "Auxiliary sentences")->check(CLI::ExistingFile);
  tr->add_option("--embeddings", tf.embeddings, "Pretrained word vectors (text)")->check(CLI::ExistingFile);
  tr->add_option("--out", tf.out, "Checkpoint path")->required();
  tr->add_option("--log", tf.log, "Training log (default: stdout)");
  tr->add_option("--epochs", cfg.epochs, "Epochs")->check(CLI::PositiveNumber)->capture_default_str();
  tr->add_option("--batch-size", cfg.batch_size, "Batch size")->check(CLI::PositiveNumber)->capture_default_str();
  tr->add_option("--lr", cfg.learning_rate, "Adam learning rate")->capture_default_str();
  tr->add_option("--dropout", cfg.dropout, "Dropout rate")->check(CLI::Range(0.0, 0.99))->capture_default_str();
  tr->add_option("--clip", cfg.clip_norm, "Gradient norm clip")->capture_default_str();
  tr->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  tr->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  tr->add_option("--beam", cfg.beam, "Beam size for dev decoding")->check(CLI::PositiveNumber)->capture_default_str();
  tr->add_option("--max-len", cfg.max_len, "Maximum output length")->check(CLI::PositiveNumber)->capture_default_str();
  tr->add_option("--min-count", cfg.min_count, "Minimum token count")->check(CLI::PositiveNumber)->capture_default_str();

  int beam = kDefaultBeam, max_len = kDefaultMaxLength, threads = 1;
  bool greedy = false;
  ArchFlags ignored;
  auto* gen = app.add_subcommand("generate", "Generate sentences from AMR graphs");
  ignored.add_to(*gen);
  gen->add_option("--model", model_path, "Checkpoint")->required()->check(CLI::ExistingFile);
  gen->add_option("--input", input, "AMR corpus")->required()->check(CLI::ExistingFile);
  gen->add_option("--output", output, "Output file (default: stdout)");
  gen->add_option("--beam", beam, "Beam size")->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_flag("--greedy", greedy, "Greedy argmax decoding");
  gen->add_option("--max-len", max_len, "Maximum output length")->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--threads", threads, "Examples decoded in parallel")->check(CLI::PositiveNumber)->capture_default_str();

  auto* ev = app.add_subcommand("eval", "Corpus BLEU between two files");
  ev->add_option("--hyp", hyp, "Hypotheses, one per line")->required()->check(CLI::ExistingFile);
  ev->add_option("--ref", ref, "References, one per line")->required()->check(CLI::ExistingFile);

  int samples = 5;
  double epsilon = 1e-3;
  std::uint64_t check_seed = 7;
  ArchFlags check_arch;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of every parameter group");
  check_arch.add_to(*gc);
  gc->add_option("--model", model_path, "Take the architecture from a checkpoint")->check(CLI::ExistingFile);
  gc->add_option("--samples", samples, "Entries per parameter group (0: all)")->check(CLI::NonNegativeNumber)->capture_default_str();
  gc->add_option("--epsilon", epsilon, "Finite-difference step")->capture_default_str();
  gc->add_option("--seed", check_seed, "Seed for sampling and initialization")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*pre) return cmd_preprocess(input, sentences, out_dir, min_count, out);
    if (*stats) return cmd_stats(input, pair, out);
    if (*tr) {
      cfg.model = arch.config();
      return cmd_train(tf, cfg, out);
    }
    if (*gen) return cmd_generate(*gen, model_path, input, output, beam, greedy, max_len, threads, out, err);
    if (*ev) return cmd_eval(hyp, ref, out);
    if (*gc) return cmd_gradcheck(*gc, check_arch, model_path, samples, epsilon, check_seed, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace g2s
