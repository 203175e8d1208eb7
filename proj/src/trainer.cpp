#include "g2s/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "g2s/bleu.hpp"
#include "g2s/checkpoint.hpp"

namespace g2s {

Trainer::Trainer(Model& model, const TrainConfig& config)
    : model_(model),
      config_(config),
      adam_{config.learning_rate, config.beta1, config.beta2, config.adam_epsilon},
      rng_(config.seed ^ 0x9e3779b97f4a7c15ull) {
  if (config.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
}

std::vector<std::vector<std::size_t>> Trainer::make_batches(const std::vector<Instance>& data) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng_);
  auto size_of = [&](std::size_t i) { return data[i].surfaces.size() + data[i].target.size(); };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return size_of(a) < size_of(b); });
  std::vector<std::vector<std::size_t>> batches;
  const auto bs = static_cast<std::size_t>(config_.batch_size);
  for (std::size_t i = 0; i < order.size(); i += bs)
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + bs)));
  std::shuffle(batches.begin(), batches.end(), rng_);
  return batches;
}

LossStats Trainer::train_batch(const std::vector<const Instance*>& batch) {
  LossStats stats;
  if (batch.empty()) return stats;
  Tape tape;
  const RunOptions opts{config_.dropout, config_.dropout > 0.0 ? &rng_ : nullptr, config_.threads};
  std::vector<Var> losses;
  for (const Instance* inst : batch) losses.push_back(model_.loss(tape, *inst, opts, &stats));
  Var total = scale(sum(losses), 1.0 / static_cast<double>(stats.tokens));
  model_.params().zero_grad();
  tape.backward(total);
  auto params = model_.params().all();
  clip_grad_norm(params, config_.clip_norm);
  adam_step(params, adam_);
  return stats;
}

LossStats Trainer::train_epoch(const std::vector<Instance>& data) {
  LossStats stats;
  for (const auto& idx : make_batches(data)) {
    std::vector<const Instance*> batch;
    for (std::size_t i : idx) batch.push_back(&data[i]);
    stats += train_batch(batch);
  }
  return stats;
}

LossStats Trainer::evaluate(const std::vector<Instance>& data) const {
  LossStats stats;
  const RunOptions opts{0.0, nullptr, config_.threads};
  for (const auto& inst : data) {
    Tape tape(false);
    model_.loss(tape, inst, opts, &stats);
  }
  return stats;
}

std::vector<std::vector<std::string>> Trainer::decode(const std::vector<Instance>& data, bool greedy) const {
  DecodeOptions d;
  d.beam = config_.beam;
  d.max_len = config_.max_len;
  d.greedy = greedy;
  return model_.generate_all(data, d, config_.threads);
}

double Trainer::bleu(const std::vector<Instance>& data, bool greedy) const {
  std::vector<std::vector<std::string>> refs;
  for (const auto& inst : data) refs.push_back(inst.target);
  return corpus_bleu(decode(data, greedy), refs);
}

TrainResult train(Model& model, const TrainPlan& plan, const TrainConfig& config, std::ostream* log,
                  const std::string& checkpoint_path) {
  if (plan.train.empty()) throw std::invalid_argument("train: empty training corpus");
  Trainer trainer(model, config);
  TrainResult result;
  bool have_best = false;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (!plan.auxiliary.empty()) trainer.train_epoch(plan.auxiliary);
    const LossStats stats = trainer.train_epoch(plan.train);
    EpochRecord rec{epoch, stats.loss / static_cast<double>(std::max<std::size_t>(stats.tokens, 1)), 0.0};
    if (!plan.dev.empty()) rec.dev_bleu = trainer.bleu(plan.dev);
    result.history.push_back(rec);
    if (log) *log << rec.epoch << '\t' << rec.train_loss << '\t' << rec.dev_bleu << '\n' << std::flush;
    if (!have_best || plan.dev.empty() || rec.dev_bleu > result.best_bleu) {
      have_best = true;
      result.best_epoch = epoch;
      result.best_bleu = rec.dev_bleu;
      if (!checkpoint_path.empty())
        save_checkpoint(checkpoint_path, model, config,
                        {{"epoch", epoch}, {"dev_bleu", rec.dev_bleu}, {"train_loss", rec.train_loss}});
    }
  }
  return result;
}

}  // namespace g2s
