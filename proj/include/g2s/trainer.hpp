#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "g2s/adam.hpp"
#include "g2s/config.hpp"
#include "g2s/model.hpp"

namespace g2s {

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;  // mean per-token loss
  double dev_bleu = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_bleu = 0.0;
};

// Owns the optimizer state and the shuffling stream for one model.
class Trainer {
 public:
  Trainer(Model& model, const TrainConfig& config);

  // One pass over `data` in shuffled, length-bucketed batches. Loss is
  // averaged per token within each batch.
  LossStats train_epoch(const std::vector<Instance>& data);
  // One optimizer update on the given examples.
  LossStats train_batch(const std::vector<const Instance*>& batch);

  // Teacher-forced statistics without dropout.
  LossStats evaluate(const std::vector<Instance>& data) const;
  std::vector<std::vector<std::string>> decode(const std::vector<Instance>& data, bool greedy = false) const;
  // Corpus BLEU of beam output against the instance targets.
  double bleu(const std::vector<Instance>& data, bool greedy = false) const;

  Model& model() { return model_; }

 private:
  std::vector<std::vector<std::size_t>> make_batches(const std::vector<Instance>& data);

  Model& model_;
  TrainConfig config_;
  AdamOptions adam_;
  Rng rng_;
};

struct TrainPlan {
  std::vector<Instance> train;
  std::vector<Instance> dev;
  // Optional auxiliary corpus run before each epoch's pass over `train`
  // (pretraining data with per-epoch fine-tuning).
  std::vector<Instance> auxiliary;
};

// Runs config.epochs epochs, logging "epoch\ttrain_loss\tdev_bleu" per epoch
// and saving the best-dev-BLEU model to checkpoint_path (when non-empty).
// Without a dev set every epoch counts as the best so far.
TrainResult train(Model& model, const TrainPlan& plan, const TrainConfig& config, std::ostream* log,
                  const std::string& checkpoint_path);

}  // namespace g2s
