#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "songlm/corpus.hpp"
#include "songlm/language_model.hpp"
#include "songlm/optim.hpp"

namespace songlm {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainSpec {
  std::size_t batch_size = 32;
  double lr = 1e-3;
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::adam;
  double weight_decay = 0.01;  // used by AdamW only
  double grad_clip = 1.0;      // global-norm safety clip; <= 0 disables

  void validate() const;
  OptimizerConfig optimizer_config() const;
  nlohmann::json to_json() const;
};

/// Patience-based stopping on a metric that should decrease (or increase
/// when `maximize` is set). Strict improvement resets the counter.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience, bool maximize = false);

  /// Records one epoch's metric; returns true when training should stop.
  bool update(double metric);
  bool improved() const { return improved_; }
  double best() const { return best_; }
  std::size_t best_epoch() const { return best_epoch_; }
  std::size_t epochs() const { return epochs_; }
  std::size_t stale_epochs() const { return stale_; }

 private:
  std::size_t patience_;
  bool maximize_;
  double best_;
  std::size_t best_epoch_ = 0;
  std::size_t epochs_ = 0;
  std::size_t stale_ = 0;
  bool improved_ = false;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double eval_loss = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_eval_loss = std::numeric_limits<double>::infinity();
  bool stopped_early = false;
  std::size_t truncated_songs = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Teacher-forced next-token training with whole-song batches. The model is
/// left holding the parameters of the best eval epoch.
TrainHistory train(const LanguageModel<float>& model, const Corpus& train_set, const Corpus& eval_set,
                   const TrainSpec& spec, const EpochCallback& on_epoch = {});

/// Mean next-token cross-entropy over every prediction position (the
/// training objective), without dropout.
double mean_loss(const LanguageModel<float>& model, const Corpus& corpus);

/// Songs longer than the model's window keep their final `window` tokens.
std::vector<std::vector<TokenId>> training_sequences(const Corpus& corpus, std::size_t window,
                                                     std::size_t* truncated = nullptr);

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path);
std::string history_csv(const TrainHistory& history);

}  // namespace songlm
