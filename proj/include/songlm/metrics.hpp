#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "songlm/corpus.hpp"
#include "songlm/language_model.hpp"
#include "songlm/markov.hpp"
#include "songlm/matrix.hpp"

namespace songlm {

class MetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Anything that yields next-token distributions for a whole song.
class NextTokenPredictor {
 public:
  virtual ~NextTokenPredictor() = default;
  /// (n-1) x V matrix; row t-1 is q( . | ids[0..t-1]) for target ids[t].
  virtual Matrix predict(const Song& song) const = 0;
  virtual std::size_t vocab_size() const = 0;
};

class MarkovPredictor final : public NextTokenPredictor {
 public:
  explicit MarkovPredictor(const MarkovModel& model) : model_(model) {}
  Matrix predict(const Song& song) const override;
  std::size_t vocab_size() const override { return model_.vocab_size(); }

 private:
  const MarkovModel& model_;
};

class NeuralPredictor final : public NextTokenPredictor {
 public:
  explicit NeuralPredictor(const LanguageModel<float>& model) : model_(model) {}
  Matrix predict(const Song& song) const override;
  std::size_t vocab_size() const override { return model_.vocab_size(); }

 private:
  const LanguageModel<float>& model_;
};

/// Uniform over a fixed support set of token ids.
class UniformPredictor final : public NextTokenPredictor {
 public:
  UniformPredictor(std::size_t vocab_size, std::vector<TokenId> support);
  Matrix predict(const Song& song) const override;
  std::size_t vocab_size() const override { return vocab_size_; }

 private:
  std::size_t vocab_size_;
  std::vector<TokenId> support_;
};

/// Include flags over a song's n-1 prediction positions. Excluded: the first
/// syllable (target index 1) and eos (target index n-1).
std::vector<std::uint8_t> prediction_mask(const Song& song);

/// Optional extra restriction: (song index, target index) -> include.
using PositionFilter = std::function<bool(std::size_t, std::size_t)>;

struct SongScore {
  std::size_t song = 0;
  std::size_t n_predictions = 0;
  std::size_t n_correct = 0;
  std::size_t n_infinite = 0;
  double nats_sum = 0.0;  // finite positions only
};

struct NextTokenScores {
  double cross_entropy = 0.0;  // mean nats; +inf when any position had q(true) = 0
  double accuracy = 0.0;
  std::size_t n_predictions = 0;
  std::size_t n_correct = 0;
  std::size_t n_infinite = 0;
  std::vector<SongScore> per_song;
};

/// Cross-entropy and accuracy over the identical prediction mask. Argmax
/// ties go to the lowest id.
NextTokenScores evaluate_next_token(const NextTokenPredictor& predictor, const Corpus& corpus,
                                    const PositionFilter& filter = {});

struct CrossEntropyResult {
  double mean_nats = 0.0;
  std::size_t n_predictions = 0;
  std::size_t n_infinite = 0;
};

CrossEntropyResult next_token_cross_entropy(const NextTokenPredictor& predictor, const Corpus& corpus);
double next_token_accuracy(const NextTokenPredictor& predictor, const Corpus& corpus);

// ---------------------------------------------------------------- binary classification

struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  double accuracy() const;
  double true_positive_rate() const;
  double false_positive_rate() const;
};

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct ClassificationReport {
  double accuracy = 0.0;  // at the decision threshold
  ConfusionCounts counts;
  std::vector<RocPoint> roc;  // from (0,0) to (1,1), FPR nondecreasing
  double auc = 0.0;
};

/// Scores are positive-class probabilities; label 1 is positive. A score at
/// or above the threshold predicts positive.
ConfusionCounts confusion_at(std::span<const double> scores, std::span<const int> labels, double threshold);
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);
/// Trapezoidal area under the ROC; throws MetricError unless both classes occur.
double roc_auc(std::span<const double> scores, std::span<const int> labels);
ClassificationReport classification_metrics(std::span<const double> scores, std::span<const int> labels,
                                            double threshold = 0.5);

}  // namespace songlm
