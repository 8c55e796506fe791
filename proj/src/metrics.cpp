#include "songlm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "songlm/ops.hpp"

namespace songlm {

Matrix MarkovPredictor::predict(const Song& song) const {
  const std::size_t n = song.ids.size();
  Matrix out(n > 0 ? n - 1 : 0, model_.vocab_size());
  for (std::size_t t = 1; t < n; ++t) {
    const auto p = model_.predict(std::span<const TokenId>(song.ids.data(), t));
    std::copy(p.begin(), p.end(), out.row(t - 1).begin());
  }
  return out;
}

Matrix NeuralPredictor::predict(const Song& song) const {
  const std::size_t n = song.ids.size();
  if (n < 2) return Matrix(0, model_.vocab_size());
  const std::size_t limit = model_.max_input_length();
  if (limit && n - 1 > limit)
    throw MetricError("song of " + std::to_string(n) + " tokens exceeds the model context of " + std::to_string(limit));
  ag::NoGradGuard no_grad;
  const auto logits = model_.logits(std::span<const TokenId>(song.ids.data(), n - 1), {});
  const std::size_t v = model_.vocab_size();
  Matrix out(n - 1, v);
  const auto src = logits.data();
  for (std::size_t r = 0; r < n - 1; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < v; ++j) mx = std::max(mx, static_cast<double>(src[r * v + j]));
    double s = 0.0;
    for (std::size_t j = 0; j < v; ++j) s += out(r, j) = std::exp(static_cast<double>(src[r * v + j]) - mx);
    for (std::size_t j = 0; j < v; ++j) out(r, j) /= s;
  }
  return out;
}

UniformPredictor::UniformPredictor(std::size_t vocab_size, std::vector<TokenId> support)
    : vocab_size_(vocab_size), support_(std::move(support)) {
  if (support_.empty()) throw MetricError("uniform predictor needs a nonempty support");
  for (auto id : support_)
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_size_) throw MetricError("support id out of range");
}

Matrix UniformPredictor::predict(const Song& song) const {
  const std::size_t n = song.ids.size();
  Matrix out(n > 0 ? n - 1 : 0, vocab_size_);
  const double u = 1.0 / static_cast<double>(support_.size());
  for (std::size_t r = 0; r < out.rows; ++r)
    for (auto id : support_) out(r, static_cast<std::size_t>(id)) = u;
  return out;
}

std::vector<std::uint8_t> prediction_mask(const Song& song) {
  const std::size_t n = song.ids.size();
  if (n < 2) return {};
  std::vector<std::uint8_t> mask(n - 1, 1);
  // Row r predicts target index r+1.
  mask[0] = 0;             // first syllable
  mask[n - 2] = 0;         // eos
  return mask;
}

NextTokenScores evaluate_next_token(const NextTokenPredictor& predictor, const Corpus& corpus,
                                    const PositionFilter& filter) {
  const std::size_t n_songs = corpus.songs.size();
  std::vector<SongScore> per_song(n_songs);
  const auto n = static_cast<std::ptrdiff_t>(n_songs);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t si = 0; si < n; ++si) {
    const auto s = static_cast<std::size_t>(si);
    const Song& song = corpus.songs[s];
    SongScore score;
    score.song = s;
    const auto mask = prediction_mask(song);
    if (mask.empty()) {
      per_song[s] = score;
      continue;
    }
    const Matrix q = predictor.predict(song);
    for (std::size_t r = 0; r < mask.size(); ++r) {
      if (!mask[r]) continue;
      const std::size_t target_index = r + 1;
      if (filter && !filter(s, target_index)) continue;
      const auto target = static_cast<std::size_t>(song.ids[target_index]);
      const auto row = q.row(r);
      ++score.n_predictions;
      const double pt = row[target];
      if (pt > 0.0) score.nats_sum += -std::log(pt);
      else ++score.n_infinite;
      std::size_t best = 0;
      for (std::size_t j = 1; j < row.size(); ++j)
        if (row[j] > row[best]) best = j;
      if (best == target) ++score.n_correct;
    }
    per_song[s] = score;
  }

  NextTokenScores out;
  double nats = 0.0;
  for (const auto& s : per_song) {
    out.n_predictions += s.n_predictions;
    out.n_correct += s.n_correct;
    out.n_infinite += s.n_infinite;
    nats += s.nats_sum;
  }
  if (out.n_predictions > 0) {
    out.cross_entropy = out.n_infinite > 0 ? std::numeric_limits<double>::infinity()
                                           : nats / static_cast<double>(out.n_predictions);
    out.accuracy = static_cast<double>(out.n_correct) / static_cast<double>(out.n_predictions);
  }
  out.per_song = std::move(per_song);
  return out;
}

CrossEntropyResult next_token_cross_entropy(const NextTokenPredictor& predictor, const Corpus& corpus) {
  const auto s = evaluate_next_token(predictor, corpus);
  return {s.cross_entropy, s.n_predictions, s.n_infinite};
}

double next_token_accuracy(const NextTokenPredictor& predictor, const Corpus& corpus) {
  return evaluate_next_token(predictor, corpus).accuracy;
}

// ---------------------------------------------------------------- classification

double ConfusionCounts::accuracy() const {
  if (total() == 0) throw MetricError("accuracy of an empty confusion matrix");
  return static_cast<double>(tp + tn) / static_cast<double>(total());
}

double ConfusionCounts::true_positive_rate() const {
  if (tp + fn == 0) throw MetricError("TPR undefined without positives");
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double ConfusionCounts::false_positive_rate() const {
  if (fp + tn == 0) throw MetricError("FPR undefined without negatives");
  return static_cast<double>(fp) / static_cast<double>(fp + tn);
}

namespace {
void check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw MetricError("scores and labels differ in length");
  for (int l : labels)
    if (l != 0 && l != 1) throw MetricError("labels must be 0 or 1");
}
}  // namespace

ConfusionCounts confusion_at(std::span<const double> scores, std::span<const int> labels, double threshold) {
  check_inputs(scores, labels);
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    if (labels[i] == 1) (pred ? c.tp : c.fn)++;
    else (pred ? c.fp : c.tn)++;
  }
  return c;
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw MetricError("ROC/AUC undefined: labels contain a single class");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  std::vector<RocPoint> roc{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] == 1 ? tp : fp)++;
      ++i;
    }
    roc.push_back({s, static_cast<double>(fp) / static_cast<double>(neg), static_cast<double>(tp) / static_cast<double>(pos)});
  }
  return roc;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  const auto roc = roc_curve(scores, labels);
  double area = 0.0;
  for (std::size_t i = 1; i < roc.size(); ++i)
    area += (roc[i].fpr - roc[i - 1].fpr) * (roc[i].tpr + roc[i - 1].tpr) * 0.5;
  return area;
}

ClassificationReport classification_metrics(std::span<const double> scores, std::span<const int> labels,
                                            double threshold) {
  ClassificationReport r;
  r.counts = confusion_at(scores, labels, threshold);
  if (r.counts.total() == 0) throw MetricError("no scores to evaluate");
  r.accuracy = r.counts.accuracy();
  r.roc = roc_curve(scores, labels);
  for (std::size_t i = 1; i < r.roc.size(); ++i)
    r.auc += (r.roc[i].fpr - r.roc[i - 1].fpr) * (r.roc[i].tpr + r.roc[i - 1].tpr) * 0.5;
  return r;
}

}  // namespace songlm
