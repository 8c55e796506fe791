#include "songlm/training.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "songlm/io.hpp"
#include "songlm/ops.hpp"

namespace songlm {

void TrainSpec::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch size must be at least 1");
  if (patience < 1) throw std::invalid_argument("patience must be at least 1");
  if (max_epochs < 1) throw std::invalid_argument("max epochs must be at least 1");
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
}

OptimizerConfig TrainSpec::optimizer_config() const {
  return optimizer == OptimizerKind::adam ? OptimizerConfig::adam(lr) : OptimizerConfig::adamw(lr, weight_decay);
}

nlohmann::json TrainSpec::to_json() const {
  return {{"batch_size", batch_size}, {"lr", lr},
          {"max_epochs", max_epochs}, {"patience", patience},
          {"seed", seed},             {"optimizer", to_string(optimizer)},
          {"weight_decay", weight_decay}, {"grad_clip", grad_clip}};
}

EarlyStopping::EarlyStopping(std::size_t patience, bool maximize)
    : patience_(patience),
      maximize_(maximize),
      best_(maximize ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity()) {
  if (patience_ < 1) throw std::invalid_argument("patience must be at least 1");
}

bool EarlyStopping::update(double metric) {
  ++epochs_;
  improved_ = maximize_ ? metric > best_ : metric < best_;
  if (improved_) {
    best_ = metric;
    best_epoch_ = epochs_;
    stale_ = 0;
  } else {
    ++stale_;
  }
  return stale_ >= patience_;
}

std::vector<std::vector<TokenId>> training_sequences(const Corpus& corpus, std::size_t window, std::size_t* truncated) {
  std::vector<std::vector<TokenId>> out;
  out.reserve(corpus.songs.size());
  std::size_t cut = 0;
  for (const auto& s : corpus.songs) {
    if (window && s.ids.size() > window) {
      out.emplace_back(s.ids.end() - static_cast<std::ptrdiff_t>(window), s.ids.end());
      ++cut;
    } else {
      out.push_back(s.ids);
    }
  }
  if (truncated) *truncated = cut;
  return out;
}

namespace {

double sequences_loss(const LanguageModel<float>& model, const std::vector<std::vector<TokenId>>& seqs) {
  std::vector<double> sums(seqs.size(), 0.0);
  std::vector<std::size_t> counts(seqs.size(), 0);
  const auto n = static_cast<std::ptrdiff_t>(seqs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& ids = seqs[static_cast<std::size_t>(i)];
    if (ids.size() < 2) continue;
    ag::NoGradGuard no_grad;
    const std::span<const TokenId> all(ids);
    const auto logits = model.logits(all.first(ids.size() - 1), {});
    const auto loss = ag::cross_entropy_loss(logits, all.subspan(1), {}, 1.0);
    sums[static_cast<std::size_t>(i)] = loss.item();
    counts[static_cast<std::size_t>(i)] = ids.size() - 1;
  }
  const double total = std::accumulate(sums.begin(), sums.end(), 0.0);
  const auto count = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  return count ? total / static_cast<double>(count) : 0.0;
}

}  // namespace

double mean_loss(const LanguageModel<float>& model, const Corpus& corpus) {
  // Evaluation needs input length n-1 <= window, so keep window+1 tokens.
  const std::size_t window = model.max_input_length();
  return sequences_loss(model, training_sequences(corpus, window ? window + 1 : 0));
}

TrainHistory train(const LanguageModel<float>& model, const Corpus& train_set, const Corpus& eval_set,
                   const TrainSpec& spec, const EpochCallback& on_epoch) {
  spec.validate();
  if (train_set.empty() || eval_set.empty()) throw TrainingError("train and eval splits must be nonempty");

  TrainHistory history;
  const std::size_t window = model.max_input_length();
  const auto train_seqs = training_sequences(train_set, window, &history.truncated_songs);
  const auto eval_seqs = training_sequences(eval_set, window ? window + 1 : 0);
  if (history.truncated_songs > 0)
    log_warning(std::to_string(history.truncated_songs) + " training songs truncated to the last " +
                std::to_string(window) + " tokens");

  const auto params = model.parameter_tensors();
  Optimizer<float> optimizer(params, spec.optimizer_config());
  Rng rng(spec.seed);
  EarlyStopping stopper(spec.patience);
  auto best = snapshot(model);

  std::vector<std::size_t> order(train_seqs.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 1; epoch <= spec.max_epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double epoch_sum = 0.0;
    std::size_t epoch_tokens = 0;
    for (std::size_t start = 0; start < order.size(); start += spec.batch_size) {
      const std::size_t end = std::min(order.size(), start + spec.batch_size);
      std::size_t batch_tokens = 0;
      for (std::size_t i = start; i < end; ++i) batch_tokens += train_seqs[order[i]].size() - 1;
      if (batch_tokens == 0) continue;
      optimizer.zero_grad();
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const auto& ids = train_seqs[order[i]];
        if (ids.size() < 2) continue;
        const std::span<const TokenId> all(ids);
        ForwardOptions fo;
        fo.train = true;
        fo.rng = &rng;
        const auto logits = model.logits(all.first(ids.size() - 1), fo);
        const auto loss = ag::cross_entropy_loss(logits, all.subspan(1), {}, static_cast<double>(batch_tokens));
        loss.backward();
        batch_loss += loss.item();
      }
      if (!std::isfinite(batch_loss))
        throw TrainingError("training diverged: non-finite loss in epoch " + std::to_string(epoch));
      if (spec.grad_clip > 0.0) clip_grad_norm(params, spec.grad_clip);
      optimizer.step();
      epoch_sum += batch_loss * static_cast<double>(batch_tokens);
      epoch_tokens += batch_tokens;
    }
    EpochRecord rec{epoch, epoch_tokens ? epoch_sum / static_cast<double>(epoch_tokens) : 0.0,
                    sequences_loss(model, eval_seqs)};
    if (!std::isfinite(rec.eval_loss))
      throw TrainingError("training diverged: non-finite eval loss in epoch " + std::to_string(epoch));
    history.epochs.push_back(rec);
    const bool stop = stopper.update(rec.eval_loss);
    if (stopper.improved()) best = snapshot(model);
    if (on_epoch) on_epoch(rec);
    if (stop) {
      history.stopped_early = true;
      break;
    }
  }
  restore(model, best);
  history.best_epoch = stopper.best_epoch();
  history.best_eval_loss = stopper.best();
  return history;
}

std::string history_csv(const TrainHistory& history) {
  std::ostringstream os;
  os << "epoch,train_loss,eval_loss\n";
  for (const auto& e : history.epochs)
    os << e.epoch << ',' << format_real(e.train_loss) << ',' << format_real(e.eval_loss) << '\n';
  return os.str();
}

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path) {
  write_text(path, history_csv(history));
}

}  // namespace songlm
