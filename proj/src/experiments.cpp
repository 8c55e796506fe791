#include "songlm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "songlm/io.hpp"
#include "songlm/markov.hpp"

namespace songlm {

CompareRow score_row(const std::string& name, const NextTokenPredictor& predictor, const Corpus& test,
                     const PositionFilter& subset, std::size_t parameters) {
  CompareRow row;
  row.model = name;
  row.parameters = parameters;
  const auto all = evaluate_next_token(predictor, test);
  row.cross_entropy = all.cross_entropy;
  row.accuracy = all.accuracy;
  row.n_predictions = all.n_predictions;
  row.n_infinite = all.n_infinite;
  if (subset) {
    const auto sub = evaluate_next_token(predictor, test, subset);
    row.subset_cross_entropy = sub.cross_entropy;
    row.subset_accuracy = sub.accuracy;
    row.subset_predictions = sub.n_predictions;
  }
  return row;
}

std::vector<CompareRow> compare_models(const CorpusSplits& splits, const CompareSpec& spec) {
  std::vector<CompareRow> rows;
  const std::size_t v = splits.train.vocab.size();
  for (int k = 1; k <= spec.max_markov_order; ++k) {
    const auto m = MarkovModel::fit(splits.train, k, std::max(spec.max_markov_order, MarkovModel::kDefaultMaxOrder));
    std::size_t cells = 0;
    for (int j = 1; j <= k; ++j) cells += m.context_count(j) * v;
    rows.push_back(score_row("markov-" + std::to_string(k), MarkovPredictor(m), splits.test, spec.subset, cells));
    log_info("markov-" + std::to_string(k) + " done");
  }
  if (!spec.include_neural) return rows;

  for (auto cell : {CellKind::rnn, CellKind::lstm}) {
    RnnConfig cfg = cell == CellKind::rnn ? spec.rnn : spec.lstm;
    cfg.cell = cell;
    cfg.vocab_size = v;
    Rnn<float> model(cfg, spec.recurrent_train.seed);
    train(model, splits.train, splits.eval, spec.recurrent_train);
    rows.push_back(score_row(to_string(cell), NeuralPredictor(model), splits.test, spec.subset, model.parameter_count()));
    log_info(to_string(cell) + " done");
  }
  GptConfig g = spec.gpt;
  g.vocab_size = v;
  Gpt<float> gpt(g, spec.gpt_train.seed);
  train(gpt, splits.train, splits.eval, spec.gpt_train);
  rows.push_back(score_row("gpt", NeuralPredictor(gpt), splits.test, spec.subset, gpt.parameter_count()));
  return rows;
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  CsvWriter csv({"model", "cross_entropy", "accuracy", "n_predictions", "n_infinite", "parameters",
                 "subset_cross_entropy", "subset_accuracy", "subset_predictions"});
  for (const auto& r : rows) {
    csv.field(std::string_view(r.model)).field(r.cross_entropy).field(r.accuracy).field(r.n_predictions);
    csv.field(r.n_infinite).field(r.parameters).field(r.subset_cross_entropy).field(r.subset_accuracy);
    csv.field(r.subset_predictions);
    csv.end_row();
  }
  return csv.str();
}

std::vector<ScalingRow> data_scaling_run(const CorpusSplits& splits, const ScalingSpec& spec) {
  std::vector<std::size_t> order(splits.train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(spec.train.seed);
  rng.shuffle(order.begin(), order.end());

  std::vector<ScalingRow> rows;
  for (const auto& [name, base] : spec.models)
    for (double f : spec.fractions) {
      if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("data fraction must lie in (0, 1]");
      const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(f * static_cast<double>(order.size()))));
      const auto subset = splits.train.subset(std::span<const std::size_t>(order.data(), n));
      for (auto seed : spec.seeds) {
        GptConfig cfg = base;
        cfg.vocab_size = splits.train.vocab.size();
        Gpt<float> model(cfg, seed);
        TrainSpec ts = spec.train;
        ts.seed = seed;
        train(model, subset, splits.eval, ts);
        const auto score = evaluate_next_token(NeuralPredictor(model), splits.test);
        rows.push_back({name, f, n, format_corpus(subset).size(), seed, score.cross_entropy});
        log_info(name + " fraction " + format_real(f) + " seed " + std::to_string(seed) + ": " +
                 format_real(score.cross_entropy));
      }
    }
  return rows;
}

std::string scaling_csv(const std::vector<ScalingRow>& rows) {
  CsvWriter csv({"model", "fraction", "songs", "bytes", "seed", "eval_cross_entropy"});
  for (const auto& r : rows) {
    csv.field(std::string_view(r.model)).field(r.fraction).field(r.songs).field(r.bytes);
    csv.field(static_cast<long long>(r.seed)).field(r.eval_cross_entropy);
    csv.end_row();
  }
  return csv.str();
}

RnnConfig rnn_config_from_trial(CellKind cell, const std::vector<double>& values, std::size_t vocab_size) {
  RnnConfig c;
  c.cell = cell;
  c.n_layers = static_cast<std::size_t>(values.at(0));
  c.hidden = static_cast<std::size_t>(values.at(1));
  c.embed = static_cast<std::size_t>(values.at(2));
  c.dropout = values.at(3);
  c.vocab_size = vocab_size;
  c.validate();
  return c;
}

RecurrentSearch recurrent_hpo(CellKind cell, const CorpusSplits& splits, const TpeSpec& tpe, const TrainSpec& train_spec,
                              const TrialCallback& on_trial) {
  const auto space = SearchSpace::recurrent();
  const std::size_t v = splits.train.vocab.size();
  auto objective = [&](const std::vector<double>& x) {
    Rnn<float> model(rnn_config_from_trial(cell, x, v), train_spec.seed);
    return train(model, splits.train, splits.eval, train_spec).best_eval_loss;
  };
  RecurrentSearch out;
  out.result = tpe_search(space, objective, tpe, on_trial);
  out.best = rnn_config_from_trial(cell, out.result.best().values, v);
  return out;
}

}  // namespace songlm
