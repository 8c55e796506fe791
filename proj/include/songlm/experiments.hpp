#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "songlm/corpus.hpp"
#include "songlm/gpt.hpp"
#include "songlm/metrics.hpp"
#include "songlm/rnn.hpp"
#include "songlm/tpe.hpp"
#include "songlm/training.hpp"

namespace songlm {

struct CompareSpec {
  int max_markov_order = 6;
  RnnConfig rnn;   // cell forced to rnn
  RnnConfig lstm;  // cell forced to lstm
  GptConfig gpt;
  TrainSpec recurrent_train;  // Adam
  TrainSpec gpt_train;        // AdamW
  bool include_neural = true;
  /// Extra restriction applied on top of the standard prediction mask,
  /// e.g. echo positions only; reported in the *_subset columns.
  PositionFilter subset;
};

struct CompareRow {
  std::string model;
  double cross_entropy = 0.0;
  double accuracy = 0.0;
  std::size_t n_predictions = 0;
  std::size_t n_infinite = 0;
  std::size_t parameters = 0;
  double subset_cross_entropy = 0.0;
  double subset_accuracy = 0.0;
  std::size_t subset_predictions = 0;
};

/// Markov-1..k, RNN, LSTM and GPT fitted on `train`, early-stopped on
/// `eval`, scored on `test` under the standard prediction mask.
std::vector<CompareRow> compare_models(const CorpusSplits& splits, const CompareSpec& spec);
std::string compare_csv(const std::vector<CompareRow>& rows);

CompareRow score_row(const std::string& name, const NextTokenPredictor& predictor, const Corpus& test,
                     const PositionFilter& subset, std::size_t parameters);

struct ScalingRow {
  std::string model;
  double fraction = 0.0;
  std::size_t songs = 0;
  std::size_t bytes = 0;  // size of the training text
  std::uint64_t seed = 0;
  double eval_cross_entropy = 0.0;
};

struct ScalingSpec {
  std::vector<std::pair<std::string, GptConfig>> models;
  std::vector<double> fractions{0.125, 0.25, 0.5, 1.0};
  std::vector<std::uint64_t> seeds{0};
  TrainSpec train;
};

/// Trains every (model, fraction, seed) on a prefix of a fixed shuffle of
/// the training split and scores it on the test split.
std::vector<ScalingRow> data_scaling_run(const CorpusSplits& splits, const ScalingSpec& spec);
std::string scaling_csv(const std::vector<ScalingRow>& rows);

struct RecurrentSearch {
  TpeResult result;
  RnnConfig best;
};

/// TPE over layers, hidden, embedding size and dropout; each trial trains
/// with early stopping and reports its best eval loss.
RecurrentSearch recurrent_hpo(CellKind cell, const CorpusSplits& splits, const TpeSpec& tpe, const TrainSpec& train,
                              const TrialCallback& on_trial = {});
RnnConfig rnn_config_from_trial(CellKind cell, const std::vector<double>& values, std::size_t vocab_size);

}  // namespace songlm
