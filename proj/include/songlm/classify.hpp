#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "songlm/checkpoint.hpp"
#include "songlm/corpus.hpp"
#include "songlm/gpt.hpp"
#include "songlm/metrics.hpp"
#include "songlm/training.hpp"

namespace songlm {

enum class FinetuneScope { full, head_only };

std::string to_string(FinetuneScope scope);
FinetuneScope parse_scope(const std::string& name);

/// GPT backbone plus a linear H -> 2 head read from the final-layer state
/// at the song's last token (eos). Class 1 is the perturbed corpus.
class Classifier {
 public:
  /// Takes ownership of `backbone` as given; pass a clone to keep the original.
  Classifier(Gpt<float> backbone, std::uint64_t head_seed);

  /// [1, 2] logits. Songs longer than the context keep their last tokens.
  ag::Tensor<float> logits(const Song& song, const ForwardOptions& options, bool backbone_grad = true) const;
  double positive_probability(const Song& song) const;
  std::vector<double> scores(const Corpus& corpus) const;

  std::vector<NamedParameter<float>> parameters(FinetuneScope scope) const;
  std::vector<NamedParameter<float>> head_parameters() const;

  const Gpt<float>& backbone() const { return backbone_; }
  Gpt<float>& backbone() { return backbone_; }
  void set_attention_span(std::optional<std::size_t> span) { backbone_.set_attention_span(span); }

  Checkpoint to_checkpoint(const Vocab& vocab) const;
  static Classifier from_checkpoint(const Checkpoint& checkpoint);

 private:
  Gpt<float> backbone_;
  ag::Tensor<float> head_w_, head_b_;
};

struct ClassifierEpoch {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double eval_accuracy = 0.0;
};

struct ClassifierHistory {
  std::vector<ClassifierEpoch> epochs;
  std::size_t best_epoch = 0;
  double best_eval_accuracy = 0.0;
  bool stopped_early = false;
};

std::string history_csv(const ClassifierHistory& history);

/// Two-class cross-entropy on song labels with early stopping on eval
/// accuracy; the best-accuracy parameters are restored at the end.
ClassifierHistory finetune(Classifier& classifier, const LabeledCorpus& train_set, const LabeledCorpus& eval_set,
                           const TrainSpec& spec, FinetuneScope scope = FinetuneScope::full,
                           const std::function<void(const ClassifierEpoch&)>& on_epoch = {});

ClassificationReport evaluate_classifier(const Classifier& classifier, const LabeledCorpus& data);

/// Accuracy on the training split itself: the share of songs the
/// classifier can tell apart at all.
double upper_bound_accuracy(const Classifier& classifier, const LabeledCorpus& train_set);

/// Overwrites songs of class 1 with copies of class-0 songs so that a
/// `fraction` of all songs sit in identical, oppositely labelled pairs.
LabeledCorpus inject_cross_label_duplicates(const LabeledCorpus& data, double fraction, std::uint64_t seed);

struct SpanSweepRow {
  std::size_t span = 0;
  double accuracy = 0.0;
  double auc = 0.0;
  double upper_bound = 0.0;
  ClassifierHistory history;
  ClassificationReport report;
};

/// Builds the backbone for one span (already pretrained or fresh).
using BackboneFactory = std::function<Gpt<float>(std::size_t span)>;

/// For each span: backbone from the factory, restricted to that span,
/// fine-tuned and tested under it.
std::vector<SpanSweepRow> span_restricted_classification(const BackboneFactory& make_backbone,
                                                         const std::vector<std::size_t>& spans,
                                                         const LabeledCorpus& train_set, const LabeledCorpus& eval_set,
                                                         const LabeledCorpus& test_set, const TrainSpec& spec,
                                                         FinetuneScope scope = FinetuneScope::full);

std::string sweep_csv(const std::vector<SpanSweepRow>& rows);
std::string roc_csv(const std::vector<SpanSweepRow>& rows);

}  // namespace songlm
