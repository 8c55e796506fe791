#include "songlm/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "songlm/io.hpp"
#include "songlm/ops.hpp"
#include "songlm/optim.hpp"

namespace songlm {

std::string to_string(FinetuneScope scope) { return scope == FinetuneScope::full ? "full" : "head"; }

FinetuneScope parse_scope(const std::string& name) {
  if (name == "full") return FinetuneScope::full;
  if (name == "head" || name == "head-only" || name == "head_only") return FinetuneScope::head_only;
  throw std::invalid_argument("unknown fine-tune scope '" + name + "'");
}

Classifier::Classifier(Gpt<float> backbone, std::uint64_t head_seed) : backbone_(std::move(backbone)) {
  const std::size_t h = backbone_.config().hidden;
  Rng rng(head_seed);
  std::vector<float> w(h * 2);
  for (auto& x : w) x = static_cast<float>(rng.normal(0.0, 0.02));
  head_w_ = ag::Tensor<float>::from_data({h, 2}, std::move(w), true);
  head_b_ = ag::Tensor<float>::zeros({2}, true);
}

ag::Tensor<float> Classifier::logits(const Song& song, const ForwardOptions& options, bool backbone_grad) const {
  std::span<const TokenId> ids(song.ids);
  const std::size_t window = backbone_.config().context_len;
  if (ids.size() > window) ids = ids.last(window);
  ag::Tensor<float> pooled;
  if (backbone_grad) {
    auto out = backbone_.forward(ids, options);
    pooled = ag::slice(out.final_hidden, 0, ids.size() - 1, ids.size());
  } else {
    ag::Tensor<float> last;
    {
      ag::NoGradGuard guard;
      auto out = backbone_.forward(ids, options);
      last = ag::slice(out.final_hidden, 0, ids.size() - 1, ids.size());
    }
    pooled = last.detach();
  }
  return ag::add(ag::matmul(pooled, head_w_), head_b_);
}

double Classifier::positive_probability(const Song& song) const {
  ag::NoGradGuard guard;
  const auto z = logits(song, {});
  const double a = z.data()[0], b = z.data()[1];
  return 1.0 / (1.0 + std::exp(a - b));
}

std::vector<double> Classifier::scores(const Corpus& corpus) const {
  std::vector<double> out(corpus.songs.size());
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = positive_probability(corpus.songs[static_cast<std::size_t>(i)]);
  return out;
}

std::vector<NamedParameter<float>> Classifier::head_parameters() const {
  return {{"head.w", head_w_}, {"head.b", head_b_}};
}

std::vector<NamedParameter<float>> Classifier::parameters(FinetuneScope scope) const {
  auto out = head_parameters();
  if (scope == FinetuneScope::full) {
    auto bb = backbone_.parameters();
    out.insert(out.begin(), bb.begin(), bb.end());
  }
  return out;
}

Checkpoint Classifier::to_checkpoint(const Vocab& vocab) const {
  auto ck = make_checkpoint(backbone_, vocab);
  ck.arch = "gpt-classifier";
  for (const auto& p : head_parameters())
    ck.parameters.push_back({p.name, p.tensor.shape(), {p.tensor.data().begin(), p.tensor.data().end()}});
  return ck;
}

Classifier Classifier::from_checkpoint(const Checkpoint& checkpoint) {
  if (checkpoint.arch != "gpt-classifier" && checkpoint.arch != "gpt")
    throw std::runtime_error("checkpoint architecture '" + checkpoint.arch + "' cannot back a classifier");
  Gpt<float> gpt(GptConfig::from_json(checkpoint.config), 0);
  load_parameters(gpt, checkpoint);
  Classifier c(std::move(gpt), 0);
  if (checkpoint.arch == "gpt-classifier") {
    for (auto p : c.head_parameters()) {
      const auto* blob = checkpoint.find(p.name);
      if (!blob) throw std::runtime_error("checkpoint lacks parameter " + p.name);
      if (blob->shape != p.tensor.shape()) throw std::runtime_error("shape mismatch for " + p.name);
      auto dst = p.tensor.data();
      std::copy(blob->values.begin(), blob->values.end(), dst.begin());
    }
  }
  return c;
}

std::string history_csv(const ClassifierHistory& history) {
  CsvWriter csv({"epoch", "train_loss", "eval_accuracy"});
  for (const auto& e : history.epochs) {
    csv.field(e.epoch).field(e.train_loss).field(e.eval_accuracy);
    csv.end_row();
  }
  return csv.str();
}

namespace {

void check_labels(const LabeledCorpus& data, const char* what) {
  data.validate();
  std::size_t pos = 0;
  for (int l : data.labels) {
    if (l != 0 && l != 1) throw std::invalid_argument(std::string(what) + " labels must be 0 or 1");
    pos += static_cast<std::size_t>(l);
  }
  if (pos == 0 || pos == data.size())
    throw std::invalid_argument(std::string(what) + " split holds a single class");
}

double accuracy_of(const Classifier& c, const LabeledCorpus& data) {
  const auto s = c.scores(data.corpus);
  return confusion_at(s, data.labels, 0.5).accuracy();
}

std::vector<std::vector<float>> snap(const std::vector<NamedParameter<float>>& params) {
  std::vector<std::vector<float>> out;
  for (const auto& p : params) out.emplace_back(p.tensor.data().begin(), p.tensor.data().end());
  return out;
}

void put(const std::vector<NamedParameter<float>>& params, const std::vector<std::vector<float>>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto t = params[i].tensor;
    std::copy(values[i].begin(), values[i].end(), t.data().begin());
  }
}

}  // namespace

ClassifierHistory finetune(Classifier& classifier, const LabeledCorpus& train_set, const LabeledCorpus& eval_set,
                           const TrainSpec& spec, FinetuneScope scope,
                           const std::function<void(const ClassifierEpoch&)>& on_epoch) {
  spec.validate();
  check_labels(train_set, "training");
  eval_set.validate();
  if (eval_set.size() == 0) throw TrainingError("eval split is empty");

  const auto named = classifier.parameters(scope);
  std::vector<ag::Tensor<float>> params;
  for (const auto& p : named) params.push_back(p.tensor);
  Optimizer<float> optimizer(params, spec.optimizer_config());
  Rng rng(spec.seed);
  EarlyStopping stopper(spec.patience, true);
  auto best = snap(named);
  const bool backbone_grad = scope == FinetuneScope::full;

  ClassifierHistory history;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 1; epoch <= spec.max_epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += spec.batch_size) {
      const std::size_t end = std::min(order.size(), start + spec.batch_size);
      optimizer.zero_grad();
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const auto k = order[i];
        ForwardOptions fo;
        fo.train = true;
        fo.rng = &rng;
        const auto z = classifier.logits(train_set.corpus.songs[k], fo, backbone_grad);
        const TokenId target = train_set.labels[k];
        const auto loss = ag::cross_entropy_loss(z, std::span<const TokenId>(&target, 1), {},
                                                 static_cast<double>(end - start));
        loss.backward();
        batch_loss += loss.item();
      }
      if (!std::isfinite(batch_loss))
        throw TrainingError("fine-tuning diverged: non-finite loss in epoch " + std::to_string(epoch));
      if (spec.grad_clip > 0.0) clip_grad_norm(params, spec.grad_clip);
      optimizer.step();
      loss_sum += batch_loss * static_cast<double>(end - start);
    }
    ClassifierEpoch rec{epoch, loss_sum / static_cast<double>(order.size()), accuracy_of(classifier, eval_set)};
    history.epochs.push_back(rec);
    const bool stop = stopper.update(rec.eval_accuracy);
    if (stopper.improved()) best = snap(named);
    if (on_epoch) on_epoch(rec);
    if (stop) {
      history.stopped_early = true;
      break;
    }
  }
  put(named, best);
  history.best_epoch = stopper.best_epoch();
  history.best_eval_accuracy = stopper.best();
  return history;
}

ClassificationReport evaluate_classifier(const Classifier& classifier, const LabeledCorpus& data) {
  data.validate();
  const auto s = classifier.scores(data.corpus);
  return classification_metrics(s, data.labels, 0.5);
}

double upper_bound_accuracy(const Classifier& classifier, const LabeledCorpus& train_set) {
  train_set.validate();
  return accuracy_of(classifier, train_set);
}

LabeledCorpus inject_cross_label_duplicates(const LabeledCorpus& data, double fraction, std::uint64_t seed) {
  data.validate();
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("duplicate fraction must lie in [0, 1]");
  std::vector<std::size_t> neg, pos;
  for (std::size_t i = 0; i < data.size(); ++i) (data.labels[i] ? pos : neg).push_back(i);
  const auto pairs = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(data.size()) / 2.0));
  if (pairs > neg.size() || pairs > pos.size()) throw std::invalid_argument("too few songs per class to inject duplicates");
  Rng rng(seed);
  rng.shuffle(neg.begin(), neg.end());
  rng.shuffle(pos.begin(), pos.end());
  LabeledCorpus out = data;
  for (std::size_t i = 0; i < pairs; ++i) out.corpus.songs[pos[i]] = data.corpus.songs[neg[i]];
  return out;
}

std::vector<SpanSweepRow> span_restricted_classification(const BackboneFactory& make_backbone,
                                                         const std::vector<std::size_t>& spans,
                                                         const LabeledCorpus& train_set, const LabeledCorpus& eval_set,
                                                         const LabeledCorpus& test_set, const TrainSpec& spec,
                                                         FinetuneScope scope) {
  std::vector<SpanSweepRow> rows;
  for (auto span : spans) {
    if (span == 0) throw std::invalid_argument("attention span must be at least 1");
    Classifier clf(make_backbone(span), spec.seed ^ (0x5bd1e995ULL * (span + 1)));
    clf.set_attention_span(span);
    SpanSweepRow row;
    row.span = span;
    row.history = finetune(clf, train_set, eval_set, spec, scope);
    row.report = evaluate_classifier(clf, test_set);
    row.accuracy = row.report.accuracy;
    row.auc = row.report.auc;
    row.upper_bound = upper_bound_accuracy(clf, train_set);
    log_info("span " + std::to_string(span) + ": accuracy " + format_real(row.accuracy) + ", AUC " +
             format_real(row.auc));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_csv(const std::vector<SpanSweepRow>& rows) {
  CsvWriter csv({"span", "accuracy", "auc", "upper_bound", "tp", "fp", "tn", "fn", "epochs"});
  for (const auto& r : rows) {
    const auto& c = r.report.counts;
    csv.field(r.span).field(r.accuracy).field(r.auc).field(r.upper_bound);
    csv.field(static_cast<long long>(c.tp)).field(static_cast<long long>(c.fp));
    csv.field(static_cast<long long>(c.tn)).field(static_cast<long long>(c.fn)).field(r.history.epochs.size());
    csv.end_row();
  }
  return csv.str();
}

std::string roc_csv(const std::vector<SpanSweepRow>& rows) {
  CsvWriter csv({"span", "threshold", "fpr", "tpr"});
  for (const auto& r : rows)
    for (const auto& p : r.report.roc) {
      csv.field(r.span).field(p.threshold).field(p.fpr).field(p.tpr);
      csv.end_row();
    }
  return csv.str();
}

}  // namespace songlm
