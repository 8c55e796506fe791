// songlm: command-line front end for corpora, models and analyses.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "songlm/analysis.hpp"
#include "songlm/checkpoint.hpp"
#include "songlm/classify.hpp"
#include "songlm/corpus.hpp"
#include "songlm/experiments.hpp"
#include "songlm/gpt.hpp"
#include "songlm/io.hpp"
#include "songlm/kernels.hpp"
#include "songlm/markov.hpp"
#include "songlm/metrics.hpp"
#include "songlm/rnn.hpp"
#include "songlm/synthlab.hpp"
#include "songlm/tpe.hpp"
#include "songlm/training.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace songlm;

namespace {

constexpr const char* kVersion = "0.1.0";

struct MissingInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// State of one artifact-producing run.
struct Run {
  std::vector<std::string> argv;
  std::string command;
  fs::path out = "songlm-out";
  std::uint64_t seed = 0;
  bool quiet = false;
  std::string config_file;
  std::vector<std::pair<std::string, std::string>> inputs;   // path, sha256
  std::vector<std::pair<std::string, std::string>> outputs;  // file, sha256
  std::function<void()> action;

  fs::path input(const std::string& path) {
    if (path.empty()) throw MissingInput("no input path given");
    if (!fs::exists(path)) throw MissingInput(path);
    for (const auto& [p, h] : inputs)
      if (p == path) return path;
    inputs.emplace_back(path, sha256_file(path));
    return path;
  }

  void write(const std::string& name, std::string_view text) {
    fs::create_directories(out);
    write_text(out / name, text);
    outputs.emplace_back(name, sha256_hex(text));
    log_info("wrote " + (out / name).string());
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }
};

// ---------------------------------------------------------------- small helpers

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  for (const auto& x : split_list(s)) out.push_back(std::stoul(x));
  return out;
}

char role_letter(Role r) {
  switch (r) {
    case Role::special: return 'S';
    case Role::filler: return 'F';
    case Role::cue: return 'C';
    case Role::echo: return 'E';
    case Role::ambiguous: return 'A';
  }
  return '?';
}

Role parse_role(const std::string& name) {
  for (Role r : {Role::special, Role::filler, Role::cue, Role::echo, Role::ambiguous})
    if (name == to_string(r)) return r;
  throw std::invalid_argument("unknown role '" + name + "'");
}

std::string roles_text(const SynthCorpus& s) {
  std::string out;
  for (const auto& r : s.roles) {
    for (Role x : r) out.push_back(role_letter(x));
    out.push_back('\n');
  }
  return out;
}

std::vector<std::string> load_roles(const fs::path& path, const Corpus& corpus) {
  std::vector<std::string> out;
  std::istringstream in(read_text(path));
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  if (out.size() != corpus.size()) throw std::invalid_argument("role file does not match the corpus song count");
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out[i].size() != corpus.songs[i].size())
      throw std::invalid_argument("role line " + std::to_string(i) + " does not match its song");
  return out;
}

PositionFilter role_filter(std::vector<std::string> roles, Role role) {
  const char c = role_letter(role);
  return [roles = std::move(roles), c](std::size_t song, std::size_t t) { return roles.at(song).at(t) == c; };
}

CsvWriter scores_csv(const NextTokenScores& s) {
  CsvWriter csv({"song", "n_predictions", "n_correct", "n_infinite", "cross_entropy", "accuracy"});
  for (const auto& p : s.per_song) {
    const double n = static_cast<double>(p.n_predictions);
    const double ce = p.n_infinite ? std::numeric_limits<double>::infinity() : (n > 0 ? p.nats_sum / n : 0.0);
    csv.field(p.song).field(p.n_predictions).field(p.n_correct).field(p.n_infinite).field(ce);
    csv.field(n > 0 ? static_cast<double>(p.n_correct) / n : 0.0);
    csv.end_row();
  }
  return csv;
}

std::string report_csv(const ClassificationReport& r) {
  CsvWriter csv({"accuracy", "auc", "tp", "fp", "tn", "fn", "tpr", "fpr"});
  csv.field(r.accuracy).field(r.auc);
  csv.field(static_cast<long long>(r.counts.tp)).field(static_cast<long long>(r.counts.fp));
  csv.field(static_cast<long long>(r.counts.tn)).field(static_cast<long long>(r.counts.fn));
  csv.field(r.counts.true_positive_rate()).field(r.counts.false_positive_rate());
  csv.end_row();
  return csv.str();
}

std::string roc_points_csv(const std::vector<RocPoint>& roc) {
  CsvWriter csv({"threshold", "fpr", "tpr"});
  for (const auto& p : roc) {
    csv.field(p.threshold).field(p.fpr).field(p.tpr);
    csv.end_row();
  }
  return csv.str();
}

SplitSpec fractions_spec(const std::string& fractions, std::uint64_t seed) {
  const auto f = split_list(fractions);
  if (f.size() != 3) throw std::invalid_argument("--fractions needs three comma-separated values");
  SplitSpec s{std::stod(f[0]), std::stod(f[1]), std::stod(f[2]), seed};
  s.validate();
  return s;
}

Gpt<float> load_gpt(Run& run, const std::string& path) {
  const auto ck = Checkpoint::load(run.input(path));
  if (ck.arch != "gpt") throw std::invalid_argument(path + " is a '" + ck.arch + "' checkpoint, not a GPT");
  Gpt<float> gpt(GptConfig::from_json(ck.config), 0);
  load_parameters(gpt, ck);
  return gpt;
}

Vocab checkpoint_vocab(const std::string& path) { return Checkpoint::load(path).vocab; }

// Labelled data: either a negative/positive corpus pair or a corpus plus a label sidecar.
struct LabelInputs {
  std::string negative, positive, corpus, labels;

  void add(CLI::App* app) {
    app->add_option("--negative", negative, "Class-0 corpus (before perturbation)");
    app->add_option("--positive", positive, "Class-1 corpus (after perturbation)");
    app->add_option("--corpus", corpus, "Corpus with a label sidecar");
    app->add_option("--labels", labels, "Label sidecar: line-index label");
  }

  LabeledCorpus load(Run& run, const std::optional<Vocab>& vocab) const {
    if (!corpus.empty()) {
      LabeledCorpus d;
      d.corpus = load_corpus(run.input(corpus), vocab);
      d.labels = load_labels(run.input(labels), d.corpus.size());
      return d;
    }
    if (negative.empty() || positive.empty())
      throw std::invalid_argument("give --negative and --positive, or --corpus and --labels");
    auto neg = load_corpus(run.input(negative), vocab);
    auto pos = load_corpus(run.input(positive), vocab ? vocab : std::optional<Vocab>(neg.vocab));
    return label_pair(neg, pos);
  }
};

struct LabeledSplits {
  LabeledCorpus train, eval, test;
};

LabeledSplits split_labeled(const LabeledCorpus& d, const SplitSpec& spec) {
  // Split each class separately so every split holds both.
  std::vector<std::size_t> cls[2];
  for (std::size_t i = 0; i < d.size(); ++i) cls[d.labels[i]].push_back(i);
  std::vector<std::size_t> tr, ev, te;
  for (auto& idx : cls) {
    if (idx.size() < 3) throw std::invalid_argument("each class needs at least three songs");
    const auto s = split_indices(idx.size(), spec);
    for (auto i : s.train) tr.push_back(idx[i]);
    for (auto i : s.eval) ev.push_back(idx[i]);
    for (auto i : s.test) te.push_back(idx[i]);
  }
  return {d.subset(tr), d.subset(ev), d.subset(te)};
}

// ---------------------------------------------------------------- shared option groups

struct TrainOptions {
  std::size_t batch = 32;
  double lr = 1e-3;
  std::size_t epochs = 100;
  std::size_t patience = 5;
  std::string optimizer;
  double weight_decay = 0.01;

  void add(CLI::App* app) {
    app->add_option("--batch", batch, "Songs per batch");
    app->add_option("--lr", lr, "Learning rate");
    app->add_option("--epochs", epochs, "Maximum epochs");
    app->add_option("--patience", patience, "Early-stopping patience");
    app->add_option("--optimizer", optimizer, "adam or adamw (default: adamw for GPT, adam otherwise)");
    app->add_option("--weight-decay", weight_decay, "AdamW weight decay");
  }

  TrainSpec spec(std::uint64_t seed, OptimizerKind fallback) const {
    TrainSpec s;
    s.batch_size = batch;
    s.lr = lr;
    s.max_epochs = epochs;
    s.patience = patience;
    s.seed = seed;
    s.optimizer = optimizer.empty() ? fallback : parse_optimizer(optimizer);
    s.weight_decay = weight_decay;
    s.validate();
    return s;
  }
};

struct ModelOptions {
  std::string preset = "medium";
  std::optional<std::size_t> layers, heads, hidden, context, embed, span;
  std::optional<double> dropout;

  void add(CLI::App* app) {
    app->add_option("--preset", preset, "GPT size: small, medium or large");
    app->add_option("--layers", layers, "Layers");
    app->add_option("--heads", heads, "Attention heads (GPT)");
    app->add_option("--hidden", hidden, "Hidden width");
    app->add_option("--context", context, "Context length (GPT)");
    app->add_option("--embed", embed, "Embedding width (RNN/LSTM)");
    app->add_option("--span", span, "Attention span (GPT); unlimited when absent");
    app->add_option("--dropout", dropout, "Dropout probability");
  }

  GptConfig gpt(std::size_t vocab) const {
    GptConfig c = preset == "small"  ? GptConfig::small(vocab)
                  : preset == "large" ? GptConfig::large(vocab)
                  : preset == "medium"
                      ? GptConfig::medium(vocab)
                      : throw std::invalid_argument("unknown preset '" + preset + "'");
    if (layers) c.n_layers = *layers;
    if (heads) c.n_heads = *heads;
    if (hidden) c.hidden = *hidden;
    if (context) c.context_len = *context;
    if (dropout) c.dropout = *dropout;
    c.attention_span = span;
    c.validate();
    return c;
  }

  RnnConfig rnn(CellKind cell, std::size_t vocab) const {
    RnnConfig c;
    c.cell = cell;
    c.vocab_size = vocab;
    if (layers) c.n_layers = *layers;
    if (hidden) c.hidden = *hidden;
    if (embed) c.embed = *embed;
    if (dropout) c.dropout = *dropout;
    c.validate();
    return c;
  }
};

// ---------------------------------------------------------------- subcommands

void add_common(CLI::App* app, Run& run) {
  app->add_option("--out", run.out, "Experiment directory");
  app->add_option("--seed", run.seed, "Seed for every random choice in the run");
  app->add_flag("--quiet", run.quiet, "Suppress progress messages");
  app->add_option("--config", run.config_file, "key=value file of option defaults");
}

CLI::App* leaf(CLI::App* parent, Run& run, const std::string& name, const std::string& help) {
  auto* app = parent->add_subcommand(name, help);
  add_common(app, run);
  return app;
}

void corpus_commands(CLI::App& root, Run& run) {
  auto* group = root.add_subcommand("corpus", "Corpus statistics and splits");
  group->require_subcommand(1);
  static std::string path, fractions = "0.8,0.1,0.1";
  static bool chars = false;

  auto* stats = leaf(group, run, "stats", "Song, token and length counts");
  stats->add_option("--corpus", path, "Corpus file")->required();
  stats->add_flag("--chars", chars, "One token per character");
  stats->callback([&run] {
    run.action = [&run] {
      auto c = load_corpus(run.input(path), std::nullopt, {chars});
      auto st = corpus_stats(c);
      run.write_json("stats.json", to_json(st, c.vocab));
      run.write_json("vocab.json", c.vocab.to_json());
      CsvWriter csv({"length", "songs"});
      for (const auto& [len, n] : st.length_histogram) {
        csv.field(len).field(n);
        csv.end_row();
      }
      run.write("lengths.csv", csv.str());
    };
  });

  auto* sp = leaf(group, run, "split", "Song-level train/eval/test split");
  sp->add_option("--corpus", path, "Corpus file")->required();
  sp->add_option("--fractions", fractions, "train,eval,test fractions");
  sp->add_flag("--chars", chars, "One token per character");
  sp->callback([&run] {
    run.action = [&run] {
      auto c = load_corpus(run.input(path), std::nullopt, {chars});
      auto s = split(c, fractions_spec(fractions, run.seed));
      run.write("train.txt", format_corpus(s.train));
      run.write("eval.txt", format_corpus(s.eval));
      run.write("test.txt", format_corpus(s.test));
      run.write_json("vocab.json", c.vocab.to_json());
    };
  });
}

void markov_commands(CLI::App& root, Run& run) {
  auto* group = root.add_subcommand("markov", "k-th order Markov models");
  group->require_subcommand(1);
  static std::string corpus, model;
  static int order = 6, max_order = MarkovModel::kDefaultMaxOrder;
  static std::size_t n = 100, max_len = 256;

  auto* fit = leaf(group, run, "fit", "Fit count tables of orders 1..k");
  fit->add_option("--corpus", corpus, "Training corpus")->required();
  fit->add_option("--order", order, "Markov order k");
  fit->add_option("--max-order", max_order, "Largest order accepted");
  fit->callback([&run] {
    run.action = [&run] {
      auto m = MarkovModel::fit(load_corpus(run.input(corpus)), order, max_order);
      run.write_json("markov.json", m.to_json());
    };
  });

  auto* ev = leaf(group, run, "eval", "Cross-entropy and accuracy on a corpus");
  ev->add_option("--model", model, "Fitted model JSON")->required();
  ev->add_option("--corpus", corpus, "Evaluation corpus")->required();
  ev->callback([&run] {
    run.action = [&run] {
      auto m = MarkovModel::load(run.input(model));
      auto c = load_corpus(run.input(corpus), m.vocab());
      auto s = evaluate_next_token(MarkovPredictor(m), c);
      run.write("per_song.csv", scores_csv(s).str());
      CsvWriter csv({"model", "cross_entropy", "accuracy", "n_predictions", "n_infinite"});
      csv.field("markov-" + std::to_string(m.order())).field(s.cross_entropy).field(s.accuracy);
      csv.field(s.n_predictions).field(s.n_infinite);
      csv.end_row();
      run.write("metrics.csv", csv.str());
    };
  });

  auto* gen = leaf(group, run, "generate", "Sample songs from a fitted model");
  gen->add_option("--model", model, "Fitted model JSON")->required();
  gen->add_option("--n", n, "Songs to sample");
  gen->add_option("--max-len", max_len, "Syllable limit per song");
  gen->callback([&run] {
    run.action = [&run] {
      auto m = MarkovModel::load(run.input(model));
      auto r = synth_corpus(m, n, run.seed, max_len);
      run.write("generated.txt", format_corpus(r.corpus));
    };
  });

  auto* syn = leaf(group, run, "synth", "Fit on a corpus and emit an exact-order synthetic corpus");
  syn->add_option("--corpus", corpus, "Seed corpus")->required();
  syn->add_option("--order", order, "Markov order k");
  syn->add_option("--max-order", max_order, "Largest order accepted");
  syn->add_option("--n", n, "Songs to emit");
  syn->add_option("--max-len", max_len, "Syllable limit per song");
  syn->callback([&run] {
    run.action = [&run] {
      auto m = MarkovModel::fit(load_corpus(run.input(corpus)), order, max_order);
      auto r = synth_corpus(m, n, run.seed, max_len);
      run.write("corpus.txt", format_corpus(r.corpus));
      run.write_json("generator.json", m.to_json());
      run.write_json("ground_truth.json", json{{"order", order},
                                          {"n_songs", n},
                                          {"truncated", r.truncated},
                                          {"entropy_rate_nats", generator_entropy_rate(m, r.corpus)},
                                          {"emission_counts", r.emission_counts}});
    };
  });
}

void synth_commands(CLI::App& root, Run& run) {
  auto* group = root.add_subcommand("synth", "Synthetic corpora with known structure");
  group->require_subcommand(1);
  static std::size_t n = 1000, max_len = 256, order = 6;
  static LongRangeGrammar g;
  static TwoContextGrammar tc;
  static double scramble = 0.0;
  static bool pair = false;

  auto* mk = leaf(group, run, "markov", "Songs from an exact order-k motif generator");
  mk->add_option("--order", order, "Generator order k");
  mk->add_option("--songs", n, "Songs to emit");
  mk->add_option("--max-len", max_len, "Syllable limit per song");
  mk->callback([&run] {
    run.action = [&run] {
      Rng master(run.seed);
      const auto gen_seed = master.fork_seed(), corpus_seed = master.fork_seed();
      auto m = motif_markov_generator(order, gen_seed);
      auto r = synth_corpus(m, n, corpus_seed, max_len);
      run.write("corpus.txt", format_corpus(r.corpus));
      run.write_json("generator.json", m.to_json());
      run.write_json("ground_truth.json", json{{"order", order},
                                          {"n_songs", n},
                                          {"truncated", r.truncated},
                                          {"entropy_rate_nats", generator_entropy_rate(m, r.corpus)},
                                          {"emission_counts", r.emission_counts}});
    };
  });

  auto* lr = leaf(group, run, "longrange", "Filler songs with cue/echo pairs a fixed distance apart");
  lr->add_option("--songs", n, "Songs to emit");
  lr->add_option("--distance", g.distance, "Cue-to-echo distance d");
  lr->add_option("--fillers", g.n_fillers, "Filler syllables");
  lr->add_option("--pairs", g.n_pairs, "Cue/echo pairs in the inventory");
  lr->add_option("--min-length", g.min_length, "Shortest song (syllables)");
  lr->add_option("--max-length", g.max_length, "Longest song (syllables)");
  lr->add_option("--pairs-per-song", g.pairs_per_song, "Cue/echo pairs placed per song");
  lr->add_option("--fidelity", g.echo_fidelity, "Probability an echo names its cue");
  lr->add_option("--scramble", scramble, "Probability an echo is redrawn uniformly");
  lr->add_flag("--pair", pair, "Emit an intact and a scrambled corpus with labels");
  lr->callback([&run] {
    run.action = [&run] {
      if (pair) {
        auto [a, b] = ablation_like_pair(g, scramble, n, run.seed);
        run.write("intact.txt", format_corpus(a.corpus));
        run.write("scrambled.txt", format_corpus(b.corpus));
        run.write("intact_roles.txt", roles_text(a));
        run.write("scrambled_roles.txt", roles_text(b));
        run.write_json("ground_truth.json", json{{"intact", a.ground_truth}, {"scrambled", b.ground_truth}});
        return;
      }
      auto s = gen_long_range(g, n, run.seed, scramble);
      run.write("corpus.txt", format_corpus(s.corpus));
      run.write("roles.txt", roles_text(s));
      run.write_json("ground_truth.json", s.ground_truth);
    };
  });

  auto* two = leaf(group, run, "twocontext", "Ambiguous syllable inside two motifs");
  two->add_option("--songs", n, "Songs to emit");
  two->add_option("--fillers", tc.n_fillers, "Filler syllables");
  two->add_option("--min-length", tc.min_length, "Shortest song (syllables)");
  two->add_option("--max-length", tc.max_length, "Longest song (syllables)");
  two->add_option("--motifs-per-song", tc.motifs_per_song, "Motifs placed per song");
  two->add_option("--first-context", tc.first_context, "Share of motifs that are a x b");
  two->callback([&run] {
    run.action = [&run] {
      auto s = gen_two_context(tc, n, run.seed);
      run.write("corpus.txt", format_corpus(s.corpus));
      run.write("roles.txt", roles_text(s));
      run.write_json("ground_truth.json", s.ground_truth);
    };
  });
}

struct CorpusInputs {
  std::string corpus, train, eval, fractions = "0.8,0.1,0.1";

  void add(CLI::App* app) {
    app->add_option("--corpus", corpus, "Corpus to split into train/eval/test");
    app->add_option("--train", train, "Training corpus (instead of --corpus)");
    app->add_option("--eval", eval, "Early-stopping corpus (with --train)");
    app->add_option("--fractions", fractions, "train,eval,test fractions for --corpus");
  }

  CorpusSplits load(Run& run, std::uint64_t split_seed) const {
    if (!corpus.empty()) return split(load_corpus(run.input(corpus)), fractions_spec(fractions, split_seed));
    if (train.empty() || eval.empty()) throw std::invalid_argument("give --corpus, or --train and --eval");
    CorpusSplits s;
    s.train = load_corpus(run.input(train));
    s.eval = load_corpus(run.input(eval), s.train.vocab);
    return s;
  }
};

void train_command(CLI::App& root, Run& run) {
  static CorpusInputs data;
  static ModelOptions model;
  static TrainOptions opt;
  static std::string arch = "gpt";
  auto* app = leaf(&root, run, "train", "Train a GPT, RNN or LSTM language model");
  data.add(app);
  model.add(app);
  opt.add(app);
  app->add_option("--arch", arch, "gpt, rnn or lstm");
  app->callback([&run] {
    run.action = [&run] {
      Rng master(run.seed);
      const auto split_seed = master.fork_seed(), init_seed = master.fork_seed(), train_seed = master.fork_seed();
      auto splits = data.load(run, split_seed);
      if (!data.corpus.empty()) {
        run.write("train.txt", format_corpus(splits.train));
        run.write("eval.txt", format_corpus(splits.eval));
        run.write("test.txt", format_corpus(splits.test));
      }
      const auto v = splits.train.vocab.size();
      std::unique_ptr<LanguageModel<float>> m;
      OptimizerKind fallback = OptimizerKind::adam;
      if (arch == "gpt") {
        m = std::make_unique<Gpt<float>>(model.gpt(v), init_seed);
        fallback = OptimizerKind::adamw;
      } else {
        m = std::make_unique<Rnn<float>>(model.rnn(parse_cell(arch), v), init_seed);
      }
      const auto spec = opt.spec(train_seed, fallback);
      auto hist = train(*m, splits.train, splits.eval, spec, [](const EpochRecord& e) {
        log_info("epoch " + std::to_string(e.epoch) + " train " + format_real(e.train_loss) + " eval " +
                 format_real(e.eval_loss));
      });
      auto ck = make_checkpoint(*m, splits.train.vocab);
      ck.extra = {{"train", spec.to_json()}, {"best_epoch", hist.best_epoch}, {"best_eval_loss", hist.best_eval_loss}};
      run.write("model.json", ck.to_json().dump() + "\n");
      run.write("history.csv", history_csv(hist));
    };
  });
}

void hpo_command(CLI::App& root, Run& run) {
  static CorpusInputs data;
  static TrainOptions opt;
  static std::string cell = "lstm";
  static TpeSpec tpe;
  auto* app = leaf(&root, run, "hpo", "TPE search over RNN/LSTM layers, widths and dropout");
  data.add(app);
  opt.add(app);
  app->add_option("--cell", cell, "rnn or lstm");
  app->add_option("--trials", tpe.n_trials, "Trials");
  app->add_option("--startup", tpe.n_startup, "Random trials before TPE proposals");
  app->add_option("--gamma", tpe.gamma, "Good-set quantile");
  app->add_option("--candidates", tpe.n_candidates, "Candidate draws per proposal");
  app->callback([&run] {
    run.action = [&run] {
      Rng master(run.seed);
      const auto split_seed = master.fork_seed();
      tpe.seed = master.fork_seed();
      auto splits = data.load(run, split_seed);
      const auto spec = opt.spec(master.fork_seed(), OptimizerKind::adam);
      auto r = recurrent_hpo(parse_cell(cell), splits, tpe, spec, [](const Trial& t) {
        log_info("trial " + std::to_string(t.index) + " loss " + format_real(t.loss));
      });
      run.write("trials.csv", trial_log_csv(r.result, SearchSpace::recurrent()));
      run.write_json("best.json", json{{"config", r.best.to_json()}, {"loss", r.result.best().loss}});
    };
  });
}

void eval_command(CLI::App& root, Run& run) {
  static std::string model, corpus, labels, metric = "all", roles, role = "echo";
  auto* app = leaf(&root, run, "eval", "Score a checkpoint on a corpus");
  app->add_option("--model", model, "Model or classifier checkpoint, or Markov JSON")->required();
  app->add_option("--corpus", corpus, "Corpus to score")->required();
  app->add_option("--labels", labels, "Label sidecar (classifier checkpoints)");
  app->add_option("--metric", metric, "xent, acc, auc or all");
  app->add_option("--roles", roles, "Role file from synth; adds a subset row");
  app->add_option("--role", role, "Role of the subset row");
  app->callback([&run] {
    run.action = [&run] {
      if (metric != "xent" && metric != "acc" && metric != "auc" && metric != "all")
        throw std::invalid_argument("unknown metric '" + metric + "'");
      const auto j = json::parse(read_text(run.input(model)));
      if (j.value("arch", "") == "gpt-classifier") {
        auto clf = Classifier::from_checkpoint(Checkpoint::from_json(j));
        LabeledCorpus d;
        d.corpus = load_corpus(run.input(corpus), Checkpoint::from_json(j).vocab);
        d.labels = load_labels(run.input(labels), d.corpus.size());
        const auto s = clf.scores(d.corpus);
        auto rep = classification_metrics(s, d.labels);
        CsvWriter sc({"song", "label", "score"});
        for (std::size_t i = 0; i < s.size(); ++i) {
          sc.field(i).field(d.labels[i]).field(s[i]);
          sc.end_row();
        }
        run.write("per_song.csv", sc.str());
        run.write("metrics.csv", report_csv(rep));
        run.write("roc.csv", roc_points_csv(rep.roc));
        return;
      }
      if (metric == "auc") throw std::invalid_argument("auc needs a classifier checkpoint");
      std::unique_ptr<NextTokenPredictor> pred;
      std::unique_ptr<LanguageModel<float>> lm;
      std::optional<MarkovModel> mk;
      Vocab vocab;
      std::string name;
      if (j.value("format", "") == "songlm-markov") {
        mk = MarkovModel::from_json(j);
        vocab = mk->vocab();
        pred = std::make_unique<MarkovPredictor>(*mk);
        name = "markov-" + std::to_string(mk->order());
      } else {
        auto ck = Checkpoint::from_json(j);
        lm = instantiate(ck);
        vocab = ck.vocab;
        pred = std::make_unique<NeuralPredictor>(*lm);
        name = ck.arch;
      }
      auto c = load_corpus(run.input(corpus), vocab);
      auto s = evaluate_next_token(*pred, c);
      run.write("per_song.csv", scores_csv(s).str());
      std::vector<std::string> header{"model", "subset", "n_predictions"};
      if (metric != "acc") header.push_back("cross_entropy");
      if (metric != "xent") header.push_back("accuracy");
      CsvWriter csv(header);
      auto row = [&](const std::string& subset, const NextTokenScores& r) {
        csv.field(name).field(subset).field(r.n_predictions);
        if (metric != "acc") csv.field(r.cross_entropy);
        if (metric != "xent") csv.field(r.accuracy);
        csv.end_row();
      };
      row("all", s);
      if (!roles.empty()) row(role, evaluate_next_token(*pred, c, role_filter(load_roles(run.input(roles), c), parse_role(role))));
      run.write("metrics.csv", csv.str());
    };
  });
}

void generate_command(CLI::App& root, Run& run) {
  static std::string model;
  static std::size_t n = 10, max_len = 256;
  static double temperature = 1.0;
  auto* app = leaf(&root, run, "generate", "Sample songs from a neural checkpoint");
  app->add_option("--model", model, "Model checkpoint")->required();
  app->add_option("--n", n, "Songs to sample");
  app->add_option("--max-len", max_len, "Token limit per song");
  app->add_option("--temperature", temperature, "Softmax temperature; 0 is greedy");
  app->callback([&run] {
    run.action = [&run] {
      auto ck = Checkpoint::load(run.input(model));
      auto m = instantiate(ck);
      Corpus out;
      out.vocab = ck.vocab;
      Rng master(run.seed);
      for (std::size_t i = 0; i < n; ++i) out.songs.push_back(sample(*m, master.fork_seed(), max_len, temperature).to_song());
      run.write("generated.txt", format_corpus(out));
    };
  });
}

void attn_commands(CLI::App& root, Run& run) {
  auto* group = root.add_subcommand("attn", "Attention statistics, maps and trees");
  group->require_subcommand(1);
  static std::string model, corpus;
  static std::size_t songs = 200, song = 0;
  static double threshold = 0.5;
  static std::optional<std::size_t> span;

  auto* sp = leaf(group, run, "span", "Mean attention span per layer");
  sp->add_option("--model", model, "GPT checkpoint")->required();
  sp->add_option("--corpus", corpus, "Songs to analyse")->required();
  sp->add_option("--songs", songs, "Number of songs");
  sp->add_option("--threshold", threshold, "Attention weight threshold");
  sp->add_option("--span", span, "Attention span applied during analysis");
  sp->callback([&run] {
    run.action = [&run] {
      auto m = load_gpt(run, model);
      if (span) m.set_attention_span(span);
      auto st = span_stats(m, load_corpus(run.input(corpus), checkpoint_vocab(model)), songs, threshold);
      run.write("span_summary.csv", span_summary_csv(st));
      run.write("span_pairs.csv", span_pairs_csv(st));
    };
  });

  auto* ex = leaf(group, run, "export", "Attention maps of one song");
  ex->add_option("--model", model, "GPT checkpoint")->required();
  ex->add_option("--corpus", corpus, "Corpus holding the song")->required();
  ex->add_option("--song", song, "Song line index");
  ex->callback([&run] {
    run.action = [&run] {
      auto m = load_gpt(run, model);
      auto c = load_corpus(run.input(corpus), checkpoint_vocab(model));
      if (song >= c.size()) throw std::out_of_range("song index beyond the corpus");
      auto rec = capture_attention(m, c.songs[song]);
      CsvWriter csv({"song", "layer", "head", "query", "key", "weight"});
      for (std::size_t l = 0; l < rec.layers(); ++l)
        for (std::size_t h = 0; h < rec.heads(); ++h) {
          const auto& a = rec.maps[l][h];
          for (std::size_t q = 0; q < a.rows; ++q)
            for (std::size_t k = 0; k <= q; ++k) {
              csv.field(song).field(l + 1).field(h + 1).field(q).field(k).field(a(q, k));
              csv.end_row();
            }
        }
      run.write("attention.csv", csv.str());
    };
  });

  auto* tr = leaf(group, run, "tree", "Maximum spanning arborescence per head");
  tr->add_option("--model", model, "GPT checkpoint")->required();
  tr->add_option("--corpus", corpus, "Corpus holding the song")->required();
  tr->add_option("--song", song, "Song line index");
  tr->callback([&run] {
    run.action = [&run] {
      auto m = load_gpt(run, model);
      auto c = load_corpus(run.input(corpus), checkpoint_vocab(model));
      if (song >= c.size()) throw std::out_of_range("song index beyond the corpus");
      auto trees = attention_trees(capture_attention(m, c.songs[song]));
      auto j = attention_trees_json(trees, c.songs[song], c.vocab);
      j["song"] = song;
      run.write_json("trees.json", j);
    };
  });
}

void embed_commands(CLI::App& root, Run& run) {
  auto* group = root.add_subcommand("embed", "Residual-stream trajectories and cosine distributions");
  group->require_subcommand(1);
  static std::string model, corpus, token;
  static std::size_t songs = 20, dims = 3;
  static std::optional<std::size_t> layer;

  auto load_traces = [](Run& r, const Gpt<float>& m, const Corpus& c) {
    std::vector<EmbeddingTrace> traces;
    for (std::size_t i = 0; i < std::min(songs, c.size()); ++i) traces.push_back(embedding_trace(m, c.songs[i], i));
    (void)r;
    return traces;
  };

  auto* tr = leaf(group, run, "trace", "PCA trajectories of token states through the layers");
  tr->add_option("--model", model, "GPT checkpoint")->required();
  tr->add_option("--corpus", corpus, "Songs to trace")->required();
  tr->add_option("--songs", songs, "Number of songs");
  tr->add_option("--dims", dims, "Principal components");
  tr->callback([&run, load_traces] {
    run.action = [&run, load_traces] {
      auto m = load_gpt(run, model);
      auto c = load_corpus(run.input(corpus), checkpoint_vocab(model));
      PcaResult fit;
      auto proj = pca_project(load_traces(run, m, c), dims, &fit);
      run.write("trajectories.csv", trajectories_csv(proj, c.vocab));
      run.write_json("pca.json", json{{"explained", fit.explained}, {"eigenvalues", fit.eigenvalues}});
    };
  });

  auto* cs = leaf(group, run, "cosine", "Cosine similarity of one syllable's states to their mean");
  cs->add_option("--model", model, "GPT checkpoint")->required();
  cs->add_option("--corpus", corpus, "Songs to trace")->required();
  cs->add_option("--token", token, "Syllable")->required();
  cs->add_option("--songs", songs, "Number of songs");
  cs->add_option("--layer", layer, "Layer (0 = embeddings); all layers when absent");
  cs->callback([&run, load_traces] {
    run.action = [&run, load_traces] {
      auto m = load_gpt(run, model);
      auto c = load_corpus(run.input(corpus), checkpoint_vocab(model));
      const auto id = c.vocab.find(token);
      if (!id) throw std::invalid_argument("syllable '" + token + "' is not in the vocabulary");
      auto traces = load_traces(run, m, c);
      CsvWriter values({"layer", "cosine"});
      CsvWriter summary({"layer", "n_occurrences", "n_excluded", "degenerate", "separation"});
      const std::size_t first = layer ? *layer : 0, last = layer ? *layer : m.config().n_layers;
      for (std::size_t l = first; l <= last; ++l) {
        auto d = cosine_similarity_distribution(traces, *id, l);
        for (double v : d.values) {
          values.field(l).field(v);
          values.end_row();
        }
        summary.field(l).field(d.n_occurrences).field(d.n_excluded).field(d.degenerate ? 1 : 0);
        summary.field(two_cluster_separation(d.values));
        summary.end_row();
      }
      run.write("cosine.csv", values.str());
      run.write("cosine_summary.csv", summary.str());
    };
  });
}

void classify_commands(CLI::App& root, Run& run) {
  auto* group = root.add_subcommand("classify", "Before/after song classification");
  group->require_subcommand(1);
  static LabelInputs data;
  static TrainOptions opt;
  static std::string model, scope = "full", fractions = "0.8,0.1,0.1", spans = "1,3,10,25,256";
  static std::optional<std::size_t> span;
  static double duplicates = 0.0;

  auto prepare = [](Run& r, const std::optional<Vocab>& vocab, std::uint64_t split_seed, std::uint64_t dup_seed) {
    auto d = data.load(r, vocab);
    auto s = split_labeled(d, fractions_spec(fractions, split_seed));
    if (duplicates > 0.0) s.train = inject_cross_label_duplicates(s.train, duplicates, dup_seed);
    return s;
  };

  auto* ft = leaf(group, run, "finetune", "Fine-tune a pretrained GPT as a two-class classifier");
  ft->add_option("--model", model, "Pretrained GPT checkpoint")->required();
  data.add(ft);
  opt.add(ft);
  ft->add_option("--scope", scope, "full or head");
  ft->add_option("--span", span, "Attention span during fine-tuning and testing");
  ft->add_option("--fractions", fractions, "train,eval,test fractions per class");
  ft->add_option("--duplicates", duplicates, "Fraction of training songs turned into cross-label duplicates");
  ft->callback([&run, prepare] {
    run.action = [&run, prepare] {
      Rng master(run.seed);
      const auto split_seed = master.fork_seed(), dup_seed = master.fork_seed(), head_seed = master.fork_seed();
      auto gpt = load_gpt(run, model);
      auto s = prepare(run, checkpoint_vocab(model), split_seed, dup_seed);
      Classifier clf(std::move(gpt), head_seed);
      if (span) clf.set_attention_span(span);
      auto hist = finetune(clf, s.train, s.eval, opt.spec(master.fork_seed(), OptimizerKind::adamw), parse_scope(scope));
      auto rep = evaluate_classifier(clf, s.test);
      const double ub = upper_bound_accuracy(clf, s.train);
      run.write("classifier.json", clf.to_checkpoint(s.train.corpus.vocab).to_json().dump() + "\n");
      run.write("history.csv", history_csv(hist));
      run.write("metrics.csv", report_csv(rep));
      run.write("roc.csv", roc_points_csv(rep.roc));
      run.write_json("report.json", json{{"test_accuracy", rep.accuracy}, {"test_auc", rep.auc}, {"upper_bound_accuracy", ub},
                                    {"best_epoch", hist.best_epoch}});
    };
  });

  auto* ev = leaf(group, run, "eval", "Score labelled songs with a fine-tuned classifier");
  ev->add_option("--model", model, "Classifier checkpoint")->required();
  data.add(ev);
  ev->add_option("--span", span, "Attention span");
  ev->callback([&run] {
    run.action = [&run] {
      auto ck = Checkpoint::load(run.input(model));
      auto clf = Classifier::from_checkpoint(ck);
      if (span) clf.set_attention_span(span);
      auto d = data.load(run, ck.vocab);
      const auto s = clf.scores(d.corpus);
      auto rep = classification_metrics(s, d.labels);
      CsvWriter sc({"song", "label", "score"});
      for (std::size_t i = 0; i < s.size(); ++i) {
        sc.field(i).field(d.labels[i]).field(s[i]);
        sc.end_row();
      }
      run.write("per_song.csv", sc.str());
      run.write("metrics.csv", report_csv(rep));
      run.write("roc.csv", roc_points_csv(rep.roc));
    };
  });

  auto* sw = leaf(group, run, "sweep", "Fine-tune and test under each attention span");
  sw->add_option("--model", model, "Pretrained GPT checkpoint")->required();
  data.add(sw);
  opt.add(sw);
  sw->add_option("--scope", scope, "full or head");
  sw->add_option("--spans", spans, "Comma-separated spans");
  sw->add_option("--fractions", fractions, "train,eval,test fractions per class");
  sw->callback([&run, prepare] {
    run.action = [&run, prepare] {
      Rng master(run.seed);
      const auto split_seed = master.fork_seed(), dup_seed = master.fork_seed();
      auto gpt = load_gpt(run, model);
      auto s = prepare(run, checkpoint_vocab(model), split_seed, dup_seed);
      auto rows = span_restricted_classification([&gpt](std::size_t) { return gpt.clone(); }, parse_sizes(spans),
                                                 s.train, s.eval, s.test,
                                                 opt.spec(master.fork_seed(), OptimizerKind::adamw), parse_scope(scope));
      run.write("sweep.csv", sweep_csv(rows));
      run.write("roc.csv", roc_csv(rows));
    };
  });
}

void compare_command(CLI::App& root, Run& run) {
  static std::string corpus, roles, role = "echo", fractions = "0.8,0.1,0.1";
  static int max_order = 6;
  static bool no_neural = false;
  static ModelOptions gpt;
  static std::size_t rnn_hidden = 32, rnn_layers = 1, rnn_embed = 32;
  static TrainOptions opt;
  auto* app = leaf(&root, run, "compare", "Markov-1..k, RNN, LSTM and GPT on one corpus");
  app->add_option("--corpus", corpus, "Corpus to split and score")->required();
  app->add_option("--fractions", fractions, "train,eval,test fractions");
  app->add_option("--max-order", max_order, "Highest Markov order");
  app->add_flag("--no-neural", no_neural, "Markov rows only");
  app->add_option("--roles", roles, "Role file from synth; adds subset columns");
  app->add_option("--role", role, "Role of the subset columns");
  gpt.add(app);
  app->add_option("--rnn-hidden", rnn_hidden, "RNN/LSTM hidden width");
  app->add_option("--rnn-layers", rnn_layers, "RNN/LSTM layers");
  app->add_option("--rnn-embed", rnn_embed, "RNN/LSTM embedding width");
  opt.add(app);
  app->callback([&run] {
    run.action = [&run] {
      Rng master(run.seed);
      const auto split_seed = master.fork_seed();
      auto c = load_corpus(run.input(corpus));
      auto idx = split_indices(c.size(), fractions_spec(fractions, split_seed));
      CorpusSplits splits{c.subset(idx.train), c.subset(idx.eval), c.subset(idx.test)};
      CompareSpec spec;
      spec.max_markov_order = max_order;
      spec.include_neural = !no_neural;
      const auto v = c.vocab.size();
      spec.gpt = gpt.gpt(v);
      for (auto* r : {&spec.rnn, &spec.lstm}) {
        r->n_layers = rnn_layers;
        r->hidden = rnn_hidden;
        r->embed = rnn_embed;
        r->vocab_size = v;
      }
      spec.rnn.cell = CellKind::rnn;
      spec.lstm.cell = CellKind::lstm;
      spec.gpt_train = opt.spec(master.fork_seed(), OptimizerKind::adamw);
      spec.recurrent_train = opt.spec(master.fork_seed(), OptimizerKind::adam);
      if (!roles.empty()) {
        auto all = load_roles(run.input(roles), c);
        std::vector<std::string> test_roles;
        for (auto i : idx.test) test_roles.push_back(all[i]);
        spec.subset = role_filter(std::move(test_roles), parse_role(role));
      }
      run.write("compare.csv", compare_csv(compare_models(splits, spec)));
    };
  });
}

void model_commands(CLI::App& root, Run& run) {
  auto* group = root.add_subcommand("model", "Checkpoint inspection");
  group->require_subcommand(1);
  static std::string model;
  auto* info = leaf(group, run, "info", "Architecture, configuration and parameter counts");
  info->add_option("--model", model, "Checkpoint")->required();
  info->callback([&run] {
    run.action = [&run] {
      auto d = describe(Checkpoint::load(run.input(model)));
      std::cout << d.dump(2) << "\n";
      run.write_json("info.json", d);
    };
  });
}

// ---------------------------------------------------------------- config, manifest, dispatch

std::map<std::string, std::string> read_config(const fs::path& path) {
  if (!fs::exists(path)) throw MissingInput(path.string());
  std::map<std::string, std::string> out;
  std::istringstream in(read_text(path));
  std::string line;
  std::size_t n = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r"), e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++n;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(path.string() + ":" + std::to_string(n) + ": expected key = value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

bool has_flag(const std::vector<std::string>& args, const std::string& key) {
  const std::string f = "--" + key;
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == f || a.rfind(f + "=", 0) == 0; });
}

// Expands --config into explicit flags; options already on the command line win.
std::vector<std::string> apply_config(std::vector<std::string> args) {
  std::string file;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) file = args[++i];
    else if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9);
    else rest.push_back(args[i]);
  }
  if (file.empty()) return rest;
  for (const auto& [k, v] : read_config(file))
    if (!has_flag(rest, k)) rest.push_back("--" + k + "=" + v);
  return rest;
}

json resolved_options(const CLI::App* app) {
  json j = json::object();
  for (const auto* opt : app->get_options()) {
    const auto name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    if (opt->count() > 0) {
      std::string v;
      for (const auto& r : opt->results()) v += (v.empty() ? "" : ",") + r;
      j[name] = v;
    } else {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

int run_args(std::vector<std::string> args);

void rerun_command(CLI::App& root, int& status) {
  static std::string manifest, out;
  static bool quiet = false;
  auto* app = root.add_subcommand("rerun", "Repeat a run from its manifest and compare artifact hashes");
  app->add_flag("--quiet", quiet, "Suppress progress messages");
  app->add_option("--manifest", manifest, "manifest.json of the original run")->required();
  app->add_option("--out", out, "Directory for the repeat (default: <original>-rerun)");
  app->callback([&status] {
    if (!fs::exists(manifest)) throw MissingInput(manifest);
    const auto m = json::parse(read_text(manifest));
    for (const auto& in : m.at("inputs")) {
      const auto path = in.at("path").get<std::string>();
      if (!fs::exists(path)) throw MissingInput(path);
      if (sha256_file(path) != in.at("sha256").get<std::string>())
        throw std::runtime_error("input " + path + " changed since the original run");
    }
    auto args = m.at("argv").get<std::vector<std::string>>();
    if (quiet && !has_flag(args, "quiet")) args.push_back("--quiet");
    const auto target = out.empty() ? m.at("out").get<std::string>() + "-rerun" : out;
    for (std::size_t i = 0; i < args.size(); ++i)
      if (args[i].rfind("--out=", 0) == 0) args[i] = "--out=" + target;
    status = run_args(args);
    if (status != 0) return;
    const auto again = json::parse(read_text(fs::path(target) / "manifest.json"));
    std::size_t differ = 0;
    for (std::size_t i = 0; i < m.at("outputs").size(); ++i) {
      const auto& a = m["outputs"][i];
      const bool same = i < again["outputs"].size() && again["outputs"][i] == a;
      if (!same) {
        ++differ;
        std::cerr << "differs: " << a.at("file").get<std::string>() << "\n";
      }
    }
    std::cout << (differ == 0 ? "identical" : "different") << " artifacts (" << m.at("outputs").size() << " files)\n";
    status = differ == 0 ? 0 : 3;
  });
}

int run_args(std::vector<std::string> args) {
  Run run;
  int rerun_status = 0;
  CLI::App app("songlm: sequence models and attention analyses for birdsong-like corpora", "songlm");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  corpus_commands(app, run);
  markov_commands(app, run);
  synth_commands(app, run);
  train_command(app, run);
  hpo_command(app, run);
  eval_command(app, run);
  generate_command(app, run);
  attn_commands(app, run);
  embed_commands(app, run);
  classify_commands(app, run);
  compare_command(app, run);
  model_commands(app, run);
  rerun_command(app, rerun_status);

  try {
    args = apply_config(std::move(args));
  } catch (const MissingInput& e) {
    std::cerr << "error: missing input: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    const CLI::App* sub = &app;
    while (!sub->get_subcommands().empty()) sub = sub->get_subcommands().front();
    std::cerr << sub->help();
    return 2;
  } catch (const MissingInput& e) {
    std::cerr << "error: missing input: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  if (!run.action) return rerun_status;

  const CLI::App* sub = &app;
  std::vector<std::string> path;
  while (!sub->get_subcommands().empty()) {
    sub = sub->get_subcommands().front();
    path.push_back(sub->get_name());
  }
  for (const auto& p : path) run.command += (run.command.empty() ? "" : " ") + p;
  set_quiet(run.quiet);

  try {
    run.action();
  } catch (const MissingInput& e) {
    std::cerr << "error: missing input: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  // Canonical argv: resolved options only, so a rerun does not depend on the config file.
  std::vector<std::string> canonical = path;
  const auto resolved = resolved_options(sub);
  for (const auto& [k, v] : resolved.items()) {
    const auto s = v.get<std::string>();
    if (k == "out") continue;
    const auto* opt = sub->get_option("--" + k);
    if (opt->count() == 0 && (s.empty() || opt->get_type_size() == 0)) continue;
    canonical.push_back("--" + k + "=" + s);
  }
  canonical.push_back("--out=" + run.out.string());

  json inputs = json::array(), outputs = json::array();
  for (const auto& [p, h] : run.inputs) inputs.push_back({{"path", p}, {"sha256", h}});
  for (const auto& [f, h] : run.outputs) outputs.push_back({{"file", f}, {"sha256", h}});
  json manifest{{"tool", "songlm"},
                {"version", kVersion},
                {"command", run.command},
                {"seed", run.seed},
                {"out", run.out.string()},
                {"argv", canonical},
                {"config", resolved},
                {"threads", kernels::max_threads()},
                {"inputs", inputs},
                {"outputs", outputs}};
  fs::create_directories(run.out);
  write_text(run.out / "manifest.json", manifest.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_args(std::move(args));
}
