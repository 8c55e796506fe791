#include "songlm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "songlm/io.hpp"

namespace songlm {

std::vector<SpanStat> span_stats(const std::vector<AttentionRecord>& records, double threshold) {
  std::vector<SpanStat> out;
  if (records.empty()) return out;
  const std::size_t layers = records.front().layers();
  const std::size_t heads = records.front().heads();
  out.resize(layers);
  std::vector<std::vector<double>> head_sum(layers, std::vector<double>(heads, 0.0));
  std::vector<std::vector<std::size_t>> head_n(layers, std::vector<std::size_t>(heads, 0));

  for (std::size_t s = 0; s < records.size(); ++s) {
    const auto& rec = records[s];
    if (rec.layers() != layers || rec.heads() != heads) throw std::invalid_argument("attention records disagree in shape");
    for (std::size_t l = 0; l < layers; ++l)
      for (std::size_t h = 0; h < heads; ++h) {
        const auto& m = rec.maps[l][h];
        for (std::size_t q = 0; q < m.rows; ++q)
          for (std::size_t k = 0; k <= q && k < m.cols; ++k)
            if (m(q, k) > threshold) {
              out[l].pairs.push_back({s, l, h, q, k, m(q, k)});
              head_sum[l][h] += static_cast<double>(q - k);
              ++head_n[l][h];
            }
      }
  }
  for (std::size_t l = 0; l < layers; ++l) {
    auto& st = out[l];
    st.layer = l;
    st.n_pairs = st.pairs.size();
    double total = 0.0;
    for (std::size_t h = 0; h < heads; ++h) {
      total += head_sum[l][h];
      HeadSpan hs{h, head_n[l][h]};
      if (hs.n_pairs > 0) hs.mean_span = head_sum[l][h] / static_cast<double>(hs.n_pairs);
      st.per_head.push_back(hs);
    }
    if (st.n_pairs > 0) st.mean_span = total / static_cast<double>(st.n_pairs);
  }
  return out;
}

AttentionRecord capture_attention(const Gpt<float>& model, const Song& song) {
  ag::NoGradGuard guard;
  ForwardOptions opts;
  opts.capture = true;
  auto out = model.forward(song.ids, opts);
  return std::move(*out.attention);
}

std::vector<SpanStat> span_stats(const Gpt<float>& model, const Corpus& corpus, std::size_t n_songs,
                                 double threshold) {
  if (corpus.songs.size() < n_songs) {
    log_warning("span statistics requested over " + std::to_string(n_songs) + " songs, corpus has " +
                std::to_string(corpus.songs.size()));
    n_songs = corpus.songs.size();
  }
  std::vector<AttentionRecord> records(n_songs);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < n_songs; ++i) records[i] = capture_attention(model, corpus.songs[i]);
  return span_stats(records, threshold);
}

std::string span_pairs_csv(const std::vector<SpanStat>& stats) {
  CsvWriter csv({"song", "layer", "head", "query", "key", "weight"});
  for (const auto& st : stats)
    for (const auto& p : st.pairs) {
      csv.field(p.song).field(p.layer + 1).field(p.head + 1).field(p.query).field(p.key).field(p.weight);
      csv.end_row();
    }
  return csv.str();
}

std::string span_summary_csv(const std::vector<SpanStat>& stats) {
  CsvWriter csv({"layer", "head", "mean_span", "n"});
  for (const auto& st : stats) {
    csv.field(st.layer + 1).field(std::string_view("all")).field(st.mean_span).field(st.n_pairs);
    csv.end_row();
    for (const auto& h : st.per_head) {
      csv.field(st.layer + 1).field(h.head + 1).field(h.mean_span).field(h.n_pairs);
      csv.end_row();
    }
  }
  return csv.str();
}

std::vector<HeadTree> attention_trees(const AttentionRecord& record) {
  std::vector<HeadTree> out;
  for (std::size_t l = 0; l < record.layers(); ++l)
    for (std::size_t h = 0; h < record.heads(); ++h) out.push_back({l, h, cle_mst(record.maps[l][h])});
  return out;
}

nlohmann::json attention_trees_json(const std::vector<HeadTree>& trees, const Song& song, const Vocab& vocab) {
  nlohmann::json tokens = nlohmann::json::array();
  for (auto id : song.ids) tokens.push_back(vocab.token(id));
  nlohmann::json list = nlohmann::json::array();
  for (const auto& t : trees) {
    auto j = t.tree.to_json();
    j["layer"] = t.layer + 1;
    j["head"] = t.head + 1;
    list.push_back(std::move(j));
  }
  return {{"tokens", tokens}, {"trees", list}};
}

EmbeddingTrace embedding_trace(const Gpt<float>& model, const Song& song, std::size_t song_index) {
  if (song.ids.size() > model.config().context_len)
    throw std::invalid_argument("song of length " + std::to_string(song.ids.size()) + " exceeds the context of " +
                                std::to_string(model.config().context_len));
  ag::NoGradGuard guard;
  ForwardOptions opts;
  opts.capture = true;
  auto out = model.forward(song.ids, opts);
  EmbeddingTrace trace;
  trace.song = song_index;
  trace.tokens = song.ids;
  trace.states = std::move(out.states);
  return trace;
}

// ---------------------------------------------------------------- cosine / clustering

CosineDistribution cosine_similarity_distribution(const std::vector<EmbeddingTrace>& traces, TokenId token,
                                                  std::size_t layer) {
  std::vector<std::span<const double>> rows;
  for (const auto& tr : traces) {
    if (layer >= tr.layers()) throw std::out_of_range("layer " + std::to_string(layer) + " not recorded");
    for (std::size_t t = 0; t < tr.length(); ++t)
      if (tr.tokens[t] == token) rows.push_back(tr.states[layer].row(t));
  }
  if (rows.size() < 2) throw std::invalid_argument("token occurs fewer than twice in the traces");

  CosineDistribution out;
  out.n_occurrences = rows.size();
  const std::size_t h = rows.front().size();
  std::vector<double> mean(h, 0.0);
  double scale = 0.0;
  for (auto r : rows) {
    double n2 = 0.0;
    for (std::size_t i = 0; i < h; ++i) {
      mean[i] += r[i];
      n2 += r[i] * r[i];
    }
    scale = std::max(scale, std::sqrt(n2));
  }
  double mean_norm = 0.0;
  for (auto& m : mean) {
    m /= static_cast<double>(rows.size());
    mean_norm += m * m;
  }
  mean_norm = std::sqrt(mean_norm);
  out.degenerate = mean_norm <= 1e-6 * std::max(scale, 1e-300);
  for (auto r : rows) {
    double dot = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < h; ++i) {
      dot += r[i] * mean[i];
      n2 += r[i] * r[i];
    }
    if (n2 == 0.0 || mean_norm == 0.0) {
      ++out.n_excluded;
      continue;
    }
    out.values.push_back(std::clamp(dot / (std::sqrt(n2) * mean_norm), -1.0, 1.0));
  }
  return out;
}

double two_cluster_separation(std::vector<double> values) {
  if (values.size() < 2) return 0.0;
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  double total = 0.0;
  for (double v : values) total += v;
  const double mean = total / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  if (ss <= 0.0) return 0.0;
  // Optimal 1-D 2-means split is contiguous in sorted order.
  double best = 0.0, left = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    left += values[i - 1];
    const double nl = static_cast<double>(i), nr = static_cast<double>(n - i);
    const double ml = left / nl, mr = (total - left) / nr;
    best = std::max(best, nl * (ml - mean) * (ml - mean) + nr * (mr - mean) * (mr - mean));
  }
  return std::clamp(best / ss, 0.0, 1.0);
}

}  // namespace songlm
