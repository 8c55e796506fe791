#include "songlm/gpt.hpp"

#include <cmath>
#include <stdexcept>

#include "songlm/ops.hpp"

namespace songlm {

void GptConfig::validate() const {
  if (n_layers < 1) throw std::invalid_argument("GPT needs at least one layer");
  if (n_heads < 1) throw std::invalid_argument("GPT needs at least one head");
  if (hidden == 0 || hidden % n_heads != 0) throw std::invalid_argument("hidden size must be divisible by head count");
  if (context_len < 2) throw std::invalid_argument("context length must be at least 2");
  if (vocab_size <= static_cast<std::size_t>(special::count)) throw std::invalid_argument("vocab size too small");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
  if (attention_span && *attention_span < 1) throw std::invalid_argument("attention span must be at least 1");
}

nlohmann::json GptConfig::to_json() const {
  return {{"n_layers", n_layers},       {"n_heads", n_heads}, {"hidden", hidden},
          {"context_len", context_len}, {"dropout", dropout}, {"vocab_size", vocab_size},
          {"attention_span", attention_span ? nlohmann::json(*attention_span) : nlohmann::json(nullptr)}};
}

GptConfig GptConfig::from_json(const nlohmann::json& j) {
  GptConfig c;
  c.n_layers = j.at("n_layers").get<std::size_t>();
  c.n_heads = j.at("n_heads").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.context_len = j.at("context_len").get<std::size_t>();
  c.dropout = j.at("dropout").get<double>();
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  if (j.contains("attention_span") && !j.at("attention_span").is_null())
    c.attention_span = j.at("attention_span").get<std::size_t>();
  c.validate();
  return c;
}

GptConfig GptConfig::small(std::size_t vocab) { return {1, 1, 192, 256, 0.1, vocab, std::nullopt}; }
GptConfig GptConfig::medium(std::size_t vocab) { return {6, 6, 384, 256, 0.1, vocab, std::nullopt}; }
GptConfig GptConfig::large(std::size_t vocab) { return {12, 12, 768, 256, 0.1, vocab, std::nullopt}; }

namespace {

template <class T>
ag::Tensor<T> normal_param(ag::Shape shape, double stddev, Rng& rng) {
  std::vector<T> data(ag::numel(shape));
  for (auto& v : data) v = static_cast<T>(rng.normal(0.0, stddev));
  return ag::Tensor<T>::from_data(std::move(shape), std::move(data), true);
}

template <class T>
ag::Tensor<T> const_param(ag::Shape shape, T value) {
  return ag::Tensor<T>::full(std::move(shape), value, true);
}

template <class T>
ag::Tensor<T> copy_param(const ag::Tensor<T>& t) {
  auto c = t.detach();
  c.set_requires_grad(true);
  return c;
}

template <class T>
Matrix to_matrix(const ag::Tensor<T>& t) {
  Matrix m(t.size(0), t.size(1));
  for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = static_cast<double>(t.data()[i]);
  return m;
}

}  // namespace

template <class T>
Gpt<T>::Gpt(GptConfig config, std::uint64_t init_seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng(init_seed);
  const std::size_t h = config_.hidden, v = config_.vocab_size;
  const double std_w = 0.02;
  const double std_proj = 0.02 / std::sqrt(2.0 * static_cast<double>(config_.n_layers));
  wte_ = normal_param<T>({v, h}, std_w, rng);
  wpe_ = normal_param<T>({config_.context_len, h}, 0.01, rng);
  for (std::size_t l = 0; l < config_.n_layers; ++l) {
    Block b;
    b.ln1_g = const_param<T>({h}, T(1));
    b.ln1_b = const_param<T>({h}, T(0));
    b.w_qkv = normal_param<T>({h, 3 * h}, std_w, rng);
    b.b_qkv = const_param<T>({3 * h}, T(0));
    b.w_o = normal_param<T>({h, h}, std_proj, rng);
    b.b_o = const_param<T>({h}, T(0));
    b.ln2_g = const_param<T>({h}, T(1));
    b.ln2_b = const_param<T>({h}, T(0));
    b.w_fc = normal_param<T>({h, 4 * h}, std_w, rng);
    b.b_fc = const_param<T>({4 * h}, T(0));
    b.w_proj = normal_param<T>({4 * h, h}, std_proj, rng);
    b.b_proj = const_param<T>({h}, T(0));
    blocks_.push_back(std::move(b));
  }
  lnf_g_ = const_param<T>({h}, T(1));
  lnf_b_ = const_param<T>({h}, T(0));
}

template <class T>
std::vector<NamedParameter<T>> Gpt<T>::parameters() const {
  std::vector<NamedParameter<T>> out{{"wte", wte_}, {"wpe", wpe_}};
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const auto p = "h" + std::to_string(l) + ".";
    const auto& b = blocks_[l];
    out.push_back({p + "ln1.g", b.ln1_g});
    out.push_back({p + "ln1.b", b.ln1_b});
    out.push_back({p + "attn.w_qkv", b.w_qkv});
    out.push_back({p + "attn.b_qkv", b.b_qkv});
    out.push_back({p + "attn.w_o", b.w_o});
    out.push_back({p + "attn.b_o", b.b_o});
    out.push_back({p + "ln2.g", b.ln2_g});
    out.push_back({p + "ln2.b", b.ln2_b});
    out.push_back({p + "mlp.w_fc", b.w_fc});
    out.push_back({p + "mlp.b_fc", b.b_fc});
    out.push_back({p + "mlp.w_proj", b.w_proj});
    out.push_back({p + "mlp.b_proj", b.b_proj});
  }
  out.push_back({"lnf.g", lnf_g_});
  out.push_back({"lnf.b", lnf_b_});
  return out;
}

template <class T>
void Gpt<T>::set_attention_span(std::optional<std::size_t> span) {
  if (span && *span < 1) throw std::invalid_argument("attention span must be at least 1");
  config_.attention_span = span;
}

template <class T>
Gpt<T> Gpt<T>::clone() const {
  Gpt copy = *this;
  copy.wte_ = copy_param(wte_);
  copy.wpe_ = copy_param(wpe_);
  copy.lnf_g_ = copy_param(lnf_g_);
  copy.lnf_b_ = copy_param(lnf_b_);
  for (auto& b : copy.blocks_)
    for (auto* t : {&b.ln1_g, &b.ln1_b, &b.w_qkv, &b.b_qkv, &b.w_o, &b.b_o, &b.ln2_g, &b.ln2_b, &b.w_fc, &b.b_fc,
                    &b.w_proj, &b.b_proj})
      *t = copy_param(*t);
  return copy;
}

template <class T>
GptOutput<T> Gpt<T>::forward(std::span<const TokenId> ids, const ForwardOptions& options) const {
  const std::size_t n = ids.size();
  if (n == 0) throw std::invalid_argument("GPT forward on empty input");
  if (n > config_.context_len)
    throw std::invalid_argument("input length " + std::to_string(n) + " exceeds context length " +
                                std::to_string(config_.context_len));
  for (auto id : ids)
    if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size)
      throw std::invalid_argument("token id " + std::to_string(id) + " outside vocabulary of " +
                                  std::to_string(config_.vocab_size));

  const bool train = options.train;
  const double p = config_.dropout;
  Rng* rng = options.rng;
  const std::size_t h = config_.hidden, a = config_.n_heads, d = h / a;
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(d));

  GptOutput<T> out;
  if (options.capture) out.attention.emplace();

  auto x = ag::add(ag::embedding(wte_, ids), ag::slice(wpe_, 0, 0, n));
  x = ag::dropout(x, p, train, rng);
  if (options.capture) out.states.push_back(to_matrix(x));

  for (const auto& b : blocks_) {
    auto hn = ag::layer_norm(x, b.ln1_g, b.ln1_b);
    auto qkv = ag::add(ag::matmul(hn, b.w_qkv), b.b_qkv);
    std::vector<ag::Tensor<T>> heads;
    heads.reserve(a);
    std::vector<Matrix> layer_maps;
    for (std::size_t k = 0; k < a; ++k) {
      auto q = ag::slice(qkv, 1, k * d, (k + 1) * d);
      auto kk = ag::slice(qkv, 1, h + k * d, h + (k + 1) * d);
      auto v = ag::slice(qkv, 1, 2 * h + k * d, 2 * h + (k + 1) * d);
      auto scores = ag::scale(ag::matmul(q, ag::transpose(kk)), att_scale);
      auto probs = ag::softmax(ag::causal_mask(scores, config_.attention_span), 1);
      if (options.capture) layer_maps.push_back(to_matrix(probs));
      probs = ag::dropout(probs, p, train, rng);
      heads.push_back(ag::matmul(probs, v));
    }
    if (options.capture) out.attention->maps.push_back(std::move(layer_maps));
    auto att = a == 1 ? heads.front() : ag::concat(heads, 1);
    att = ag::add(ag::matmul(att, b.w_o), b.b_o);
    x = ag::add(x, ag::dropout(att, p, train, rng));

    auto h2 = ag::layer_norm(x, b.ln2_g, b.ln2_b);
    auto f = ag::gelu(ag::add(ag::matmul(h2, b.w_fc), b.b_fc));
    f = ag::add(ag::matmul(f, b.w_proj), b.b_proj);
    x = ag::add(x, ag::dropout(f, p, train, rng));
    if (options.capture) out.states.push_back(to_matrix(x));
  }

  out.final_hidden = ag::layer_norm(x, lnf_g_, lnf_b_);
  out.logits = ag::matmul(out.final_hidden, ag::transpose(wte_));
  return out;
}

template class Gpt<float>;
template class Gpt<double>;

}  // namespace songlm
