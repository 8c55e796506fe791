#include "songlm/rnn.hpp"

#include <cmath>
#include <stdexcept>

#include "songlm/ops.hpp"

namespace songlm {

std::string to_string(CellKind kind) { return kind == CellKind::rnn ? "rnn" : "lstm"; }

CellKind parse_cell(const std::string& name) {
  if (name == "rnn") return CellKind::rnn;
  if (name == "lstm") return CellKind::lstm;
  throw std::invalid_argument("unknown recurrent cell: " + name);
}

void RnnConfig::validate() const {
  if (n_layers < 1 || n_layers > 6) throw std::invalid_argument("RNN layers must lie in 1..6");
  if (hidden < 10 || hidden > 100) throw std::invalid_argument("RNN hidden size must lie in 10..100");
  if (embed < 10 || embed > 100) throw std::invalid_argument("RNN embedding size must lie in 10..100");
  if (!(dropout >= 0.0 && dropout <= 1.0)) throw std::invalid_argument("RNN dropout must lie in [0, 1]");
  if (vocab_size <= static_cast<std::size_t>(special::count)) throw std::invalid_argument("vocab size too small");
}

nlohmann::json RnnConfig::to_json() const {
  return {{"cell", to_string(cell)}, {"n_layers", n_layers}, {"hidden", hidden},
          {"embed", embed},          {"dropout", dropout},   {"vocab_size", vocab_size}};
}

RnnConfig RnnConfig::from_json(const nlohmann::json& j) {
  RnnConfig c;
  c.cell = parse_cell(j.at("cell").get<std::string>());
  c.n_layers = j.at("n_layers").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.embed = j.at("embed").get<std::size_t>();
  c.dropout = j.at("dropout").get<double>();
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.validate();
  return c;
}

namespace {

template <class T>
ag::Tensor<T> uniform_param(ag::Shape shape, double bound, Rng& rng) {
  std::vector<T> data(ag::numel(shape));
  for (auto& v : data) v = static_cast<T>(rng.uniform(-bound, bound));
  return ag::Tensor<T>::from_data(std::move(shape), std::move(data), true);
}

template <class T>
Matrix row_stack(const std::vector<ag::Tensor<T>>& rows, std::size_t width) {
  Matrix m(rows.size(), width);
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t j = 0; j < width; ++j) m(t, j) = static_cast<double>(rows[t].data()[j]);
  return m;
}

}  // namespace

template <class T>
Rnn<T>::Rnn(RnnConfig config, std::uint64_t init_seed) : config_(config) {
  config_.validate();
  Rng rng(init_seed);
  const std::size_t h = config_.hidden;
  const std::size_t gates = config_.cell == CellKind::lstm ? 4 : 1;
  // PyTorch-style U(-1/sqrt(H), 1/sqrt(H)) initialisation.
  const double bound = 1.0 / std::sqrt(static_cast<double>(h));
  embedding_ = uniform_param<T>({config_.vocab_size, config_.embed}, 1.0, rng);
  std::size_t in = config_.embed;
  for (std::size_t l = 0; l < config_.n_layers; ++l) {
    layers_.push_back({uniform_param<T>({in, gates * h}, bound, rng), uniform_param<T>({h, gates * h}, bound, rng),
                       uniform_param<T>({gates * h}, bound, rng)});
    in = h;
  }
  w_out_ = uniform_param<T>({h, config_.vocab_size}, bound, rng);
  b_out_ = uniform_param<T>({config_.vocab_size}, bound, rng);
}

template <class T>
std::vector<NamedParameter<T>> Rnn<T>::parameters() const {
  std::vector<NamedParameter<T>> out{{"embedding", embedding_}};
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto p = "l" + std::to_string(l) + ".";
    out.push_back({p + "w_ih", layers_[l].w_ih});
    out.push_back({p + "w_hh", layers_[l].w_hh});
    out.push_back({p + "b", layers_[l].b});
  }
  out.push_back({"out.w", w_out_});
  out.push_back({"out.b", b_out_});
  return out;
}

template <class T>
RnnOutput<T> Rnn<T>::forward(std::span<const TokenId> ids, const ForwardOptions& options) const {
  const std::size_t n = ids.size();
  if (n == 0) throw std::invalid_argument("RNN forward on empty input");
  for (auto id : ids)
    if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size)
      throw std::invalid_argument("token id " + std::to_string(id) + " outside vocabulary of " +
                                  std::to_string(config_.vocab_size));
  const bool train = options.train;
  const double p = config_.dropout;
  const std::size_t h = config_.hidden;
  const bool lstm = config_.cell == CellKind::lstm;

  RnnOutput<T> out;
  auto x = ag::embedding(embedding_, ids);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (l > 0) x = ag::dropout(x, p, train, options.rng);
    auto projected = ag::add(ag::matmul(x, layer.w_ih), layer.b);  // [T, G*H]
    std::vector<ag::Tensor<T>> hs, cs;
    hs.reserve(n);
    ag::Tensor<T> h_prev, c_prev;
    for (std::size_t t = 0; t < n; ++t) {
      auto pre = ag::slice(projected, 0, t, t + 1);
      if (t > 0) pre = ag::add(pre, ag::matmul(h_prev, layer.w_hh));
      if (!lstm) {
        h_prev = ag::tanh(pre);
      } else {
        auto i_gate = ag::sigmoid(ag::slice(pre, 1, 0, h));
        auto f_gate = ag::sigmoid(ag::slice(pre, 1, h, 2 * h));
        auto g_gate = ag::tanh(ag::slice(pre, 1, 2 * h, 3 * h));
        auto o_gate = ag::sigmoid(ag::slice(pre, 1, 3 * h, 4 * h));
        auto c = ag::mul(i_gate, g_gate);
        if (t > 0) c = ag::add(ag::mul(f_gate, c_prev), c);
        c_prev = c;
        h_prev = ag::mul(o_gate, ag::tanh(c));
        if (options.capture) cs.push_back(c);
      }
      hs.push_back(h_prev);
    }
    if (options.capture) {
      out.states.hidden.push_back(row_stack(hs, h));
      if (lstm) out.states.cell.push_back(row_stack(cs, h));
    }
    x = n == 1 ? hs.front() : ag::concat(hs, 0);
  }
  x = ag::dropout(x, p, train, options.rng);
  out.logits = ag::add(ag::matmul(x, w_out_), b_out_);
  return out;
}

template class Rnn<float>;
template class Rnn<double>;

}  // namespace songlm
