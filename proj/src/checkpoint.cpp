#include "songlm/checkpoint.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "songlm/gpt.hpp"
#include "songlm/ops.hpp"
#include "songlm/rnn.hpp"

namespace songlm {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

std::string base64_encode(std::span<const unsigned char> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw std::runtime_error("malformed base64 payload");
  std::vector<unsigned char> out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
  if (n < 0) throw std::runtime_error("malformed base64 payload");
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

nlohmann::json Checkpoint::to_json() const {
  nlohmann::json j;
  j["format"] = "songlm-checkpoint";
  j["version"] = kVersion;
  j["arch"] = arch;
  j["config"] = config;
  j["vocab"] = vocab.to_json();
  j["parameters"] = nlohmann::json::array();
  for (const auto& p : parameters) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(p.values.data());
    j["parameters"].push_back({{"name", p.name},
                               {"shape", p.shape},
                               {"dtype", "f32le"},
                               {"data", base64_encode({bytes, p.values.size() * sizeof(float)})}});
  }
  j["extra"] = extra;
  return j;
}

Checkpoint Checkpoint::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "songlm-checkpoint") throw std::runtime_error("not a songlm checkpoint");
  if (j.value("version", 0) != kVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(j.value("version", 0)));
  Checkpoint c;
  c.arch = j.at("arch").get<std::string>();
  c.config = j.at("config");
  c.vocab = Vocab::from_json(j.at("vocab"));
  for (const auto& p : j.at("parameters")) {
    if (p.value("dtype", "") != "f32le") throw std::runtime_error("unsupported parameter dtype");
    ParameterBlob blob;
    blob.name = p.at("name").get<std::string>();
    blob.shape = p.at("shape").get<ag::Shape>();
    const auto bytes = base64_decode(p.at("data").get<std::string>());
    if (bytes.size() != ag::numel(blob.shape) * sizeof(float))
      throw std::runtime_error("parameter " + blob.name + " has the wrong byte length");
    blob.values.resize(ag::numel(blob.shape));
    std::memcpy(blob.values.data(), bytes.data(), bytes.size());
    c.parameters.push_back(std::move(blob));
  }
  if (j.contains("extra")) c.extra = j.at("extra");
  return c;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json().dump() << '\n';
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return from_json(nlohmann::json::parse(in));
}

const ParameterBlob* Checkpoint::find(const std::string& name) const {
  for (const auto& p : parameters)
    if (p.name == name) return &p;
  return nullptr;
}

Checkpoint make_checkpoint(const LanguageModel<float>& model, const Vocab& vocab) {
  Checkpoint c;
  c.arch = model.arch();
  c.config = model.config_json();
  c.vocab = vocab;
  for (const auto& p : model.parameters())
    c.parameters.push_back({p.name, p.tensor.shape(), {p.tensor.data().begin(), p.tensor.data().end()}});
  return c;
}

void load_parameters(const LanguageModel<float>& model, const Checkpoint& checkpoint) {
  for (auto& p : model.parameters()) {
    const auto* blob = checkpoint.find(p.name);
    if (!blob) throw std::runtime_error("checkpoint lacks parameter " + p.name);
    if (blob->shape != p.tensor.shape())
      throw std::runtime_error("shape mismatch for " + p.name + ": " + ag::to_string(blob->shape) + " vs " +
                               ag::to_string(p.tensor.shape()));
    auto dst = p.tensor.data();
    std::copy(blob->values.begin(), blob->values.end(), dst.begin());
  }
}

std::unique_ptr<LanguageModel<float>> instantiate(const Checkpoint& checkpoint) {
  std::unique_ptr<LanguageModel<float>> model;
  if (checkpoint.arch == "gpt") {
    model = std::make_unique<Gpt<float>>(GptConfig::from_json(checkpoint.config), 0);
  } else if (checkpoint.arch == "rnn" || checkpoint.arch == "lstm") {
    model = std::make_unique<Rnn<float>>(RnnConfig::from_json(checkpoint.config), 0);
  } else {
    throw std::runtime_error("checkpoint architecture '" + checkpoint.arch + "' is not a language model");
  }
  load_parameters(*model, checkpoint);
  return model;
}

nlohmann::json describe(const Checkpoint& checkpoint) {
  std::size_t count = 0;
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : checkpoint.parameters) {
    count += p.values.size();
    params.push_back({{"name", p.name}, {"shape", p.shape}});
  }
  return {{"arch", checkpoint.arch},      {"config", checkpoint.config}, {"vocab_size", checkpoint.vocab.size()},
          {"parameter_count", count},     {"parameters", params},        {"extra", checkpoint.extra}};
}

// ---------------------------------------------------------------- sampling

template <class T>
GeneratedSong sample(const LanguageModel<T>& model, std::uint64_t seed, std::size_t max_len, double temperature) {
  if (temperature < 0.0) throw std::invalid_argument("temperature must be nonnegative");
  ag::NoGradGuard no_grad;
  Rng rng(seed);
  GeneratedSong g;
  g.ids.push_back(special::bos);
  const std::size_t window = model.max_input_length();
  const std::size_t v = model.vocab_size();
  while (true) {
    if (g.ids.size() - 1 >= max_len) {
      g.truncated = true;
      break;
    }
    std::span<const TokenId> ctx(g.ids);
    if (window && ctx.size() > window) ctx = ctx.subspan(ctx.size() - window);
    const auto logits = model.logits(ctx, {});
    const auto row = logits.data().subspan((ctx.size() - 1) * v, v);
    std::vector<double> p(v, 0.0);
    TokenId next = special::eos;
    if (temperature == 0.0) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < v; ++i) {
        if (i == static_cast<std::size_t>(special::bos) || i == static_cast<std::size_t>(special::pad)) continue;
        if (row[i] > best) {
          best = row[i];
          next = static_cast<TokenId>(i);
        }
      }
    } else {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < v; ++i) mx = std::max(mx, static_cast<double>(row[i]));
      for (std::size_t i = 0; i < v; ++i) {
        if (i == static_cast<std::size_t>(special::bos) || i == static_cast<std::size_t>(special::pad)) continue;
        p[i] = std::exp((row[i] - mx) / temperature);
      }
      next = static_cast<TokenId>(rng.categorical(std::span<const double>(p)));
    }
    g.ids.push_back(next);
    if (next == special::eos) break;
  }
  return g;
}

template GeneratedSong sample(const LanguageModel<float>&, std::uint64_t, std::size_t, double);
template GeneratedSong sample(const LanguageModel<double>&, std::uint64_t, std::size_t, double);

}  // namespace songlm
