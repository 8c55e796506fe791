#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "songlm/corpus.hpp"
#include "songlm/language_model.hpp"

namespace songlm {

struct ParameterBlob {
  std::string name;
  ag::Shape shape;
  std::vector<float> values;
};

/// Versioned JSON container: architecture tag, config, vocabulary and the
/// named parameter arrays. Parameter data is float32 little-endian, base64
/// encoded.
struct Checkpoint {
  static constexpr int kVersion = 1;

  std::string arch;  // "gpt", "rnn", "lstm", "gpt-classifier"
  nlohmann::json config;
  Vocab vocab;
  std::vector<ParameterBlob> parameters;
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json to_json() const;
  static Checkpoint from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  const ParameterBlob* find(const std::string& name) const;
};

Checkpoint make_checkpoint(const LanguageModel<float>& model, const Vocab& vocab);

/// Copies checkpoint values into `model` by parameter name; the shapes must match.
void load_parameters(const LanguageModel<float>& model, const Checkpoint& checkpoint);

/// Rebuilds a GPT, RNN or LSTM language model from a checkpoint.
std::unique_ptr<LanguageModel<float>> instantiate(const Checkpoint& checkpoint);

/// Summary for `songlm model info`.
nlohmann::json describe(const Checkpoint& checkpoint);

std::string base64_encode(std::span<const unsigned char> bytes);
std::vector<unsigned char> base64_decode(const std::string& text);

}  // namespace songlm
