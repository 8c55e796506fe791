#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "songlm/tensor.hpp"

namespace songlm {

enum class OptimizerKind { adam, adamw };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(const std::string& name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Adam adds it to the gradient (L2); AdamW decays weights directly.
  double weight_decay = 0.0;

  static OptimizerConfig adam(double lr = 1e-3) { return {OptimizerKind::adam, lr, 0.9, 0.999, 1e-8, 0.0}; }
  static OptimizerConfig adamw(double lr = 1e-3, double wd = 0.01) {
    return {OptimizerKind::adamw, lr, 0.9, 0.999, 1e-8, wd};
  }
};

/// Adam / AdamW with bias-corrected moments, one state slot per parameter.
template <class T>
class Optimizer {
 public:
  Optimizer(std::vector<ag::Tensor<T>> params, OptimizerConfig config);

  /// Applies one update from the current gradients. Throws when a parameter
  /// has no gradient.
  void step();
  void zero_grad();

  std::int64_t steps() const { return step_; }
  const OptimizerConfig& config() const { return config_; }
  const std::vector<ag::Tensor<T>>& params() const { return params_; }
  const std::vector<std::vector<double>>& first_moment() const { return m_; }
  const std::vector<std::vector<double>>& second_moment() const { return v_; }

 private:
  std::vector<ag::Tensor<T>> params_;
  OptimizerConfig config_;
  std::int64_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

/// Scales all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
template <class T>
double clip_grad_norm(const std::vector<ag::Tensor<T>>& params, double max_norm);

}  // namespace songlm
