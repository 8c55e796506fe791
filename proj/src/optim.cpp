#include "songlm/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace songlm {

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::adam ? "adam" : "adamw"; }

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "adamw") return OptimizerKind::adamw;
  throw std::invalid_argument("unknown optimizer: " + name);
}

template <class T>
Optimizer<T>::Optimizer(std::vector<ag::Tensor<T>> params, OptimizerConfig config)
    : params_(std::move(params)), config_(config) {
  if (!(config_.lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(p.numel(), 0.0);
    v_.emplace_back(p.numel(), 0.0);
  }
}

template <class T>
void Optimizer<T>::step() {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (!params_[i].has_grad()) throw std::logic_error("optimizer step: parameter " + std::to_string(i) + " has no gradient");
  ++step_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const bool decoupled = config_.kind == OptimizerKind::adamw;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto w = params_[i].data();
    auto g = params_[i].grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      double grad = g[j];
      double weight = w[j];
      if (config_.weight_decay != 0.0) {
        if (decoupled) weight -= config_.lr * config_.weight_decay * weight;
        else grad += config_.weight_decay * weight;
      }
      m[j] = b1 * m[j] + (1.0 - b1) * grad;
      v[j] = b2 * v[j] + (1.0 - b2) * grad * grad;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      weight -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
      w[j] = static_cast<T>(weight);
    }
  }
}

template <class T>
void Optimizer<T>::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

template <class T>
double clip_grad_norm(const std::vector<ag::Tensor<T>>& params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params)
    if (p.has_grad())
      for (auto g : p.grad()) sq += static_cast<double>(g) * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (auto p : params)
      if (p.has_grad())
        for (auto& g : p.grad()) g = static_cast<T>(g * s);
  }
  return norm;
}

template class Optimizer<float>;
template class Optimizer<double>;
template double clip_grad_norm(const std::vector<ag::Tensor<float>>&, double);
template double clip_grad_norm(const std::vector<ag::Tensor<double>>&, double);

}  // namespace songlm
