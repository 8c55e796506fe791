#include "songlm/tpe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "songlm/io.hpp"
#include "songlm/rng.hpp"

namespace songlm {

void SearchSpace::validate() const {
  if (params.empty()) throw std::invalid_argument("search space is empty");
  for (const auto& p : params)
    if (!(p.low < p.high)) throw std::invalid_argument("bounds of '" + p.name + "' are invalid");
}

std::size_t SearchSpace::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i].name == name) return i;
  throw std::out_of_range("no parameter named " + name);
}

SearchSpace SearchSpace::recurrent() {
  using K = ParamSpec::Kind;
  return {{{"layers", K::integer, 1, 6}, {"hidden", K::integer, 10, 100}, {"embed", K::integer, 10, 100},
           {"dropout", K::real, 0.0, 1.0}}};
}

void TpeSpec::validate() const {
  if (n_trials < 1) throw std::invalid_argument("TPE needs at least one trial");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("TPE gamma must lie in (0, 1)");
  if (n_candidates < 1) throw std::invalid_argument("TPE needs at least one candidate");
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double log_sum_exp(const std::vector<double>& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (mx == -std::numeric_limits<double>::infinity()) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace

ParzenEstimator::ParzenEstimator(const std::vector<double>& observations, double low, double high)
    : low_(low), high_(high) {
  const double prior_mu = 0.5 * (low + high);
  const double prior_sigma = high - low;
  std::vector<double> mus = observations;
  mus.push_back(prior_mu);
  std::vector<std::size_t> order(mus.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return mus[a] < mus[b]; });
  const std::size_t prior_index = mus.size() - 1;

  // Bandwidth of each kernel: the larger gap to its sorted neighbours,
  // clipped to [range / min(100, n + 1), range].
  const std::size_t n = mus.size();
  const double max_sigma = prior_sigma;
  const double min_sigma = prior_sigma / std::min(100.0, static_cast<double>(n) + 1.0);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t i = order[r];
    double s;
    if (i == prior_index) {
      s = prior_sigma;
    } else {
      const double left = r > 0 ? mus[i] - mus[order[r - 1]] : mus[i] - low;
      const double right = r + 1 < n ? mus[order[r + 1]] - mus[i] : high - mus[i];
      s = std::clamp(std::max(left, right), min_sigma, max_sigma);
    }
    mus_.push_back(mus[i]);
    sigmas_.push_back(s);
    weights_.push_back(1.0 / static_cast<double>(n));
    norms_.push_back(std::max(normal_cdf((high - mus[i]) / s) - normal_cdf((low - mus[i]) / s), 1e-300));
  }
}

double ParzenEstimator::log_pdf(double x) const {
  std::vector<double> terms(mus_.size());
  for (std::size_t i = 0; i < mus_.size(); ++i) {
    const double z = (x - mus_[i]) / sigmas_[i];
    terms[i] = std::log(weights_[i]) - 0.5 * z * z - std::log(sigmas_[i] * std::sqrt(2.0 * std::numbers::pi)) -
               std::log(norms_[i]);
  }
  return log_sum_exp(terms);
}

template <class R>
double ParzenEstimator::sample(R& rng) const {
  const std::size_t k = rng.categorical(std::span<const double>(weights_));
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double x = rng.normal(mus_[k], sigmas_[k]);
    if (x >= low_ && x <= high_) return x;
  }
  return std::clamp(mus_[k], low_, high_);
}

template double ParzenEstimator::sample<Rng>(Rng&) const;

namespace {

double to_internal_low(const ParamSpec& p) { return p.kind == ParamSpec::Kind::integer ? p.low - 0.5 : p.low; }
double to_internal_high(const ParamSpec& p) { return p.kind == ParamSpec::Kind::integer ? p.high + 0.5 : p.high; }

double finalize(const ParamSpec& p, double x) {
  if (p.kind == ParamSpec::Kind::integer) return std::clamp(std::round(x), p.low, p.high);
  return std::clamp(x, p.low, p.high);
}

}  // namespace

TpeResult tpe_search(const SearchSpace& space, const Objective& objective, const TpeSpec& spec,
                     const TrialCallback& on_trial) {
  space.validate();
  spec.validate();
  Rng rng(spec.seed);
  TpeResult result;
  const std::size_t dims = space.params.size();

  for (std::size_t t = 0; t < spec.n_trials; ++t) {
    std::vector<double> values(dims);
    if (t < std::max<std::size_t>(spec.n_startup, 1)) {
      for (std::size_t d = 0; d < dims; ++d) {
        const auto& p = space.params[d];
        values[d] = finalize(p, rng.uniform(to_internal_low(p), to_internal_high(p)));
      }
    } else {
      std::vector<std::size_t> order(result.trials.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](auto a, auto b) { return result.trials[a].loss < result.trials[b].loss; });
      const auto n_below = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(spec.gamma * static_cast<double>(order.size()))));
      for (std::size_t d = 0; d < dims; ++d) {
        const auto& p = space.params[d];
        const double lo = to_internal_low(p), hi = to_internal_high(p);
        std::vector<double> below, above;
        for (std::size_t r = 0; r < order.size(); ++r)
          (r < n_below ? below : above).push_back(result.trials[order[r]].values[d]);
        const ParzenEstimator good(below, lo, hi);
        const ParzenEstimator bad(above, lo, hi);
        double best_x = good.sample(rng);
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < spec.n_candidates; ++c) {
          const double x = c == 0 ? best_x : good.sample(rng);
          const double score = good.log_pdf(x) - bad.log_pdf(x);
          if (score > best_score) {
            best_score = score;
            best_x = x;
          }
        }
        values[d] = finalize(p, best_x);
      }
    }

    Trial trial;
    trial.index = t;
    trial.values = values;
    try {
      trial.loss = objective(values);
      if (!std::isfinite(trial.loss)) {
        trial.failed = true;
        trial.error = "non-finite objective";
        trial.loss = std::numeric_limits<double>::infinity();
      }
    } catch (const std::exception& e) {
      trial.failed = true;
      trial.error = e.what();
      trial.loss = std::numeric_limits<double>::infinity();
    }
    if (result.trials.empty() || trial.loss < result.best().loss) result.best_index = t;
    result.trials.push_back(trial);
    if (on_trial) on_trial(result.trials.back());
  }
  return result;
}

std::string trial_log_csv(const TpeResult& result, const SearchSpace& space) {
  std::vector<std::string> header{"trial"};
  for (const auto& p : space.params) header.push_back(p.name);
  header.insert(header.end(), {"loss", "failed", "error"});
  CsvWriter csv(header);
  for (const auto& t : result.trials) {
    csv.field(t.index);
    for (double v : t.values) csv.field(v);
    csv.field(t.loss).field(t.failed ? 1 : 0).field(std::string_view(t.error));
    csv.end_row();
  }
  return csv.str();
}

}  // namespace songlm
