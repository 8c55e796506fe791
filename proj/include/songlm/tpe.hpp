#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace songlm {

struct ParamSpec {
  enum class Kind { real, integer };
  std::string name;
  Kind kind = Kind::real;
  double low = 0.0;
  double high = 1.0;
};

struct SearchSpace {
  std::vector<ParamSpec> params;

  void validate() const;
  std::size_t index_of(const std::string& name) const;

  /// layers 1-6, hidden 10-100, embed 10-100 (integers), dropout 0-1.
  static SearchSpace recurrent();
};

struct TpeSpec {
  std::size_t n_trials = 100;
  double gamma = 0.25;           // fraction of trials forming the "good" density l(x)
  std::size_t n_candidates = 24; // draws from l(x) ranked by l(x)/g(x)
  std::size_t n_startup = 10;    // prior samples before the model kicks in
  std::uint64_t seed = 0;

  void validate() const;
};

struct Trial {
  std::size_t index = 0;
  std::vector<double> values;  // aligned with SearchSpace::params
  double loss = 0.0;           // +inf for failed trials
  bool failed = false;
  std::string error;
};

struct TpeResult {
  std::vector<Trial> trials;
  std::size_t best_index = 0;

  const Trial& best() const { return trials.at(best_index); }
};

using Objective = std::function<double(const std::vector<double>&)>;
using TrialCallback = std::function<void(const Trial&)>;

/// Sequential Tree-structured Parzen Estimator minimising `objective`.
/// Each dimension is modelled independently by adaptive Parzen mixtures of
/// truncated Gaussians; a throwing or non-finite objective counts as +inf.
TpeResult tpe_search(const SearchSpace& space, const Objective& objective, const TpeSpec& spec,
                     const TrialCallback& on_trial = {});

std::string trial_log_csv(const TpeResult& result, const SearchSpace& space);

/// Parzen mixture over [low, high] used for one dimension; exposed for tests.
class ParzenEstimator {
 public:
  ParzenEstimator(const std::vector<double>& observations, double low, double high);

  double log_pdf(double x) const;
  template <class R>
  double sample(R& rng) const;

  const std::vector<double>& mus() const { return mus_; }
  const std::vector<double>& sigmas() const { return sigmas_; }

 private:
  double low_, high_;
  std::vector<double> mus_, sigmas_, weights_, norms_;
};

}  // namespace songlm
