#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace tsc::momdp {

struct DegenerateLikelihood : std::runtime_error {
  explicit DegenerateLikelihood(const std::string& what) : std::runtime_error(what) {}
};

// Discrete-regime demand belief: a hidden Markov chain over K arrival-rate
// regimes with a per-step Poisson(rate * tau) observation model.
struct DemandBelief {
  std::vector<double> probabilities;               // simplex over regimes
  std::vector<double> rates;                       // veh/s per regime
  std::vector<std::vector<double>> transition;     // K x K row-stochastic
  double tau = 1.0;

  std::size_t regimes() const { return rates.size(); }

  void validate() const {
    if (probabilities.size() != rates.size() || transition.size() != rates.size())
      throw std::invalid_argument("belief: dimension mismatch");
    double sum = 0;
    for (double p : probabilities) {
      if (p < 0 || p > 1) throw std::invalid_argument("belief: probability out of [0,1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("belief: probabilities must sum to 1");
    for (double r : rates)
      if (r < 0) throw std::invalid_argument("belief: negative rate");
  }

  int argmax_regime() const {
    int best = 0;
    for (std::size_t k = 1; k < probabilities.size(); ++k)
      if (probabilities[k] > probabilities[static_cast<std::size_t>(best)])
        best = static_cast<int>(k);
    return best;
  }

  // Expected arrival rate under the current belief, veh/s.
  double expected_rate() const {
    double r = 0;
    for (std::size_t k = 0; k < rates.size(); ++k) r += probabilities[k] * rates[k];
    return r;
  }
};

inline double poisson_pmf(int k, double mean) {
  if (mean <= 0) return k == 0 ? 1.0 : 0.0;
  double log_p = -mean + k * std::log(mean);
  for (int i = 2; i <= k; ++i) log_p -= std::log(static_cast<double>(i));
  return std::exp(log_p);
}

// One forward-algorithm step: predict through the regime chain, weight by
// the Poisson likelihood of the observed count, renormalize. When every
// weighted mass underflows to zero the predicted prior is returned instead
// and `underflowed` (if given) is set.
inline DemandBelief belief_update(const DemandBelief& b, int observed_count,
                                  bool* underflowed = nullptr) {
  if (observed_count < 0) throw std::invalid_argument("negative observed count");
  std::size_t K = b.regimes();
  DemandBelief out = b;
  std::vector<double> predicted(K, 0.0);
  for (std::size_t j = 0; j < K; ++j)
    for (std::size_t i = 0; i < K; ++i)
      predicted[j] += b.probabilities[i] * b.transition[i][j];

  double total = 0;
  std::vector<double> weighted(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    weighted[k] = predicted[k] * poisson_pmf(observed_count, b.rates[k] * b.tau);
    total += weighted[k];
  }
  if (underflowed) *underflowed = false;
  if (total <= 0) {
    if (underflowed) *underflowed = true;
    out.probabilities = predicted;  // fall back to the predicted prior
    return out;
  }
  for (std::size_t k = 0; k < K; ++k) out.probabilities[k] = weighted[k] / total;
  return out;
}

}  // namespace tsc::momdp
