#pragma once

#include <iosfwd>
#include <vector>

#include "tsc/momdp/tabular_mdp.hpp"
#include "tsc/rng.hpp"

namespace tsc::rl {

// Linear softmax policy: pi(a|x) = exp(theta_a . x) / sum_b exp(theta_b . x),
// temperature 1. Parameters are stored action-major: theta[a * n_features + f].
struct SoftmaxPolicy {
  int n_features = 0;
  int n_actions = 0;
  std::vector<double> theta;

  SoftmaxPolicy() = default;
  SoftmaxPolicy(int features, int actions)
      : n_features(features),
        n_actions(actions),
        theta(static_cast<std::size_t>(features) * static_cast<std::size_t>(actions), 0.0) {}

  double weight(int action, int feature) const {
    return theta[static_cast<std::size_t>(action) * static_cast<std::size_t>(n_features) +
                 static_cast<std::size_t>(feature)];
  }

  std::vector<double> probabilities(const std::vector<double>& features) const;
  int sample(const std::vector<double>& features, Rng& rng) const;
  // d log pi(a|x) / d theta, same layout as theta
  std::vector<double> grad_log_pi(const std::vector<double>& features, int action) const;
};

struct TrajectoryStep {
  std::vector<double> features;
  int action = 0;
  double reward = 0;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;

  // undiscounted within-episode return
  double total_return() const {
    double r = 0;
    for (const auto& s : steps) r += s.reward;
    return r;
  }
};

// (1/N) sum_n R(tau_n) sum_t grad log pi(a_t | s_t), the likelihood-ratio
// estimator with the dynamics terms cancelled.
std::vector<double> reinforce_gradient(const std::vector<Trajectory>& trajectories,
                                       const SoftmaxPolicy& pi);

// Plain gradient ascent: theta' = theta + lr * gradient.
void reinforce_update(SoftmaxPolicy& pi, const std::vector<double>& gradient,
                      double learning_rate);

// --- Exact small-MDP machinery (tabular features: one-hot state) ---

// J(theta) = E[R(tau)] with a fixed start state and horizon, computed by
// enumerating every trajectory and weighting by its probability.
double exact_return(const momdp::TabularMdp& m, const SoftmaxPolicy& pi,
                    int start_state, int horizon);

// Exact policy gradient of exact_return, via the same enumeration.
std::vector<double> exact_gradient(const momdp::TabularMdp& m, const SoftmaxPolicy& pi,
                                   int start_state, int horizon);

std::vector<double> one_hot(int index, int size);

void save_policy(const SoftmaxPolicy& pi, std::ostream& os);
SoftmaxPolicy load_policy(std::istream& is);

}  // namespace tsc::rl
