#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "tsc/core/sim.hpp"
#include "tsc/metrics/metrics.hpp"
#include "tsc/momdp/factored_state.hpp"
#include "tsc/momdp/tabular_mdp.hpp"
#include "tsc/rng.hpp"

namespace tsc::rl {

// Tabular action-value store. Unvisited entries read as 0; the learning rate
// follows the visit count (alpha = 1 / (1 + visits)) unless a fixed alpha is
// set.
struct QTable {
  int n_actions = 2;
  double gamma = 0.95;
  double fixed_alpha = 0;  // 0 -> visit-count schedule
  std::map<std::string, std::vector<double>> q;
  std::map<std::string, std::vector<long>> visits;

  const std::vector<double>& row(const std::string& key) const;
  double value(const std::string& key, int action) const;
  double max_value(const std::string& key) const;
  int greedy_action(const std::string& key) const;  // ties -> lowest index
  double alpha_for(const std::string& key, int action) const;
  std::size_t size() const { return q.size(); }
};

// Q'(s,a) = Q(s,a) + alpha * (r + gamma * max_a' Q(s',a') - Q(s,a));
// a terminal next state bootstraps 0. Increments the visit count.
void q_update(QTable& t, const std::string& s, int action, double reward,
              const std::string& s_next, double alpha, bool terminal = false);

// With probability epsilon a uniform random action, otherwise greedy.
int epsilon_greedy(const QTable& t, const std::string& key, double epsilon, Rng& rng);

// Uniform-width quantization of the factored observation into a string key.
// Included features follow the observation's design level; the belief, when
// present, contributes its argmax regime only.
std::string state_key(const momdp::FactoredState& fs, double bin_width,
                      int progress_bins = 4);

// Structured-text checkpoints.
void save_qtable(const QTable& t, std::ostream& os);
QTable load_qtable(std::istream& is);

enum class RewardMode { Queue, Delay, DelayDifference, Cost };
RewardMode reward_mode_from_string(const std::string& s);
const char* to_string(RewardMode m);

struct QTrainConfig {
  long episodes = 100;
  momdp::DesignLevel level = momdp::DesignLevel::L1;
  double bin_width = 5.0;
  RewardMode reward = RewardMode::Queue;
  metrics::CostCoefficients coeffs;
  double gamma = 0.95;
  double epsilon_floor = 0.05;
  double epsilon_decay = 0.999;
  std::uint64_t seed = 0;
};

struct LearningCurvePoint {
  long episode = 0;
  double total_return = 0;
  double epsilon = 0;
  double alpha_mean = 0;
};

struct QTrainResult {
  std::vector<QTable> tables;  // one learner per intersection
  std::vector<LearningCurvePoint> curve;
};

// Decentralized episodic training on the simulator: one independent learner
// per intersection, actions Extend/Change, reward = negative step criterion.
QTrainResult q_learning_train(const core::Simulator& sim, const QTrainConfig& cfg);

struct MdpTrainConfig {
  long episodes = 2000;
  long steps_per_episode = 100;
  double gamma = 0.95;
  double epsilon_floor = 0.05;
  double epsilon_decay = 0.999;
  // 0 -> visit-count schedule; deterministic MDPs converge fastest with 1
  double fixed_alpha = 1.0;
  std::uint64_t seed = 0;
};

// Q-learning directly on an explicit MDP with uniformly random start states,
// so the learned greedy values can be checked against value iteration.
QTable q_learning_train_mdp(const momdp::TabularMdp& m, const MdpTrainConfig& cfg);

void write_learning_curve_csv(const std::vector<LearningCurvePoint>& curve,
                              std::ostream& os);

}  // namespace tsc::rl
