#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tsc::momdp {

// Explicit small MDP <S, A, P, R, gamma>, the brute-force oracle backing the
// learning and planning code.
struct TabularMdp {
  int n_states = 0;
  int n_actions = 0;
  // transition[s][a][s'], each row sums to 1
  std::vector<std::vector<std::vector<double>>> transition;
  std::vector<std::vector<double>> reward;  // reward[s][a]
  double gamma = 0.95;

  void validate() const;

  double p(int s, int a, int s2) const {
    return transition[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]
                     [static_cast<std::size_t>(s2)];
  }
  double r(int s, int a) const {
    return reward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
  }

  static TabularMdp zeros(int n_states, int n_actions, double gamma);
};

struct ValueIterationResult {
  std::vector<double> value;
  std::vector<int> policy;  // greedy, ties to lowest action index
  int iterations = 0;
};

// Iterates the Bellman optimality operator from V = 0 until the sup-norm
// residual drops below tol*(1-gamma)/gamma.
ValueIterationResult value_iteration(const TabularMdp& m, double tol = 1e-9);

// Fixed point of the Bellman expectation equation for a stochastic policy
// pi[s][a], solved by iteration to 1e-9.
std::vector<double> policy_evaluation(const TabularMdp& m,
                                      const std::vector<std::vector<double>>& pi);

std::vector<double> policy_evaluation(const TabularMdp& m,
                                      const std::vector<int>& deterministic_pi);

// Structured-text serialization (explicit P and R tables) so oracle fixtures
// can be versioned in the repo.
void save_mdp(const TabularMdp& m, std::ostream& os);
TabularMdp load_mdp(std::istream& is);
void save_mdp_file(const TabularMdp& m, const std::string& path);
TabularMdp load_mdp_file(const std::string& path);

// Oracle fixture: a one-intersection, two-phase signal control MDP with
// deterministic unit arrivals, per-link queues capped at `capacity`, reward
// -(total queue). Switching costs one unserved step (the change interval).
// Small enough for exact value iteration.
TabularMdp build_intersection_mdp(int capacity = 4, double gamma = 0.95,
                                  bool arrival_a = true, bool arrival_b = true);

// State packing for the fixture: (phase, qa, qb) <-> index.
int intersection_mdp_state(int capacity, int phase, int qa, int qb);
void intersection_mdp_unpack(int capacity, int index, int& phase, int& qa, int& qb);

}  // namespace tsc::momdp
