#include "tsc/momdp/tabular_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tsc::momdp {

void TabularMdp::validate() const {
  if (n_states <= 0 || n_actions <= 0)
    throw std::invalid_argument("mdp: empty state or action space");
  if (gamma < 0 || gamma >= 1) throw std::invalid_argument("mdp: gamma must be in [0,1)");
  if (transition.size() != static_cast<std::size_t>(n_states) ||
      reward.size() != static_cast<std::size_t>(n_states))
    throw std::invalid_argument("mdp: table shape mismatch");
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double sum = 0;
      for (int s2 = 0; s2 < n_states; ++s2) {
        double v = p(s, a, s2);
        if (v < 0) throw std::invalid_argument("mdp: negative transition probability");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("mdp: transition row does not sum to 1");
    }
  }
}

TabularMdp TabularMdp::zeros(int n_states, int n_actions, double gamma) {
  TabularMdp m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  m.gamma = gamma;
  m.transition.assign(
      static_cast<std::size_t>(n_states),
      std::vector<std::vector<double>>(static_cast<std::size_t>(n_actions),
                                       std::vector<double>(static_cast<std::size_t>(n_states), 0.0)));
  m.reward.assign(static_cast<std::size_t>(n_states),
                  std::vector<double>(static_cast<std::size_t>(n_actions), 0.0));
  return m;
}

ValueIterationResult value_iteration(const TabularMdp& m, double tol) {
  if (tol <= 0) throw std::invalid_argument("tol must be positive");
  ValueIterationResult out;
  out.value.assign(static_cast<std::size_t>(m.n_states), 0.0);
  out.policy.assign(static_cast<std::size_t>(m.n_states), 0);
  double threshold = m.gamma > 0 ? tol * (1.0 - m.gamma) / m.gamma : tol;
  std::vector<double> next(out.value.size(), 0.0);
  for (int iter = 0; iter < 1000000; ++iter) {
    double residual = 0;
    for (int s = 0; s < m.n_states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      int best_a = 0;
      for (int a = 0; a < m.n_actions; ++a) {
        double q = m.r(s, a);
        for (int s2 = 0; s2 < m.n_states; ++s2) {
          double pr = m.p(s, a, s2);
          if (pr > 0) q += m.gamma * pr * out.value[static_cast<std::size_t>(s2)];
        }
        if (q > best + 1e-15) {
          best = q;
          best_a = a;
        }
      }
      next[static_cast<std::size_t>(s)] = best;
      out.policy[static_cast<std::size_t>(s)] = best_a;
      residual = std::max(residual, std::abs(best - out.value[static_cast<std::size_t>(s)]));
    }
    out.value.swap(next);
    out.iterations = iter + 1;
    if (residual < threshold) break;
  }
  return out;
}

std::vector<double> policy_evaluation(const TabularMdp& m,
                                      const std::vector<std::vector<double>>& pi) {
  std::vector<double> v(static_cast<std::size_t>(m.n_states), 0.0);
  std::vector<double> next(v.size(), 0.0);
  for (int iter = 0; iter < 10000000; ++iter) {
    double residual = 0;
    for (int s = 0; s < m.n_states; ++s) {
      double val = 0;
      for (int a = 0; a < m.n_actions; ++a) {
        double w = pi[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
        if (w <= 0) continue;
        double q = m.r(s, a);
        for (int s2 = 0; s2 < m.n_states; ++s2) {
          double pr = m.p(s, a, s2);
          if (pr > 0) q += m.gamma * pr * v[static_cast<std::size_t>(s2)];
        }
        val += w * q;
      }
      next[static_cast<std::size_t>(s)] = val;
      residual = std::max(residual, std::abs(val - v[static_cast<std::size_t>(s)]));
    }
    v.swap(next);
    if (residual < 1e-9) break;
  }
  return v;
}

std::vector<double> policy_evaluation(const TabularMdp& m,
                                      const std::vector<int>& deterministic_pi) {
  std::vector<std::vector<double>> pi(
      static_cast<std::size_t>(m.n_states),
      std::vector<double>(static_cast<std::size_t>(m.n_actions), 0.0));
  for (int s = 0; s < m.n_states; ++s)
    pi[static_cast<std::size_t>(s)][static_cast<std::size_t>(
        deterministic_pi[static_cast<std::size_t>(s)])] = 1.0;
  return policy_evaluation(m, pi);
}

void save_mdp(const TabularMdp& m, std::ostream& os) {
  os << "mdp\n";
  os << "states " << m.n_states << "\n";
  os << "actions " << m.n_actions << "\n";
  os << "gamma " << std::setprecision(17) << m.gamma << "\n";
  os << "rewards\n";
  for (int s = 0; s < m.n_states; ++s) {
    for (int a = 0; a < m.n_actions; ++a)
      os << (a ? " " : "") << std::setprecision(17) << m.r(s, a);
    os << "\n";
  }
  os << "transitions\n";
  for (int s = 0; s < m.n_states; ++s)
    for (int a = 0; a < m.n_actions; ++a) {
      for (int s2 = 0; s2 < m.n_states; ++s2)
        os << (s2 ? " " : "") << std::setprecision(17) << m.p(s, a, s2);
      os << "\n";
    }
}

TabularMdp load_mdp(std::istream& is) {
  std::string tag;
  is >> tag;
  if (tag != "mdp") throw std::runtime_error("not an mdp file");
  int n_states = 0, n_actions = 0;
  double gamma = 0;
  is >> tag >> n_states;
  if (tag != "states") throw std::runtime_error("mdp file: expected 'states'");
  is >> tag >> n_actions;
  if (tag != "actions") throw std::runtime_error("mdp file: expected 'actions'");
  is >> tag >> gamma;
  if (tag != "gamma") throw std::runtime_error("mdp file: expected 'gamma'");
  TabularMdp m = TabularMdp::zeros(n_states, n_actions, gamma);
  is >> tag;
  if (tag != "rewards") throw std::runtime_error("mdp file: expected 'rewards'");
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a)
      is >> m.reward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
  is >> tag;
  if (tag != "transitions") throw std::runtime_error("mdp file: expected 'transitions'");
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a)
      for (int s2 = 0; s2 < n_states; ++s2)
        is >> m.transition[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]
                          [static_cast<std::size_t>(s2)];
  if (!is) throw std::runtime_error("mdp file: truncated");
  m.validate();
  return m;
}

void save_mdp_file(const TabularMdp& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  save_mdp(m, os);
}

TabularMdp load_mdp_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return load_mdp(is);
}

int intersection_mdp_state(int capacity, int phase, int qa, int qb) {
  int n = capacity + 1;
  return (phase * n + qa) * n + qb;
}

void intersection_mdp_unpack(int capacity, int index, int& phase, int& qa, int& qb) {
  int n = capacity + 1;
  qb = index % n;
  index /= n;
  qa = index % n;
  phase = index / n;
}

TabularMdp build_intersection_mdp(int capacity, double gamma, bool arrival_a,
                                  bool arrival_b) {
  int n = capacity + 1;
  TabularMdp m = TabularMdp::zeros(2 * n * n, 2, gamma);
  for (int phase = 0; phase < 2; ++phase)
    for (int qa = 0; qa <= capacity; ++qa)
      for (int qb = 0; qb <= capacity; ++qb) {
        int s = intersection_mdp_state(capacity, phase, qa, qb);
        for (int a = 0; a < 2; ++a) {
          // extend serves one vehicle from the green queue; change serves
          // nothing this step (change interval) and flips the phase
          int na = qa, nb = qb, nphase = phase;
          if (a == 0) {
            if (phase == 0 && na > 0) --na;
            if (phase == 1 && nb > 0) --nb;
          } else {
            nphase = 1 - phase;
          }
          if (arrival_a) na = std::min(capacity, na + 1);
          if (arrival_b) nb = std::min(capacity, nb + 1);
          int s2 = intersection_mdp_state(capacity, nphase, na, nb);
          m.transition[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]
                      [static_cast<std::size_t>(s2)] = 1.0;
          m.reward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] =
              -static_cast<double>(qa + qb);
        }
      }
  m.validate();
  return m;
}

}  // namespace tsc::momdp
