#include "tsc/rl/reinforce.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace tsc::rl {

std::vector<double> SoftmaxPolicy::probabilities(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != n_features)
    throw std::invalid_argument("feature vector size mismatch");
  std::vector<double> logits(static_cast<std::size_t>(n_actions), 0.0);
  for (int a = 0; a < n_actions; ++a)
    for (int f = 0; f < n_features; ++f)
      logits[static_cast<std::size_t>(a)] += weight(a, f) * x[static_cast<std::size_t>(f)];
  double m = *std::max_element(logits.begin(), logits.end());
  double z = 0;
  for (double& l : logits) {
    l = std::exp(l - m);
    z += l;
  }
  for (double& l : logits) l /= z;
  return logits;
}

int SoftmaxPolicy::sample(const std::vector<double>& x, Rng& rng) const {
  std::vector<double> p = probabilities(x);
  double u = rng.next_double();
  double acc = 0;
  for (int a = 0; a < n_actions; ++a) {
    acc += p[static_cast<std::size_t>(a)];
    if (u < acc) return a;
  }
  return n_actions - 1;
}

std::vector<double> SoftmaxPolicy::grad_log_pi(const std::vector<double>& x,
                                               int action) const {
  std::vector<double> p = probabilities(x);
  std::vector<double> g(theta.size(), 0.0);
  for (int a = 0; a < n_actions; ++a) {
    double coeff = (a == action ? 1.0 : 0.0) - p[static_cast<std::size_t>(a)];
    for (int f = 0; f < n_features; ++f)
      g[static_cast<std::size_t>(a) * static_cast<std::size_t>(n_features) +
        static_cast<std::size_t>(f)] = coeff * x[static_cast<std::size_t>(f)];
  }
  return g;
}

std::vector<double> reinforce_gradient(const std::vector<Trajectory>& trajectories,
                                       const SoftmaxPolicy& pi) {
  if (trajectories.empty()) throw std::invalid_argument("need at least one trajectory");
  std::vector<double> g(pi.theta.size(), 0.0);
  for (const auto& traj : trajectories) {
    double R = traj.total_return();
    if (R == 0) continue;
    for (const auto& step : traj.steps) {
      std::vector<double> s = pi.grad_log_pi(step.features, step.action);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += R * s[i];
    }
  }
  double n = static_cast<double>(trajectories.size());
  for (double& v : g) v /= n;
  return g;
}

void reinforce_update(SoftmaxPolicy& pi, const std::vector<double>& gradient,
                      double learning_rate) {
  if (learning_rate <= 0) throw std::invalid_argument("learning rate must be positive");
  if (gradient.size() != pi.theta.size())
    throw std::invalid_argument("gradient size mismatch");
  for (std::size_t i = 0; i < pi.theta.size(); ++i)
    pi.theta[i] += learning_rate * gradient[i];
}

std::vector<double> one_hot(int index, int size) {
  std::vector<double> x(static_cast<std::size_t>(size), 0.0);
  x[static_cast<std::size_t>(index)] = 1.0;
  return x;
}

namespace {

// Recursively walks every (action, next state) branch, accumulating the
// trajectory probability, return and summed score function.
template <typename Visit>
void enumerate(const momdp::TabularMdp& m, const SoftmaxPolicy& pi, int s, int depth,
               int horizon, double prob, double ret, std::vector<double>& score,
               Visit&& visit) {
  if (depth == horizon) {
    visit(prob, ret, score);
    return;
  }
  std::vector<double> x = one_hot(s, m.n_states);
  std::vector<double> p = pi.probabilities(x);
  for (int a = 0; a < m.n_actions; ++a) {
    double pa = p[static_cast<std::size_t>(a)];
    if (pa <= 0) continue;
    std::vector<double> g = pi.grad_log_pi(x, a);
    for (std::size_t i = 0; i < score.size(); ++i) score[i] += g[i];
    for (int s2 = 0; s2 < m.n_states; ++s2) {
      double ps = m.p(s, a, s2);
      if (ps <= 0) continue;
      enumerate(m, pi, s2, depth + 1, horizon, prob * pa * ps, ret + m.r(s, a), score,
                visit);
    }
    for (std::size_t i = 0; i < score.size(); ++i) score[i] -= g[i];
  }
}

}  // namespace

double exact_return(const momdp::TabularMdp& m, const SoftmaxPolicy& pi,
                    int start_state, int horizon) {
  double J = 0;
  std::vector<double> score(pi.theta.size(), 0.0);
  enumerate(m, pi, start_state, 0, horizon, 1.0, 0.0, score,
            [&](double prob, double ret, const std::vector<double>&) { J += prob * ret; });
  return J;
}

std::vector<double> exact_gradient(const momdp::TabularMdp& m, const SoftmaxPolicy& pi,
                                   int start_state, int horizon) {
  std::vector<double> g(pi.theta.size(), 0.0);
  std::vector<double> score(pi.theta.size(), 0.0);
  enumerate(m, pi, start_state, 0, horizon, 1.0, 0.0, score,
            [&](double prob, double ret, const std::vector<double>& sc) {
              for (std::size_t i = 0; i < g.size(); ++i) g[i] += prob * ret * sc[i];
            });
  return g;
}

void save_policy(const SoftmaxPolicy& pi, std::ostream& os) {
  os << "softmax_policy\n";
  os << "features " << pi.n_features << "\n";
  os << "actions " << pi.n_actions << "\n";
  os << std::setprecision(17);
  for (double t : pi.theta) os << t << "\n";
}

SoftmaxPolicy load_policy(std::istream& is) {
  std::string tag;
  is >> tag;
  if (tag != "softmax_policy") throw std::runtime_error("bad checkpoint header");
  int features = 0, actions = 0;
  is >> tag >> features >> tag >> actions;
  SoftmaxPolicy pi(features, actions);
  for (double& t : pi.theta) is >> t;
  if (!is) throw std::runtime_error("truncated checkpoint");
  return pi;
}

}  // namespace tsc::rl
