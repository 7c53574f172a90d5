#include "tsc/rl/qlearn.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace tsc::rl {

namespace {
const std::vector<double>& zero_row(int n) {
  static std::map<int, std::vector<double>> cache;
  auto it = cache.find(n);
  if (it == cache.end())
    it = cache.emplace(n, std::vector<double>(static_cast<std::size_t>(n), 0.0)).first;
  return it->second;
}
}  // namespace

const std::vector<double>& QTable::row(const std::string& key) const {
  auto it = q.find(key);
  return it == q.end() ? zero_row(n_actions) : it->second;
}

double QTable::value(const std::string& key, int action) const {
  return row(key)[static_cast<std::size_t>(action)];
}

double QTable::max_value(const std::string& key) const {
  const auto& r = row(key);
  return *std::max_element(r.begin(), r.end());
}

int QTable::greedy_action(const std::string& key) const {
  const auto& r = row(key);
  int best = 0;
  for (int a = 1; a < n_actions; ++a)
    if (r[static_cast<std::size_t>(a)] > r[static_cast<std::size_t>(best)]) best = a;
  return best;
}

double QTable::alpha_for(const std::string& key, int action) const {
  if (fixed_alpha > 0) return fixed_alpha;
  auto it = visits.find(key);
  long n = it == visits.end() ? 0 : it->second[static_cast<std::size_t>(action)];
  return 1.0 / (1.0 + static_cast<double>(n));
}

void q_update(QTable& t, const std::string& s, int action, double reward,
              const std::string& s_next, double alpha, bool terminal) {
  if (alpha < 0 || alpha > 1) throw std::invalid_argument("alpha must be in [0,1]");
  auto& r = t.q.try_emplace(s, static_cast<std::size_t>(t.n_actions), 0.0).first->second;
  auto& v = t.visits.try_emplace(s, static_cast<std::size_t>(t.n_actions), 0L).first->second;
  double bootstrap = terminal ? 0.0 : t.max_value(s_next);
  double& qa = r[static_cast<std::size_t>(action)];
  qa += alpha * (reward + t.gamma * bootstrap - qa);
  v[static_cast<std::size_t>(action)] += 1;
}

int epsilon_greedy(const QTable& t, const std::string& key, double epsilon, Rng& rng) {
  if (epsilon < 0 || epsilon > 1) throw std::invalid_argument("epsilon must be in [0,1]");
  if (epsilon > 0 && rng.next_double() < epsilon)
    return static_cast<int>(rng.next_below(static_cast<std::uint64_t>(t.n_actions)));
  return t.greedy_action(key);
}

namespace {
long bin_of(double value, double width) {
  if (width <= 0) throw std::invalid_argument("bin width must be positive");
  return static_cast<long>(std::floor(std::max(0.0, value) / width));
}

void append_features(std::ostringstream& os, const momdp::IntersectionFeatures& f,
                     double bin_width, int progress_bins) {
  os << '|' << f.phase;
  int pb = std::min(progress_bins - 1,
                    static_cast<int>(f.phase_progress * progress_bins));
  os << ':' << pb;
  for (double q : f.link_queues) os << ':' << bin_of(q, bin_width);
}
}  // namespace

std::string state_key(const momdp::FactoredState& fs, double bin_width,
                      int progress_bins) {
  std::ostringstream os;
  os << momdp::to_string(fs.level);
  append_features(os, fs.controlled, bin_width, progress_bins);
  if (fs.level == momdp::DesignLevel::L2) {
    os << "|d";
    for (double d : fs.demand_reading) os << ':' << bin_of(d, bin_width);
  }
  if (fs.level == momdp::DesignLevel::L3 || fs.level == momdp::DesignLevel::L4)
    for (const auto& n : fs.neighbors) append_features(os, n, bin_width, progress_bins);
  if (fs.level == momdp::DesignLevel::L4)
    os << "|b" << (fs.demand_belief ? fs.demand_belief->argmax_regime() : -1);
  return os.str();
}

void save_qtable(const QTable& t, std::ostream& os) {
  os << "qtable\n";
  os << "actions " << t.n_actions << "\n";
  os << "gamma " << std::setprecision(17) << t.gamma << "\n";
  os << "entries " << t.q.size() << "\n";
  for (const auto& [key, r] : t.q) {
    os << key;
    const auto& v = t.visits.at(key);
    for (int a = 0; a < t.n_actions; ++a)
      os << ' ' << r[static_cast<std::size_t>(a)] << ' '
         << v[static_cast<std::size_t>(a)];
    os << "\n";
  }
}

QTable load_qtable(std::istream& is) {
  std::string tag;
  is >> tag;
  if (tag != "qtable") throw std::runtime_error("bad checkpoint header");
  QTable t;
  std::size_t entries = 0;
  is >> tag >> t.n_actions >> tag >> t.gamma >> tag >> entries;
  for (std::size_t i = 0; i < entries; ++i) {
    std::string key;
    is >> key;
    std::vector<double> r(static_cast<std::size_t>(t.n_actions));
    std::vector<long> v(static_cast<std::size_t>(t.n_actions));
    for (int a = 0; a < t.n_actions; ++a)
      is >> r[static_cast<std::size_t>(a)] >> v[static_cast<std::size_t>(a)];
    t.q.emplace(key, std::move(r));
    t.visits.emplace(key, std::move(v));
  }
  if (!is) throw std::runtime_error("truncated checkpoint");
  return t;
}

RewardMode reward_mode_from_string(const std::string& s) {
  if (s == "queue") return RewardMode::Queue;
  if (s == "delay") return RewardMode::Delay;
  if (s == "delay_difference") return RewardMode::DelayDifference;
  if (s == "cost") return RewardMode::Cost;
  throw std::invalid_argument("unknown reward mode: " + s);
}

const char* to_string(RewardMode m) {
  switch (m) {
    case RewardMode::Queue: return "queue";
    case RewardMode::Delay: return "delay";
    case RewardMode::DelayDifference: return "delay_difference";
    default: return "cost";
  }
}

namespace {
double step_reward(const metrics::StepMetrics& m, RewardMode mode) {
  switch (mode) {
    case RewardMode::Queue: return -m.queue_length;
    case RewardMode::Delay: return -m.cumulative_delay;
    case RewardMode::DelayDifference: return -m.delay_difference;
    default: return -m.cost;
  }
}
}  // namespace

QTrainResult q_learning_train(const core::Simulator& sim, const QTrainConfig& cfg) {
  const core::NetworkSpec& net = sim.network();
  std::size_t n_ints = net.intersections.size();
  QTrainResult out;
  out.tables.assign(n_ints, QTable{});
  for (auto& t : out.tables) t.gamma = cfg.gamma;

  for (long ep = 0; ep < cfg.episodes; ++ep) {
    double epsilon =
        std::max(cfg.epsilon_floor, std::pow(cfg.epsilon_decay, static_cast<double>(ep)));
    core::SimState s = sim.initial_state();
    s.rng = Rng::derive(cfg.seed, "episode", static_cast<std::uint64_t>(ep));
    Rng explore = Rng::derive(cfg.seed, "explore", static_cast<std::uint64_t>(ep));

    std::vector<std::string> keys(n_ints);
    std::vector<double> prev_cd(n_ints, 0.0);
    for (std::size_t i = 0; i < n_ints; ++i) {
      momdp::BoundaryConfig bc{net.intersections[i], cfg.level, 1};
      keys[i] = state_key(momdp::observe(s, net, bc), cfg.bin_width);
    }

    double ep_return = 0;
    for (long t = 0; t < sim.config().horizon; ++t) {
      std::vector<int> chosen(n_ints, 0);
      std::vector<core::SignalAction> actions(n_ints);
      for (std::size_t i = 0; i < n_ints; ++i) {
        chosen[i] = epsilon_greedy(out.tables[i], keys[i], epsilon, explore);
        actions[i] = chosen[i] == 0 ? core::SignalAction::extend()
                                    : core::SignalAction::change();
      }
      sim.step(s, actions);
      for (std::size_t i = 0; i < n_ints; ++i) {
        metrics::StepMetrics m = metrics::intersection_step_metrics(
            s, net, static_cast<int>(i), prev_cd[i], cfg.coeffs, sim.config().tau);
        prev_cd[i] = m.cumulative_delay;
        double r = step_reward(m, cfg.reward);
        ep_return += r;
        momdp::BoundaryConfig bc{net.intersections[i], cfg.level, 1};
        std::string next = state_key(momdp::observe(s, net, bc), cfg.bin_width);
        double alpha = out.tables[i].alpha_for(keys[i], chosen[i]);
        // continuing-task treatment: bootstrap stays on at the horizon cut
        q_update(out.tables[i], keys[i], chosen[i], r, next, alpha, false);
        keys[i] = std::move(next);
      }
    }

    double alpha_sum = 0;
    long alpha_n = 0;
    for (const auto& table : out.tables)
      for (const auto& [key, v] : table.visits)
        for (long n : v) {
          alpha_sum += 1.0 / (1.0 + static_cast<double>(n));
          ++alpha_n;
        }
    out.curve.push_back({ep, ep_return, epsilon,
                         alpha_n ? alpha_sum / static_cast<double>(alpha_n) : 1.0});
  }
  return out;
}

QTable q_learning_train_mdp(const momdp::TabularMdp& m, const MdpTrainConfig& cfg) {
  QTable t;
  t.n_actions = m.n_actions;
  t.gamma = m.gamma;
  t.fixed_alpha = cfg.fixed_alpha;
  auto key_of = [](int s) { return std::to_string(s); };

  Rng rng = Rng::derive(cfg.seed, "mdp-train");
  for (long ep = 0; ep < cfg.episodes; ++ep) {
    double epsilon =
        std::max(cfg.epsilon_floor, std::pow(cfg.epsilon_decay, static_cast<double>(ep)));
    int s = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(m.n_states)));
    for (long step = 0; step < cfg.steps_per_episode; ++step) {
      std::string sk = key_of(s);
      int a = epsilon_greedy(t, sk, epsilon, rng);
      // sample s' from the transition row
      double u = rng.next_double();
      int s2 = m.n_states - 1;
      double acc = 0;
      for (int j = 0; j < m.n_states; ++j) {
        acc += m.p(s, a, j);
        if (u < acc) {
          s2 = j;
          break;
        }
      }
      double alpha = t.alpha_for(sk, a);
      q_update(t, sk, a, m.r(s, a), key_of(s2), alpha, false);
      s = s2;
    }
  }
  return t;
}

void write_learning_curve_csv(const std::vector<LearningCurvePoint>& curve,
                              std::ostream& os) {
  os << "episode,return,epsilon,alpha_mean\n";
  for (const auto& p : curve)
    os << p.episode << ',' << p.total_return << ',' << p.epsilon << ','
       << p.alpha_mean << '\n';
}

}  // namespace tsc::rl
