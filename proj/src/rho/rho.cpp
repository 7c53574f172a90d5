#include "tsc/rho/rho.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace tsc::rho {

Forecast forecast_from_string(const std::string& s) {
  if (s == "oracle") return Forecast::Oracle;
  if (s == "belief") return Forecast::Belief;
  if (s == "flat") return Forecast::Flat;
  throw std::invalid_argument("unknown forecast mode: " + s);
}

const char* to_string(Forecast f) {
  switch (f) {
    case Forecast::Oracle: return "oracle";
    case Forecast::Belief: return "belief";
    default: return "flat";
  }
}

Objective objective_from_string(const std::string& s) {
  if (s == "queue") return Objective::Queue;
  if (s == "delay") return Objective::Delay;
  if (s == "delay_difference") return Objective::DelayDifference;
  if (s == "cost") return Objective::Cost;
  throw std::invalid_argument("unknown objective: " + s);
}

const char* to_string(Objective o) {
  switch (o) {
    case Objective::Queue: return "queue";
    case Objective::Delay: return "delay";
    case Objective::DelayDifference: return "delay_difference";
    default: return "cost";
  }
}

std::vector<std::map<std::string, double>> forecast_exogenous(
    const RhoConfig& cfg, const core::Simulator& model, long t,
    const std::map<std::string, int>& last_observed,
    const std::map<std::string, momdp::DemandBelief>* beliefs) {
  double tau = model.config().tau;
  std::vector<std::map<std::string, double>> exo(
      static_cast<std::size_t>(cfg.horizon_steps));
  for (const auto& e : model.demand().entries()) {
    switch (cfg.forecast) {
      case Forecast::Oracle:
        for (int k = 0; k < cfg.horizon_steps; ++k)
          exo[static_cast<std::size_t>(k)][e.link] =
              model.demand().expected_rate(e.link, t + k) * tau;
        break;
      case Forecast::Belief: {
        if (!beliefs || !beliefs->count(e.link)) {
          // scheduled entries have a known future; only hidden-regime
          // entries genuinely need a belief
          if (!e.is_regime) {
            for (int k = 0; k < cfg.horizon_steps; ++k)
              exo[static_cast<std::size_t>(k)][e.link] =
                  model.demand().expected_rate(e.link, t + k) * tau;
            break;
          }
          throw MissingBelief("belief forecast needs a demand belief for link " + e.link);
        }
        momdp::DemandBelief b = beliefs->at(e.link);
        for (int k = 0; k < cfg.horizon_steps; ++k) {
          // propagate one step through the regime chain, then take the mean
          std::vector<double> next(b.regimes(), 0.0);
          for (std::size_t j = 0; j < b.regimes(); ++j)
            for (std::size_t i = 0; i < b.regimes(); ++i)
              next[j] += b.probabilities[i] * b.transition[i][j];
          b.probabilities = std::move(next);
          exo[static_cast<std::size_t>(k)][e.link] = b.expected_rate() * tau;
        }
        break;
      }
      case Forecast::Flat: {
        auto it = last_observed.find(e.link);
        double d = it == last_observed.end() ? 0.0 : static_cast<double>(it->second);
        for (int k = 0; k < cfg.horizon_steps; ++k)
          exo[static_cast<std::size_t>(k)][e.link] = d;
        break;
      }
    }
  }
  return exo;
}

namespace {

std::vector<core::SignalAction> network_actions(const core::NetworkSpec& net,
                                                int intersection,
                                                const core::SignalAction& a) {
  std::vector<core::SignalAction> acts(net.intersections.size(),
                                       core::SignalAction::extend());
  acts[static_cast<std::size_t>(intersection)] = a;
  return acts;
}

double step_value(const core::SimState& s, const core::Simulator& model,
                  const RhoConfig& cfg, double& prev_cd) {
  metrics::StepMetrics m = metrics::intersection_step_metrics(
      s, model.network(), cfg.intersection, prev_cd, cfg.coeffs,
      model.config().tau);
  prev_cd = m.cumulative_delay;
  switch (cfg.objective) {
    case Objective::Queue: return -m.queue_length;
    case Objective::Delay: return -m.cumulative_delay;
    case Objective::DelayDifference: return -m.delay_difference;
    default: return -m.cost;
  }
}

// Feasible controller actions in the current interlock position. During a
// change interval only Extend (a no-op) is legal; at max green the change is
// forced; below min green only Extend.
std::vector<core::SignalAction> feasible_actions(const core::SimState& s,
                                                 const core::NetworkSpec& net,
                                                 int intersection) {
  const core::SignalState& sig = s.signals[static_cast<std::size_t>(intersection)];
  if (sig.mode != core::InterlockMode::Green) return {core::SignalAction::extend()};
  const core::PhasingScheme& scheme = net.scheme_for(intersection);
  if (sig.elapsed_s >= scheme.max_green_s) return {core::SignalAction::change()};
  if (sig.elapsed_s < scheme.min_green_s) return {core::SignalAction::extend()};
  return {core::SignalAction::extend(), core::SignalAction::change()};
}

std::string state_fingerprint(const core::SimState& s, double prev_cd) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << s.clock << '#' << prev_cd;
  for (const auto& sig : s.signals)
    os << '|' << sig.phase << ',' << static_cast<int>(sig.mode) << ','
       << sig.elapsed_s << ',' << sig.mode_left_s << ',' << sig.pending_phase;
  for (const auto& l : s.links) {
    os << "|L";
    for (double q : l.queue_counts) os << ',' << q;
    for (double c : l.discharge_credit) os << ';' << c;
    os << '!' << l.backlog;
    for (const auto& b : l.transit) os << '@' << b.arrive_step << ':' << b.count;
  }
  return os.str();
}

struct SearchNode {
  double value = -std::numeric_limits<double>::infinity();
  std::vector<core::SignalAction> actions;
};

struct Search {
  const core::Simulator& model;
  const std::vector<std::map<std::string, double>>& exo;
  const RhoConfig& cfg;
  std::unordered_map<std::string, SearchNode> memo;

  SearchNode run(const core::SimState& s, int depth, double prev_cd) {
    if (depth == cfg.horizon_steps) return {0.0, {}};
    std::string key = state_fingerprint(s, prev_cd);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;

    SearchNode best;
    for (const core::SignalAction& a :
         feasible_actions(s, model.network(), cfg.intersection)) {
      core::SimState next = s;
      double cd = prev_cd;
      model.step(next, network_actions(model.network(), cfg.intersection, a),
                 &exo[static_cast<std::size_t>(depth)]);
      double r = step_value(next, model, cfg, cd);
      SearchNode sub = run(next, depth + 1, cd);
      double total = r + sub.value;
      // strict > keeps the first (Extend) branch on ties
      if (total > best.value) {
        best.value = total;
        best.actions.clear();
        best.actions.push_back(a);
        best.actions.insert(best.actions.end(), sub.actions.begin(), sub.actions.end());
      }
    }
    memo.emplace(std::move(key), best);
    return best;
  }
};

}  // namespace

std::vector<core::SimState> rollout(const core::Simulator& model,
                                    const core::SimState& start,
                                    const std::vector<core::SignalAction>& actions,
                                    const std::vector<std::map<std::string, double>>& exo,
                                    int intersection) {
  if (actions.size() != exo.size())
    throw InfeasibleSequence("action and forecast lengths differ");
  std::vector<core::SimState> out;
  core::SimState s = start;
  for (std::size_t k = 0; k < actions.size(); ++k) {
    const core::SignalState& sig = s.signals[static_cast<std::size_t>(intersection)];
    if (sig.mode == core::InterlockMode::Green &&
        actions[k].kind == core::SignalAction::Kind::Change) {
      const core::PhasingScheme& scheme = model.network().scheme_for(intersection);
      if (sig.elapsed_s < scheme.min_green_s)
        throw InfeasibleSequence("change before min green in the planned sequence");
    }
    model.step(s, network_actions(model.network(), intersection, actions[k]), &exo[k]);
    out.push_back(s);
  }
  return out;
}

HorizonSolution optimize_horizon(const core::Simulator& model,
                                 const core::SimState& start,
                                 const std::vector<std::map<std::string, double>>& exo,
                                 const RhoConfig& cfg) {
  if (cfg.horizon_steps < 1) throw std::invalid_argument("horizon must be >= 1");
  if (static_cast<int>(exo.size()) != cfg.horizon_steps)
    throw std::invalid_argument("forecast length must equal the horizon");
  Search search{model, exo, cfg, {}};
  SearchNode best = search.run(start, 0, 0.0);
  HorizonSolution sol;
  sol.actions = best.actions;
  sol.objective = best.value;
  sol.predicted = rollout(model, start, sol.actions, exo, cfg.intersection);
  return sol;
}

core::SignalAction mpc_step(const core::Simulator& model, const core::SimState& observed,
                            long t, const RhoConfig& cfg,
                            const std::map<std::string, int>& last_observed,
                            const std::map<std::string, momdp::DemandBelief>* beliefs,
                            DecisionTrace* trace) {
  auto exo = forecast_exogenous(cfg, model, t, last_observed, beliefs);
  HorizonSolution sol = optimize_horizon(model, observed, exo, cfg);
  if (trace) {
    trace->t = t;
    trace->forecast = exo;
    trace->plan = sol.actions;
    trace->predicted_objective = sol.objective;
  }
  return sol.actions.front();
}

void write_trace_line(const DecisionTrace& trace, double realized_objective,
                      std::ostream& os) {
  nlohmann::json j;
  j["t"] = trace.t;
  nlohmann::json exo = nlohmann::json::array();
  for (const auto& step : trace.forecast) {
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [link, v] : step) m[link] = v;
    exo.push_back(m);
  }
  j["forecast"] = exo;
  nlohmann::json plan = nlohmann::json::array();
  for (const auto& a : trace.plan)
    plan.push_back(a.kind == core::SignalAction::Kind::Change ? "change" : "extend");
  j["plan"] = plan;
  j["predicted_objective"] = trace.predicted_objective;
  j["realized_objective"] = realized_objective;
  os << j.dump() << "\n";
}

}  // namespace tsc::rho
