#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsc/core/network.hpp"

namespace tsc::core {

struct UnknownPhase : std::runtime_error {
  explicit UnknownPhase(const std::string& what) : std::runtime_error(what) {}
};

enum class InterlockMode { Green, Yellow, AllRed };

inline const char* to_string(InterlockMode m) {
  switch (m) {
    case InterlockMode::Green: return "green";
    case InterlockMode::Yellow: return "yellow";
    default: return "all_red";
  }
}

// Cycle plan: ordered phases with green splits; yellow + all-red change
// intervals sit at the end of each split. Greens plus change intervals must
// sum to the cycle length.
struct CyclePlan {
  std::vector<std::string> phases;
  std::vector<double> splits_s;  // green seconds per phase
  double yellow_s = 0.0;
  double all_red_s = 0.0;
  double cycle_s = 0.0;
  double offset_s = 0.0;

  double change_interval() const { return yellow_s + all_red_s; }

  void validate() const {
    if (phases.size() != splits_s.size())
      throw std::invalid_argument("cycle plan: phases/splits size mismatch");
    double total = 0;
    for (double s : splits_s) total += s + change_interval();
    if (std::abs(total - cycle_s) > 1e-9)
      throw std::invalid_argument("cycle plan: splits + change intervals must sum to cycle");
    if (offset_s < 0 || offset_s >= cycle_s)
      throw std::invalid_argument("cycle plan: offset out of [0, cycle)");
  }
};

struct SignalAction {
  enum class Kind { Extend, Change, TargetPhase, Plan };
  Kind kind = Kind::Extend;
  std::string target_phase;  // for TargetPhase
  CyclePlan plan;            // for Plan

  static SignalAction extend() { return {}; }
  static SignalAction change() { return {Kind::Change, {}, {}}; }
  static SignalAction target(std::string phase) {
    return {Kind::TargetPhase, std::move(phase), {}};
  }
};

// Per-intersection interlock state. Transitions follow
// green -> yellow -> all-red -> green only.
struct SignalState {
  int phase = -1;  // phase index in NetworkSpec
  InterlockMode mode = InterlockMode::Green;
  double elapsed_s = 0.0;    // time in green so far
  double mode_left_s = 0.0;  // remaining yellow/all-red time
  int pending_phase = -1;
};

// Returns the phase of `plan` active at wall time t_s, mode Green during the
// split window and Yellow/AllRed during the trailing change interval.
struct PlanPosition {
  int slot = 0;  // index into plan.phases
  InterlockMode mode = InterlockMode::Green;
};

inline PlanPosition apply_cycle_plan(const CyclePlan& plan, double t_s) {
  double x = std::fmod(t_s - plan.offset_s, plan.cycle_s);
  if (x < 0) x += plan.cycle_s;
  for (std::size_t k = 0; k < plan.phases.size(); ++k) {
    double g = plan.splits_s[k];
    if (x < g) return {static_cast<int>(k), InterlockMode::Green};
    x -= g;
    if (x < plan.yellow_s) return {static_cast<int>(k), InterlockMode::Yellow};
    x -= plan.yellow_s;
    if (x < plan.all_red_s) return {static_cast<int>(k), InterlockMode::AllRed};
    x -= plan.all_red_s;
  }
  return {static_cast<int>(plan.phases.size()) - 1, InterlockMode::AllRed};
}

// Advances one intersection's interlock by one step of length tau.
// Semantics: Extend keeps the green and accrues elapsed time; Change (or a
// different target phase) at elapsed >= min green starts the yellow/all-red
// sequence; Change below min green is clamped to Extend; Extend at
// elapsed >= max green is overridden to a forced Change to the next phase in
// scheme order.
void advance_signal(SignalState& sig, const NetworkSpec& net, int intersection,
                    const SignalAction& action, double tau);

// Next phase in the scheme's service order after `phase`.
int next_phase_in_scheme(const NetworkSpec& net, int intersection, int phase);

}  // namespace tsc::core
