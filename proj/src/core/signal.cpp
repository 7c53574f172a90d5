#include "tsc/core/signal.hpp"

namespace tsc::core {

int next_phase_in_scheme(const NetworkSpec& net, int intersection, int phase) {
  const PhasingScheme& scheme = net.scheme_for(intersection);
  const std::string& current = net.phase(phase).id;
  for (std::size_t k = 0; k < scheme.phase_order.size(); ++k) {
    if (scheme.phase_order[k] == current) {
      const std::string& next =
          scheme.phase_order[(k + 1) % scheme.phase_order.size()];
      return net.phase_index.at(next);
    }
  }
  return net.phase_index.at(scheme.phase_order.front());
}

void advance_signal(SignalState& sig, const NetworkSpec& net, int intersection,
                    const SignalAction& action, double tau) {
  const PhasingScheme& scheme = net.scheme_for(intersection);

  // mode_left_s counts the remaining change-interval time including the
  // current step; exhausted intervals roll over before the step is served
  if (sig.mode != InterlockMode::Green) {
    if (sig.mode_left_s <= 1e-9) {
      if (sig.mode == InterlockMode::Yellow && scheme.all_red_s > 0) {
        sig.mode = InterlockMode::AllRed;
        sig.mode_left_s = scheme.all_red_s;
      } else {
        sig.mode = InterlockMode::Green;
        sig.phase = sig.pending_phase;
        sig.pending_phase = -1;
        sig.elapsed_s = 0.0;
        // fresh green: fall through to action handling below so the first
        // green step counts toward elapsed time on Extend
      }
    }
    if (sig.mode != InterlockMode::Green) {
      sig.mode_left_s -= tau;
      return;
    }
  }

  bool want_change = false;
  int target = -1;
  switch (action.kind) {
    case SignalAction::Kind::Extend:
      break;
    case SignalAction::Kind::Change:
      want_change = true;
      target = next_phase_in_scheme(net, intersection, sig.phase);
      break;
    case SignalAction::Kind::TargetPhase: {
      auto it = net.phase_index.find(action.target_phase);
      if (it == net.phase_index.end())
        throw UnknownPhase("unknown target phase: " + action.target_phase);
      bool in_scheme = false;
      for (const auto& pid : scheme.phase_order)
        if (pid == action.target_phase) in_scheme = true;
      if (!in_scheme)
        throw UnknownPhase("phase " + action.target_phase +
                           " not in scheme for intersection " +
                           net.intersections[static_cast<std::size_t>(intersection)]);
      if (it->second != sig.phase) {
        want_change = true;
        target = it->second;
      }
      break;
    }
    case SignalAction::Kind::Plan:
      // plan-mode intersections are driven directly from the plan; a stray
      // Plan action on an interlocked signal acts as Extend
      break;
  }

  if (sig.elapsed_s + 1e-9 < scheme.min_green_s) want_change = false;  // clamp
  if (!want_change && sig.elapsed_s + 1e-9 >= scheme.max_green_s) {
    want_change = true;  // forced max-out, scheme order
    target = next_phase_in_scheme(net, intersection, sig.phase);
  }

  if (!want_change) {
    sig.elapsed_s += tau;
    return;
  }

  sig.pending_phase = target;
  if (scheme.yellow_s > 0) {
    sig.mode = InterlockMode::Yellow;
    sig.mode_left_s = scheme.yellow_s - tau;
  } else if (scheme.all_red_s > 0) {
    sig.mode = InterlockMode::AllRed;
    sig.mode_left_s = scheme.all_red_s - tau;
  } else {
    // zero change interval: switch immediately, current step already green
    // on the new phase
    sig.phase = target;
    sig.pending_phase = -1;
    sig.elapsed_s = tau;
  }
}

}  // namespace tsc::core
