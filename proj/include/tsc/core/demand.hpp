#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsc/rng.hpp"

namespace tsc::core {

// Piecewise-constant arrival rate: rate of segment k applies from
// start_step[k] until the next segment begins.
struct RateSchedule {
  std::vector<long> start_steps;
  std::vector<double> rates;  // veh/s

  double rate_at(long t) const {
    double r = rates.empty() ? 0.0 : rates.front();
    for (std::size_t k = 0; k < start_steps.size(); ++k)
      if (t >= start_steps[k]) r = rates[k];
    return r;
  }
};

// Hidden-regime arrival process: a Markov chain over K regimes, each with
// its own arrival rate. Realizes the unmodeled outer system as a generator.
struct RegimeProcess {
  std::vector<double> rates;                        // per regime, veh/s
  std::vector<std::vector<double>> transition;      // K x K row-stochastic
  int initial_regime = 0;
};

struct EntryDemand {
  std::string link;
  bool is_regime = false;
  RateSchedule schedule;
  RegimeProcess regime;
};

class DemandProfile {
 public:
  DemandProfile() = default;

  void add_schedule(const std::string& link, RateSchedule s) {
    validate_rates(s.rates);
    EntryDemand d;
    d.link = link;
    d.schedule = std::move(s);
    entries_.push_back(std::move(d));
  }

  void add_regime(const std::string& link, RegimeProcess p) {
    validate_rates(p.rates);
    for (const auto& row : p.transition) {
      double sum = 0;
      for (double v : row) {
        if (v < 0) throw std::invalid_argument("negative regime transition probability");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("regime transition row must sum to 1");
    }
    if (p.transition.size() != p.rates.size())
      throw std::invalid_argument("regime transition matrix shape mismatch");
    EntryDemand d;
    d.link = link;
    d.is_regime = true;
    d.regime = std::move(p);
    entries_.push_back(std::move(d));
  }

  const std::vector<EntryDemand>& entries() const { return entries_; }

  // Expected arrivals per step for a schedule entry; used by the
  // certainty-equivalent forecaster and the fractional simulator mode.
  double expected_rate(const std::string& link, long t) const {
    for (const auto& e : entries_)
      if (e.link == link) {
        if (e.is_regime) {
          // long-run expectation unavailable without the hidden regime;
          // callers with a belief should use the belief instead
          double sum = 0;
          for (double r : e.regime.rates) sum += r;
          return e.regime.rates.empty() ? 0.0 : sum / static_cast<double>(e.regime.rates.size());
        }
        return e.schedule.rate_at(t);
      }
    return 0.0;
  }

 private:
  static void validate_rates(const std::vector<double>& rates) {
    for (double r : rates)
      if (r < 0) throw std::invalid_argument("negative arrival rate");
  }

  std::vector<EntryDemand> entries_;
};

// Mutable per-episode state of the demand process (hidden regimes).
struct DemandState {
  std::map<std::string, int> regime;  // entry link -> current regime

  void reset(const DemandProfile& profile) {
    regime.clear();
    for (const auto& e : profile.entries())
      if (e.is_regime) regime[e.link] = e.regime.initial_regime;
  }
};

// Draws one step of boundary arrivals. Regime entries first advance their
// hidden Markov chain, then draw from the active regime's rate.
inline std::map<std::string, int> sample_arrivals(const DemandProfile& profile,
                                                  DemandState& state, long t,
                                                  double tau, Rng& rng) {
  std::map<std::string, int> counts;
  for (const auto& e : profile.entries()) {
    double rate;
    if (e.is_regime) {
      int& reg = state.regime[e.link];
      double u = rng.next_double();
      double acc = 0;
      const auto& row = e.regime.transition[static_cast<std::size_t>(reg)];
      for (std::size_t k = 0; k < row.size(); ++k) {
        acc += row[k];
        if (u < acc) {
          reg = static_cast<int>(k);
          break;
        }
      }
      rate = e.regime.rates[static_cast<std::size_t>(reg)];
    } else {
      rate = e.schedule.rate_at(t);
    }
    counts[e.link] += rate > 0 ? rng.next_poisson(rate * tau) : 0;
  }
  return counts;
}

}  // namespace tsc::core
