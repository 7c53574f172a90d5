#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tsc::core {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct Link {
  std::string id;
  std::string from_node;
  std::string to_node;
  double length_m = 100.0;
  double free_flow_speed = 15.0;   // v*, m/s
  double saturation_rate = 0.5;    // veh/s
  double storage_capacity = 40.0;  // veh
};

// A movement connects an incoming link to an outgoing link, or to a sink
// when out_link is empty.
struct Movement {
  std::string id;
  std::string in_link;
  std::string out_link;  // empty -> sink
  bool is_sink() const { return out_link.empty(); }
};

struct Phase {
  std::string id;
  std::vector<std::string> movements;
};

struct PhasingScheme {
  std::string intersection;
  std::vector<std::string> phase_order;  // default service order
  double yellow_s = 3.0;
  double all_red_s = 2.0;
  double min_green_s = 5.0;
  double max_green_s = 60.0;
};

struct NetworkSpec {
  std::vector<std::string> intersections;
  std::vector<Link> links;
  std::vector<Movement> movements;
  std::vector<Phase> phases;
  std::vector<PhasingScheme> schemes;  // one per intersection
  std::vector<std::string> entry_links;
  std::vector<std::string> exit_links;
  std::vector<std::pair<std::string, std::string>> conflicts;  // movement pairs

  // Dense index lookups, built by finalize().
  std::map<std::string, int> link_index;
  std::map<std::string, int> movement_index;
  std::map<std::string, int> phase_index;
  std::map<std::string, int> intersection_index;
  std::map<std::string, int> scheme_of_intersection;     // intersection -> scheme idx
  std::vector<std::vector<int>> movements_of_link;       // link idx -> movement idcs
  std::vector<std::vector<int>> incoming_links;          // intersection -> link idcs
  std::vector<std::vector<int>> phase_movements;         // phase idx -> movement idcs
  std::vector<int> intersection_of_phase;                // phase idx -> intersection idx
  std::set<std::pair<int, int>> conflict_set;            // ordered movement idx pairs
  std::vector<int> lag_steps_cache;                      // link idx -> free-flow lag

  const Link& link(int i) const { return links[static_cast<std::size_t>(i)]; }
  const Movement& movement(int i) const { return movements[static_cast<std::size_t>(i)]; }
  const Phase& phase(int i) const { return phases[static_cast<std::size_t>(i)]; }
  const PhasingScheme& scheme_for(int intersection_idx) const {
    return schemes[static_cast<std::size_t>(
        scheme_of_intersection.at(intersections[static_cast<std::size_t>(intersection_idx)]))];
  }

  bool conflicting(int m1, int m2) const {
    return conflict_set.count({std::min(m1, m2), std::max(m1, m2)}) > 0;
  }

  // Builds lookup tables and checks the structural invariants. Throws
  // ConfigError on the first violation found.
  void finalize(double tau);
};

}  // namespace tsc::core
