#include "tsc/core/network.hpp"

#include <algorithm>
#include <cmath>

namespace tsc::core {

namespace {

bool multiple_of(double value, double tau) {
  double q = value / tau;
  return std::abs(q - std::round(q)) < 1e-9;
}

}  // namespace

void NetworkSpec::finalize(double tau) {
  link_index.clear();
  movement_index.clear();
  phase_index.clear();
  intersection_index.clear();
  scheme_of_intersection.clear();

  for (std::size_t i = 0; i < intersections.size(); ++i) {
    if (!intersection_index.emplace(intersections[i], static_cast<int>(i)).second)
      throw ConfigError("duplicate intersection id: " + intersections[i]);
  }
  for (std::size_t i = 0; i < links.size(); ++i) {
    const Link& l = links[i];
    if (!link_index.emplace(l.id, static_cast<int>(i)).second)
      throw ConfigError("duplicate link id: " + l.id);
    if (l.length_m <= 0 || l.free_flow_speed <= 0 || l.saturation_rate <= 0 ||
        l.storage_capacity <= 0)
      throw ConfigError("link " + l.id + ": all physical parameters must be positive");
  }
  for (std::size_t i = 0; i < movements.size(); ++i) {
    const Movement& m = movements[i];
    if (!movement_index.emplace(m.id, static_cast<int>(i)).second)
      throw ConfigError("duplicate movement id: " + m.id);
    if (!link_index.count(m.in_link))
      throw ConfigError("movement " + m.id + ": unknown in-link " + m.in_link);
    if (!m.is_sink() && !link_index.count(m.out_link))
      throw ConfigError("movement " + m.id + ": unknown out-link " + m.out_link);
  }
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (!phase_index.emplace(phases[i].id, static_cast<int>(i)).second)
      throw ConfigError("duplicate phase id: " + phases[i].id);
  }

  conflict_set.clear();
  for (const auto& [a, b] : conflicts) {
    auto ia = movement_index.find(a);
    auto ib = movement_index.find(b);
    if (ia == movement_index.end() || ib == movement_index.end())
      throw ConfigError("conflict pair references unknown movement: " + a + "/" + b);
    conflict_set.insert({std::min(ia->second, ib->second), std::max(ia->second, ib->second)});
  }

  phase_movements.assign(phases.size(), {});
  intersection_of_phase.assign(phases.size(), -1);
  for (std::size_t p = 0; p < phases.size(); ++p) {
    for (const std::string& mid : phases[p].movements) {
      auto it = movement_index.find(mid);
      if (it == movement_index.end())
        throw ConfigError("phase " + phases[p].id + ": unknown movement " + mid);
      phase_movements[p].push_back(it->second);
    }
    // no conflicting pair may share a phase
    for (std::size_t i = 0; i < phase_movements[p].size(); ++i)
      for (std::size_t j = i + 1; j < phase_movements[p].size(); ++j)
        if (conflicting(phase_movements[p][i], phase_movements[p][j]))
          throw ConfigError("phase " + phases[p].id + " contains conflicting movements");
  }

  for (const PhasingScheme& s : schemes) {
    auto it = intersection_index.find(s.intersection);
    if (it == intersection_index.end())
      throw ConfigError("scheme references unknown intersection " + s.intersection);
    if (!scheme_of_intersection
             .emplace(s.intersection,
                      static_cast<int>(&s - schemes.data()))
             .second)
      throw ConfigError("duplicate scheme for intersection " + s.intersection);
    if (s.phase_order.empty())
      throw ConfigError("scheme for " + s.intersection + " has no phases");
    if (s.min_green_s > s.max_green_s)
      throw ConfigError("scheme for " + s.intersection + ": min green > max green");
    for (double d : {s.yellow_s, s.all_red_s, s.min_green_s, s.max_green_s}) {
      if (d < 0 || !multiple_of(d, tau))
        throw ConfigError("scheme for " + s.intersection +
                          ": durations must be nonnegative multiples of tau");
    }
    for (std::size_t k = 0; k < s.phase_order.size(); ++k) {
      auto pit = phase_index.find(s.phase_order[k]);
      if (pit == phase_index.end())
        throw ConfigError("scheme for " + s.intersection + ": unknown phase " +
                          s.phase_order[k]);
      int pidx = pit->second;
      if (intersection_of_phase[static_cast<std::size_t>(pidx)] != -1 &&
          intersection_of_phase[static_cast<std::size_t>(pidx)] != it->second)
        throw ConfigError("phase " + s.phase_order[k] + " appears in two schemes");
      intersection_of_phase[static_cast<std::size_t>(pidx)] = it->second;
    }
  }
  for (const std::string& i : intersections)
    if (!scheme_of_intersection.count(i))
      throw ConfigError("intersection " + i + " has no phasing scheme");

  // every movement must belong to at least one phase
  std::vector<bool> covered(movements.size(), false);
  for (const auto& pm : phase_movements)
    for (int m : pm) covered[static_cast<std::size_t>(m)] = true;
  for (std::size_t m = 0; m < movements.size(); ++m)
    if (!covered[m]) throw ConfigError("movement " + movements[m].id + " is in no phase");

  movements_of_link.assign(links.size(), {});
  for (std::size_t m = 0; m < movements.size(); ++m)
    movements_of_link[static_cast<std::size_t>(link_index.at(movements[m].in_link))]
        .push_back(static_cast<int>(m));

  incoming_links.assign(intersections.size(), {});
  for (std::size_t l = 0; l < links.size(); ++l) {
    auto it = intersection_index.find(links[l].to_node);
    if (it != intersection_index.end())
      incoming_links[static_cast<std::size_t>(it->second)].push_back(static_cast<int>(l));
  }

  for (const std::string& e : entry_links)
    if (!link_index.count(e)) throw ConfigError("unknown entry link " + e);
  for (const std::string& e : exit_links)
    if (!link_index.count(e)) throw ConfigError("unknown exit link " + e);

  lag_steps_cache.assign(links.size(), 0);
  for (std::size_t l = 0; l < links.size(); ++l) {
    double lag = links[l].length_m / links[l].free_flow_speed / tau;
    lag_steps_cache[l] = std::max(1, static_cast<int>(std::lround(lag)));
  }
}

}  // namespace tsc::core
