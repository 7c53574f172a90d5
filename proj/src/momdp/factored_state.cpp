#include "tsc/momdp/factored_state.hpp"

#include <algorithm>
#include <set>

namespace tsc::momdp {

DesignLevel design_level_from_string(const std::string& s) {
  if (s == "L1") return DesignLevel::L1;
  if (s == "L2") return DesignLevel::L2;
  if (s == "L3") return DesignLevel::L3;
  if (s == "L4") return DesignLevel::L4;
  throw std::invalid_argument("unknown design level: " + s);
}

const char* to_string(DesignLevel level) {
  switch (level) {
    case DesignLevel::L1: return "L1";
    case DesignLevel::L2: return "L2";
    case DesignLevel::L3: return "L3";
    default: return "L4";
  }
}

namespace {

IntersectionFeatures features_of(const core::SimState& s,
                                 const core::NetworkSpec& net, int idx) {
  IntersectionFeatures f;
  for (int li : net.incoming_links[static_cast<std::size_t>(idx)])
    f.link_queues.push_back(s.links[static_cast<std::size_t>(li)].queue_total());
  const core::SignalState& sig = s.signals[static_cast<std::size_t>(idx)];
  const core::PhasingScheme& scheme = net.scheme_for(idx);
  f.phase = 0;
  if (sig.phase >= 0) {
    const std::string& pid = net.phase(sig.phase).id;
    for (std::size_t k = 0; k < scheme.phase_order.size(); ++k)
      if (scheme.phase_order[k] == pid) f.phase = static_cast<int>(k);
  }
  f.phase_progress =
      scheme.max_green_s > 0
          ? std::clamp(sig.elapsed_s / scheme.max_green_s, 0.0, 1.0)
          : 0.0;
  return f;
}

// Neighbors within `hops` over the link graph (either direction).
std::vector<int> neighbors_of(const core::NetworkSpec& net, int idx, int hops) {
  std::set<int> seen{idx};
  std::vector<int> frontier{idx};
  std::vector<int> out;
  for (int h = 0; h < hops; ++h) {
    std::vector<int> next;
    for (int u : frontier) {
      const std::string& uid = net.intersections[static_cast<std::size_t>(u)];
      for (const core::Link& l : net.links) {
        int v = -1;
        if (l.from_node == uid && net.intersection_index.count(l.to_node))
          v = net.intersection_index.at(l.to_node);
        else if (l.to_node == uid && net.intersection_index.count(l.from_node))
          v = net.intersection_index.at(l.from_node);
        if (v >= 0 && !seen.count(v)) {
          seen.insert(v);
          next.push_back(v);
          out.push_back(v);
        }
      }
    }
    frontier = std::move(next);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

FactoredState observe(const core::SimState& s, const core::NetworkSpec& net,
                      const BoundaryConfig& cfg,
                      const std::optional<DemandBelief>& belief) {
  auto it = net.intersection_index.find(cfg.intersection);
  if (it == net.intersection_index.end())
    throw UnknownIntersection("unknown intersection: " + cfg.intersection);
  int idx = it->second;

  FactoredState fs;
  fs.level = cfg.level;
  fs.controlled = features_of(s, net, idx);

  if (cfg.level == DesignLevel::L3 || cfg.level == DesignLevel::L4) {
    for (int v : neighbors_of(net, idx, cfg.neighbor_hops))
      fs.neighbors.push_back(features_of(s, net, v));
  }
  if (cfg.level == DesignLevel::L2) {
    for (const std::string& e : net.entry_links) {
      auto a = s.last_arrivals.find(e);
      fs.demand_reading.push_back(a == s.last_arrivals.end() ? 0.0
                                                             : static_cast<double>(a->second));
    }
  }
  if (cfg.level == DesignLevel::L4 && belief) fs.demand_belief = *belief;
  return fs;
}

}  // namespace tsc::momdp
