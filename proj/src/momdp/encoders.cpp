#include "tsc/momdp/encoders.hpp"

#include <algorithm>
#include <cmath>

namespace tsc::momdp {

DtseTensor encode_dtse(const std::vector<VehicleObservation>& vehicles,
                       double link_length_m, double cell_size_m,
                       double free_flow_speed, std::size_t n_lanes) {
  if (cell_size_m <= 0) throw std::invalid_argument("cell size must be positive");
  if (free_flow_speed <= 0) throw std::invalid_argument("v* must be positive");
  DtseTensor t;
  t.cell_size_m = cell_size_m;
  t.n_lanes = n_lanes;
  t.n_cells = static_cast<std::size_t>(std::ceil(link_length_m / cell_size_m));
  if (t.n_cells == 0) t.n_cells = 1;
  t.occupancy.assign(t.n_cells * n_lanes, 0.0);
  t.norm_speed.assign(t.n_cells * n_lanes, 0.0);

  // accumulate speed sums first, then divide by counts
  for (const auto& v : vehicles) {
    if (v.position_m < 0 || v.position_m > link_length_m)
      throw PositionOutOfRange("vehicle position outside [0, link length]");
    if (v.lane >= n_lanes) throw PositionOutOfRange("lane index out of range");
    std::size_t cell = static_cast<std::size_t>(std::floor(v.position_m / cell_size_m));
    if (cell >= t.n_cells) cell = t.n_cells - 1;  // position exactly at the far end
    t.occ(cell, v.lane) += 1.0;
    t.spd(cell, v.lane) += v.speed;
  }
  for (std::size_t c = 0; c < t.n_cells; ++c)
    for (std::size_t l = 0; l < n_lanes; ++l) {
      double n = t.occ(c, l);
      if (n > 0) {
        double mean = t.spd(c, l) / n;
        t.spd(c, l) = std::clamp(mean / free_flow_speed, 0.0, 1.0);
      }
    }
  return t;
}

TdtseTensor encode_tdtse(const std::vector<std::vector<int>>& presence_history,
                         const std::vector<int>& phase_history, std::size_t window) {
  if (window == 0) throw std::invalid_argument("window must be positive");
  if (phase_history.size() < window)
    throw WindowTooLong("phase history shorter than window");
  for (const auto& g : presence_history)
    if (g.size() < window) throw WindowTooLong("detector history shorter than window");

  TdtseTensor t;
  t.n_groups = presence_history.size();
  t.window = window;
  t.presence.assign(t.n_groups * window, 0);
  t.phase.assign(window, 0);
  for (std::size_t g = 0; g < t.n_groups; ++g) {
    const auto& hist = presence_history[g];
    for (std::size_t k = 0; k < window; ++k)
      t.presence[g * window + k] = hist[hist.size() - window + k] ? 1 : 0;
  }
  for (std::size_t k = 0; k < window; ++k)
    t.phase[k] = phase_history[phase_history.size() - window + k];
  return t;
}

}  // namespace tsc::momdp
