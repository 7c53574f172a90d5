#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsc::momdp {

struct PositionOutOfRange : std::runtime_error {
  explicit PositionOutOfRange(const std::string& what) : std::runtime_error(what) {}
};
struct WindowTooLong : std::runtime_error {
  explicit WindowTooLong(const std::string& what) : std::runtime_error(what) {}
};

// Discrete traffic state encoding of an approach: space cells x lanes,
// vehicle counts plus mean speed normalized by the free-flow speed.
struct DtseTensor {
  double cell_size_m = 7.0;
  std::size_t n_cells = 0;
  std::size_t n_lanes = 0;
  std::vector<double> occupancy;   // row-major [cell][lane]
  std::vector<double> norm_speed;  // 0 in empty cells

  double& occ(std::size_t c, std::size_t l) { return occupancy[c * n_lanes + l]; }
  double occ(std::size_t c, std::size_t l) const { return occupancy[c * n_lanes + l]; }
  double& spd(std::size_t c, std::size_t l) { return norm_speed[c * n_lanes + l]; }
  double spd(std::size_t c, std::size_t l) const { return norm_speed[c * n_lanes + l]; }

  double occupancy_total() const {
    double n = 0;
    for (double v : occupancy) n += v;
    return n;
  }
};

struct VehicleObservation {
  double position_m = 0;  // distance upstream of the stop bar
  double speed = 0;       // m/s
  std::size_t lane = 0;
};

DtseTensor encode_dtse(const std::vector<VehicleObservation>& vehicles,
                       double link_length_m, double cell_size_m,
                       double free_flow_speed, std::size_t n_lanes = 1);

// Temporal encoding: binary presence per detector group over a time window,
// plus the phase id channel.
struct TdtseTensor {
  std::size_t n_groups = 0;
  std::size_t window = 0;
  std::vector<int> presence;  // row-major [group][step], oldest first
  std::vector<int> phase;     // [step]

  int pres(std::size_t g, std::size_t t) const { return presence[g * window + t]; }
};

TdtseTensor encode_tdtse(const std::vector<std::vector<int>>& presence_history,
                         const std::vector<int>& phase_history, std::size_t window);

}  // namespace tsc::momdp
