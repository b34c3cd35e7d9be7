#pragma once

#include "gridfault/power_flow.hpp"

namespace gridfault {

enum class NetworkPhase { Prefault, FaultOn, Postfault };

struct FaultSpec {
  int bus = 15;
  double start = 0.1;     // s
  double clearing = 0.74; // s
  Complex impedance{0.0, 0.0};  // pu; zero is a bolted fault
  double horizon = 10.0;  // s
  double step = 0.01;     // s

  /// Degenerate spec with clearing == start: integrates the undisturbed system.
  bool is_no_fault() const { return clearing == start; }
};

/// Throws ValidationError on any broken invariant. `bus_count` bounds the fault bus.
void validate_fault(const FaultSpec& fault, std::size_t bus_count);

/// Network reduced to the generator internal nodes (behind x'd). Loads are
/// constant admittances taken at the operating point.
struct ReducedNetwork {
  Eigen::MatrixXcd admittance;  // generators x generators
  /// Maps internal EMFs to all bus voltages: V = voltage_map * E.
  Eigen::MatrixXcd voltage_map;  // buses x generators
};

ReducedNetwork kron_reduce(const GridCase& grid, const OperatingPoint& op, NetworkPhase phase,
                           const FaultSpec& fault);

}  // namespace gridfault
