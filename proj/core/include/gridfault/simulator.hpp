#pragma once

#include <cstddef>
#include <numbers>
#include <vector>

#include "gridfault/network.hpp"

namespace gridfault {

struct SimulationOptions {
  double damping = 300.0;        // uniform D, pu power per pu speed (system base)
  double nominal_frequency = 60.0;
  double angle_limit = 10.0 * std::numbers::pi;  // |delta| beyond this aborts the run
};

/// Row-major time series, one row per sample.
struct Series {
  std::size_t columns = 0;
  std::vector<double> values;

  double operator()(std::size_t t, std::size_t c) const { return values[t * columns + c]; }
  double& operator()(std::size_t t, std::size_t c) { return values[t * columns + c]; }
};

struct ScenarioTrace {
  FaultSpec fault;
  double damping = 0.0;
  std::vector<double> time;
  std::vector<int> generator_buses;  // 1-based bus id per generator column
  Series vmag, vang, p, q;           // buses
  Series delta, omega, emf;          // generators; omega is the speed deviation in rad/s
  /// Samples with index in [fault_first, fault_last) are fault-on.
  std::size_t fault_first = 0;
  std::size_t fault_last = 0;

  std::size_t length() const { return time.size(); }
  std::size_t bus_count() const { return vmag.columns; }
  std::size_t generator_count() const { return delta.columns; }
  bool fault_on(std::size_t t) const { return t >= fault_first && t < fault_last; }

  bool operator==(const ScenarioTrace&) const;
};

/// Integer sample index of a time that must sit on the step grid.
std::size_t step_index(double time, double step);

/// Fixed-step RK4 integration of the classical-model swing equations.
/// Sample t is taken after any switching scheduled at t.
ScenarioTrace simulate_scenario(const GridCase& grid, const OperatingPoint& op, const FaultSpec& fault,
                                const SimulationOptions& options = {});
ScenarioTrace simulate_scenario(const GridCase& grid, const FaultSpec& fault,
                                const SimulationOptions& options = {});

/// One trace per clearing time; scenarios run concurrently.
std::vector<ScenarioTrace> generate_scenarios(const GridCase& grid, const std::vector<double>& clearing_times,
                                              const FaultSpec& base, const SimulationOptions& options = {});

/// Energy bookkeeping for a single network phase at zero damping.
struct EnergyAudit {
  std::vector<double> total;    // kinetic + potential, per sample
  std::vector<double> kinetic;
  double max_drift = 0.0;       // max |total(t) - total(0)|
  double scale = 0.0;           // max kinetic energy over the run
  double duration = 0.0;
  /// Drift relative to the exchanged energy, per simulated second.
  double drift_per_second() const { return scale > 0 ? max_drift / scale / duration : 0.0; }
};

/// Integrates the undamped swing equations in one fixed network and tracks the
/// classical energy function. The non-conservative transfer-conductance term
/// is accumulated along the trajectory, so the total is an exact invariant.
EnergyAudit audit_energy(const GridCase& grid, const OperatingPoint& op, const ReducedNetwork& network,
                         const std::vector<double>& initial_angle, const std::vector<double>& initial_speed,
                         double step, double duration, double nominal_frequency = 60.0);

}  // namespace gridfault
