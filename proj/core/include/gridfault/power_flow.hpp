#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "gridfault/topology.hpp"

namespace gridfault {

using Complex = std::complex<double>;

/// Network-only bus admittance matrix (series branches plus line charging).
Eigen::MatrixXcd build_bus_admittance(const GridCase& grid);

struct PowerFlowOptions {
  int max_iterations = 50;
  double tolerance = 1e-10;  // max |mismatch| in pu
};

/// Solved steady state plus the classical-machine quantities derived from it.
struct OperatingPoint {
  Eigen::VectorXcd voltage;    // per bus
  Eigen::VectorXcd injection;  // net complex power injection per bus, pu
  std::vector<Complex> generator_power;  // terminal output per generator, pu
  std::vector<double> emf_magnitude;     // |E'| per generator
  std::vector<double> rotor_angle;       // initial delta per generator, rad
  std::vector<double> mechanical_power;  // per generator, pu
  int iterations = 0;
  double max_mismatch = 0.0;

  double total_generation() const;
};

/// Newton-Raphson in polar coordinates. PV buses hold their setpoint
/// magnitude; the slack absorbs the residual.
OperatingPoint solve_power_flow(const GridCase& grid, const PowerFlowOptions& options = {});

/// Per-bus mismatch of scheduled vs computed injection (P for non-slack buses,
/// Q for PQ buses); the largest absolute value.
double power_flow_mismatch(const GridCase& grid, const Eigen::VectorXcd& voltage);

/// Sum of series and shunt losses over all branches at the given voltages.
double branch_losses(const GridCase& grid, const Eigen::VectorXcd& voltage);

}  // namespace gridfault
