#include "gridfault/network.hpp"

#include <cmath>
#include <string>

#include "gridfault/error.hpp"

namespace gridfault {

void validate_fault(const FaultSpec& fault, std::size_t bus_count) {
  std::vector<std::string> v;
  if (fault.bus < 1 || static_cast<std::size_t>(fault.bus) > bus_count)
    v.push_back("fault bus " + std::to_string(fault.bus) + " is not a valid bus id");
  if (!(fault.step > 0.0)) v.push_back("time step must be > 0");
  if (!(fault.start > 0.0)) v.push_back("fault start must be > 0");
  if (fault.clearing < fault.start) v.push_back("clearing time precedes fault start");
  if (!(fault.clearing < fault.horizon))
    v.push_back("horizon " + std::to_string(fault.horizon) + " s does not extend past clearing time " +
                std::to_string(fault.clearing) + " s");
  if (fault.impedance.real() < 0.0) v.push_back("fault resistance must be >= 0");
  if (fault.step > 0.0) {
    auto on_grid = [&](double t) {
      const double k = t / fault.step;
      return std::abs(k - std::round(k)) < 1e-6;
    };
    if (!on_grid(fault.start) || !on_grid(fault.clearing) || !on_grid(fault.horizon))
      v.push_back("fault start, clearing time and horizon must be multiples of the time step");
  }
  if (!v.empty()) throw ValidationError(std::move(v));
}

ReducedNetwork kron_reduce(const GridCase& grid, const OperatingPoint& op, NetworkPhase phase,
                           const FaultSpec& fault) {
  const auto n = static_cast<Eigen::Index>(grid.bus_count());
  const auto ng = static_cast<Eigen::Index>(grid.generators.size());

  Eigen::MatrixXcd yll = build_bus_admittance(grid);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex load(grid.buses[i].load_p, grid.buses[i].load_q);
    yll(i, i) += std::conj(load) / std::norm(op.voltage[i]);
  }
  Eigen::MatrixXcd ylg = Eigen::MatrixXcd::Zero(n, ng);
  Eigen::MatrixXcd ygg = Eigen::MatrixXcd::Zero(ng, ng);
  for (Eigen::Index k = 0; k < ng; ++k) {
    const auto& gen = grid.generators[k];
    const Complex yg = 1.0 / Complex(gen.ra, gen.xd_prime);
    const auto i = gen.bus - 1;
    ygg(k, k) = yg;
    yll(i, i) += yg;
    ylg(i, k) = -yg;
  }

  // Buses kept in the elimination; a bolted fault grounds its bus, removing it.
  std::vector<Eigen::Index> kept;
  const bool faulted = phase == NetworkPhase::FaultOn;
  const Eigen::Index fault_index = fault.bus - 1;
  const bool grounded = faulted && fault.impedance == Complex(0.0, 0.0);
  if (faulted && !grounded) yll(fault_index, fault_index) += 1.0 / fault.impedance;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(grounded && i == fault_index)) kept.push_back(i);

  const auto m = static_cast<Eigen::Index>(kept.size());
  Eigen::MatrixXcd a(m, m), c(m, ng);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index s = 0; s < m; ++s) a(r, s) = yll(kept[r], kept[s]);
    c.row(r) = ylg.row(kept[r]);
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(a);
  if (!lu.isInvertible()) throw NumericalError("bus admittance block is singular during Kron reduction");
  const Eigen::MatrixXcd solved = lu.solve(c);  // Y_ll^-1 Y_lg

  ReducedNetwork out;
  out.admittance = ygg - c.transpose() * solved;
  out.voltage_map = Eigen::MatrixXcd::Zero(n, ng);
  for (Eigen::Index r = 0; r < m; ++r) out.voltage_map.row(kept[r]) = -solved.row(r);
  return out;
}

}  // namespace gridfault
