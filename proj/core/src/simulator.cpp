#include "gridfault/simulator.hpp"

#include <cmath>
#include <future>

#include "gridfault/error.hpp"
#include "rk4.hpp"

namespace gridfault {

bool ScenarioTrace::operator==(const ScenarioTrace& o) const {
  auto same = [](const Series& a, const Series& b) { return a.columns == b.columns && a.values == b.values; };
  return fault.bus == o.fault.bus && fault.start == o.fault.start && fault.clearing == o.fault.clearing &&
         fault.impedance == o.fault.impedance && fault.horizon == o.fault.horizon && fault.step == o.fault.step &&
         damping == o.damping && time == o.time && generator_buses == o.generator_buses && same(vmag, o.vmag) &&
         same(vang, o.vang) && same(p, o.p) && same(q, o.q) && same(delta, o.delta) && same(omega, o.omega) &&
         same(emf, o.emf) && fault_first == o.fault_first && fault_last == o.fault_last;
}

std::size_t step_index(double time, double step) {
  return static_cast<std::size_t>(std::llround(time / step));
}

namespace {

struct SwingModel {
  std::vector<double> emf, pm, two_h;
  double omega_s = 0.0;
  double damping = 0.0;

  void electrical_power(const Eigen::MatrixXcd& y, const double* delta, std::vector<double>& pe) const {
    const auto ng = emf.size();
    Eigen::VectorXcd e(ng);
    for (std::size_t k = 0; k < ng; ++k) e[k] = std::polar(emf[k], delta[k]);
    const Eigen::VectorXcd current = y * e;
    for (std::size_t k = 0; k < ng; ++k) pe[k] = (e[k] * std::conj(current[k])).real();
  }
};

SwingModel make_model(const GridCase& grid, const OperatingPoint& op, double damping, double frequency) {
  SwingModel m;
  m.emf = op.emf_magnitude;
  m.pm = op.mechanical_power;
  for (const auto& g : grid.generators) m.two_h.push_back(2.0 * g.inertia_h);
  m.omega_s = 2.0 * std::numbers::pi * frequency;
  m.damping = damping;
  return m;
}

}  // namespace

ScenarioTrace simulate_scenario(const GridCase& grid, const OperatingPoint& op, const FaultSpec& fault,
                                const SimulationOptions& options) {
  validate_fault(fault, grid.bus_count());
  const auto nb = grid.bus_count();
  const auto ng = grid.generators.size();
  const auto steps = step_index(fault.horizon, fault.step);

  const ReducedNetwork prefault = kron_reduce(grid, op, NetworkPhase::Prefault, fault);
  const ReducedNetwork fault_on = kron_reduce(grid, op, NetworkPhase::FaultOn, fault);
  const Eigen::MatrixXcd ybus = build_bus_admittance(grid);
  const SwingModel model = make_model(grid, op, options.damping, options.nominal_frequency);

  ScenarioTrace tr;
  tr.fault = fault;
  tr.damping = options.damping;
  tr.fault_first = step_index(fault.start, fault.step);
  tr.fault_last = step_index(fault.clearing, fault.step);
  for (const auto& g : grid.generators) tr.generator_buses.push_back(g.bus);
  for (Series* s : {&tr.vmag, &tr.vang, &tr.p, &tr.q}) {
    s->columns = nb;
    s->values.assign((steps + 1) * nb, 0.0);
  }
  for (Series* s : {&tr.delta, &tr.omega, &tr.emf}) {
    s->columns = ng;
    s->values.assign((steps + 1) * ng, 0.0);
  }
  tr.time.resize(steps + 1);

  // Post-fault network equals the pre-fault one: clearing removes the fault, no line trips.
  auto network_at = [&](std::size_t k) -> const ReducedNetwork& { return tr.fault_on(k) ? fault_on : prefault; };

  std::vector<double> x(2 * ng, 0.0);
  for (std::size_t g = 0; g < ng; ++g) x[g] = op.rotor_angle[g];

  std::vector<double> pe(ng);
  auto record = [&](std::size_t k) {
    tr.time[k] = static_cast<double>(k) * fault.step;
    Eigen::VectorXcd e(ng);
    for (std::size_t g = 0; g < ng; ++g) {
      if (!std::isfinite(x[g]) || std::abs(x[g]) > options.angle_limit)
        throw InstabilityError(tr.time[k], tr.generator_buses[g], x[g]);
      e[g] = std::polar(model.emf[g], x[g]);
      tr.delta(k, g) = x[g];
      tr.omega(k, g) = model.omega_s * x[ng + g];
      tr.emf(k, g) = model.emf[g];
    }
    const Eigen::VectorXcd v = network_at(k).voltage_map * e;
    const Eigen::VectorXcd s = v.cwiseProduct((ybus * v).conjugate());
    for (std::size_t i = 0; i < nb; ++i) {
      const double mag = std::abs(v[i]);
      tr.vmag(k, i) = mag;
      tr.vang(k, i) = mag > 1e-12 ? std::arg(v[i]) : 0.0;
      tr.p(k, i) = s[i].real();
      tr.q(k, i) = s[i].imag();
    }
  };

  record(0);
  for (std::size_t k = 0; k < steps; ++k) {
    const Eigen::MatrixXcd& y = network_at(k).admittance;
    detail::rk4_step(x, fault.step, [&](const std::vector<double>& s, std::vector<double>& ds) {
      model.electrical_power(y, s.data(), pe);
      for (std::size_t g = 0; g < ng; ++g) {
        ds[g] = model.omega_s * s[ng + g];
        ds[ng + g] = (model.pm[g] - pe[g] - model.damping * s[ng + g]) / model.two_h[g];
      }
    });
    record(k + 1);
  }
  return tr;
}

ScenarioTrace simulate_scenario(const GridCase& grid, const FaultSpec& fault, const SimulationOptions& options) {
  validate_fault(fault, grid.bus_count());
  return simulate_scenario(grid, solve_power_flow(grid), fault, options);
}

std::vector<ScenarioTrace> generate_scenarios(const GridCase& grid, const std::vector<double>& clearing_times,
                                              const FaultSpec& base, const SimulationOptions& options) {
  if (clearing_times.empty()) throw ValidationError({"no clearing times given"});
  for (double tc : clearing_times) {
    FaultSpec spec = base;
    spec.clearing = tc;
    validate_fault(spec, grid.bus_count());
  }
  const OperatingPoint op = solve_power_flow(grid);
  std::vector<std::future<ScenarioTrace>> pending;
  for (double tc : clearing_times) {
    FaultSpec spec = base;
    spec.clearing = tc;
    pending.push_back(std::async(std::launch::async, [&grid, &op, spec, options] {
      return simulate_scenario(grid, op, spec, options);
    }));
  }
  std::vector<ScenarioTrace> out;
  out.reserve(pending.size());
  for (std::size_t k = 0; k < pending.size(); ++k) {
    try {
      out.push_back(pending[k].get());
    } catch (const Error& e) {
      throw Error("scenario " + std::to_string(k) + " (clearing " + std::to_string(clearing_times[k]) + " s): " +
                  e.what());
    }
  }
  return out;
}

EnergyAudit audit_energy(const GridCase& grid, const OperatingPoint& op, const ReducedNetwork& network,
                         const std::vector<double>& initial_angle, const std::vector<double>& initial_speed,
                         double step, double duration, double nominal_frequency) {
  const auto ng = grid.generators.size();
  if (initial_angle.size() != ng || initial_speed.size() != ng)
    throw Error("audit_energy: initial state does not match generator count");
  const SwingModel model = make_model(grid, op, 0.0, nominal_frequency);
  const Eigen::MatrixXd g = network.admittance.real(), b = network.admittance.imag();

  // x = [delta, speed deviation (pu), accumulated transfer-conductance work]
  std::vector<double> x(2 * ng + 1, 0.0);
  for (std::size_t k = 0; k < ng; ++k) {
    x[k] = initial_angle[k];
    x[ng + k] = initial_speed[k];
  }

  auto energy = [&](const std::vector<double>& s, double& kinetic) {
    kinetic = 0.0;
    double potential = s[2 * ng];
    for (std::size_t i = 0; i < ng; ++i) {
      kinetic += 0.5 * model.two_h[i] * model.omega_s * s[ng + i] * s[ng + i];
      potential += (model.emf[i] * model.emf[i] * g(i, i) - model.pm[i]) * (s[i] - initial_angle[i]);
      for (std::size_t j = i + 1; j < ng; ++j) {
        const double c = model.emf[i] * model.emf[j] * b(i, j);
        potential -= c * (std::cos(s[i] - s[j]) - std::cos(initial_angle[i] - initial_angle[j]));
      }
    }
    return kinetic + potential;
  };

  std::vector<double> pe(ng);
  auto rhs = [&](const std::vector<double>& s, std::vector<double>& ds) {
    model.electrical_power(network.admittance, s.data(), pe);
    double work = 0.0;
    for (std::size_t i = 0; i < ng; ++i) {
      ds[i] = model.omega_s * s[ng + i];
      ds[ng + i] = (model.pm[i] - pe[i]) / model.two_h[i];
      for (std::size_t j = 0; j < ng; ++j)
        if (j != i) work += model.emf[i] * model.emf[j] * g(i, j) * std::cos(s[i] - s[j]) * ds[i];
    }
    ds[2 * ng] = work;
  };

  EnergyAudit audit;
  audit.duration = duration;
  const auto steps = step_index(duration, step);
  double ke = 0.0;
  audit.total.push_back(energy(x, ke));
  audit.kinetic.push_back(ke);
  for (std::size_t k = 0; k < steps; ++k) {
    detail::rk4_step(x, step, rhs);
    audit.total.push_back(energy(x, ke));
    audit.kinetic.push_back(ke);
  }
  for (std::size_t k = 0; k < audit.total.size(); ++k) {
    audit.max_drift = std::max(audit.max_drift, std::abs(audit.total[k] - audit.total[0]));
    audit.scale = std::max(audit.scale, audit.kinetic[k]);
  }
  return audit;
}

}  // namespace gridfault
