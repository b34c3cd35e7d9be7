#include "gridfault/power_flow.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "gridfault/error.hpp"

namespace gridfault {

Eigen::MatrixXcd build_bus_admittance(const GridCase& grid) {
  const auto n = static_cast<Eigen::Index>(grid.bus_count());
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& br : grid.branches) {
    const auto f = br.from - 1, t = br.to - 1;
    const Complex series = 1.0 / Complex(br.r, br.x);
    const Complex shunt(0.0, br.b / 2.0);
    y(f, f) += series + shunt;
    y(t, t) += series + shunt;
    y(f, t) -= series;
    y(t, f) -= series;
  }
  return y;
}

double OperatingPoint::total_generation() const {
  double total = 0.0;
  for (const auto& s : generator_power) total += s.real();
  return total;
}

namespace {

struct Schedule {
  Eigen::VectorXd p, q;
  std::vector<Eigen::Index> angle_vars;      // non-slack buses
  std::vector<Eigen::Index> magnitude_vars;  // PQ buses
};

Schedule make_schedule(const GridCase& grid) {
  const auto n = static_cast<Eigen::Index>(grid.bus_count());
  Schedule s{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), {}, {}};
  for (Eigen::Index i = 0; i < n; ++i) {
    s.p[i] = -grid.buses[i].load_p;
    s.q[i] = -grid.buses[i].load_q;
    if (grid.buses[i].type != BusType::Slack) s.angle_vars.push_back(i);
    if (grid.buses[i].type == BusType::PQ) s.magnitude_vars.push_back(i);
  }
  for (const auto& g : grid.generators)
    if (grid.buses[g.bus - 1].type != BusType::Slack) s.p[g.bus - 1] += g.p_set;
  return s;
}

Eigen::VectorXcd injections(const Eigen::MatrixXcd& y, const Eigen::VectorXcd& v) {
  return v.cwiseProduct((y * v).conjugate());
}

Eigen::VectorXd mismatch_vector(const Schedule& s, const Eigen::VectorXcd& inj) {
  const auto na = static_cast<Eigen::Index>(s.angle_vars.size());
  const auto nm = static_cast<Eigen::Index>(s.magnitude_vars.size());
  Eigen::VectorXd m(na + nm);
  for (Eigen::Index k = 0; k < na; ++k) m[k] = s.p[s.angle_vars[k]] - inj[s.angle_vars[k]].real();
  for (Eigen::Index k = 0; k < nm; ++k) m[na + k] = s.q[s.magnitude_vars[k]] - inj[s.magnitude_vars[k]].imag();
  return m;
}

}  // namespace

double power_flow_mismatch(const GridCase& grid, const Eigen::VectorXcd& voltage) {
  const auto s = make_schedule(grid);
  const auto m = mismatch_vector(s, injections(build_bus_admittance(grid), voltage));
  return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

double branch_losses(const GridCase& grid, const Eigen::VectorXcd& voltage) {
  double losses = 0.0;
  for (const auto& br : grid.branches) {
    const Complex vf = voltage[br.from - 1], vt = voltage[br.to - 1];
    const Complex series = 1.0 / Complex(br.r, br.x);
    const Complex shunt(0.0, br.b / 2.0);
    const Complex i_ft = (vf - vt) * series + vf * shunt;
    const Complex i_tf = (vt - vf) * series + vt * shunt;
    losses += (vf * std::conj(i_ft) + vt * std::conj(i_tf)).real();
  }
  return losses;
}

OperatingPoint solve_power_flow(const GridCase& grid, const PowerFlowOptions& options) {
  const auto n = static_cast<Eigen::Index>(grid.bus_count());
  const Eigen::MatrixXcd y = build_bus_admittance(grid);
  const Eigen::MatrixXd g = y.real(), b = y.imag();
  const auto sched = make_schedule(grid);
  const auto na = static_cast<Eigen::Index>(sched.angle_vars.size());
  const auto nm = static_cast<Eigen::Index>(sched.magnitude_vars.size());

  Eigen::VectorXd vm(n), va = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    vm[i] = grid.buses[i].type == BusType::PQ ? 1.0 : grid.buses[i].v_set;

  auto polar = [&] {
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = std::polar(vm[i], va[i]);
    return v;
  };

  OperatingPoint op;
  Eigen::VectorXcd v = polar();
  Eigen::VectorXcd inj = injections(y, v);
  Eigen::VectorXd mis = mismatch_vector(sched, inj);
  int iter = 0;
  while (mis.size() && mis.cwiseAbs().maxCoeff() > options.tolerance) {
    if (iter >= options.max_iterations) {
      std::ostringstream msg;
      msg << "power flow did not converge in " << options.max_iterations
          << " iterations; final mismatch " << mis.cwiseAbs().maxCoeff() << " pu";
      throw NumericalError(msg.str());
    }
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(na + nm, na + nm);
    // Row blocks: dP (angle_vars), dQ (magnitude_vars). Column blocks: theta, |V|.
    auto fill_row = [&](Eigen::Index row, Eigen::Index i, bool is_p) {
      const double pi = inj[i].real(), qi = inj[i].imag();
      for (Eigen::Index c = 0; c < na + nm; ++c) {
        const bool is_theta = c < na;
        const Eigen::Index j = is_theta ? sched.angle_vars[c] : sched.magnitude_vars[c - na];
        const double tij = va[i] - va[j];
        const double cs = std::cos(tij), sn = std::sin(tij);
        double d;
        if (i == j) {
          if (is_p)
            d = is_theta ? -qi - b(i, i) * vm[i] * vm[i] : pi / vm[i] + g(i, i) * vm[i];
          else
            d = is_theta ? pi - g(i, i) * vm[i] * vm[i] : qi / vm[i] - b(i, i) * vm[i];
        } else if (is_p) {
          d = is_theta ? vm[i] * vm[j] * (g(i, j) * sn - b(i, j) * cs) : vm[i] * (g(i, j) * cs + b(i, j) * sn);
        } else {
          d = is_theta ? -vm[i] * vm[j] * (g(i, j) * cs + b(i, j) * sn) : vm[i] * (g(i, j) * sn - b(i, j) * cs);
        }
        jac(row, c) = d;
      }
    };
    for (Eigen::Index k = 0; k < na; ++k) fill_row(k, sched.angle_vars[k], true);
    for (Eigen::Index k = 0; k < nm; ++k) fill_row(na + k, sched.magnitude_vars[k], false);

    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (!lu.isInvertible()) throw NumericalError("power flow Jacobian is singular");
    const Eigen::VectorXd dx = lu.solve(mis);
    for (Eigen::Index k = 0; k < na; ++k) va[sched.angle_vars[k]] += dx[k];
    for (Eigen::Index k = 0; k < nm; ++k) vm[sched.magnitude_vars[k]] += dx[na + k];
    if (!dx.allFinite()) throw NumericalError("power flow produced non-finite update");

    v = polar();
    inj = injections(y, v);
    mis = mismatch_vector(sched, inj);
    ++iter;
  }

  op.voltage = v;
  op.injection = inj;
  op.iterations = iter;
  op.max_mismatch = mis.size() ? mis.cwiseAbs().maxCoeff() : 0.0;
  for (const auto& gen : grid.generators) {
    const auto i = gen.bus - 1;
    const Complex load(grid.buses[i].load_p, grid.buses[i].load_q);
    const Complex s_gen = inj[i] + load;
    const Complex current = std::conj(s_gen / v[i]);
    const Complex emf = v[i] + Complex(gen.ra, gen.xd_prime) * current;
    if (!(std::abs(emf) > 0.0)) throw NumericalError("generator at bus " + std::to_string(gen.bus) + " has zero EMF");
    op.generator_power.push_back(s_gen);
    op.emf_magnitude.push_back(std::abs(emf));
    op.rotor_angle.push_back(std::arg(emf));
    op.mechanical_power.push_back((emf * std::conj(current)).real());
  }
  return op;
}

}  // namespace gridfault
