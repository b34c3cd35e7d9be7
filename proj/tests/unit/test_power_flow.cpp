#include <doctest.h>

#include <cmath>

#include "gridfault/default_case.hpp"
#include "gridfault/error.hpp"
#include "gridfault/network.hpp"

using namespace gridfault;

// Reference values from an independent numpy Newton-Raphson solution of the
// same case data.
TEST_CASE("power flow matches the reference solution") {
  const auto grid = ne39_case();
  const auto op = solve_power_flow(grid);
  CHECK(op.max_mismatch < 1e-10);
  CHECK(op.iterations <= 8);

  struct Probe {
    int bus;
    double vm, va;
  };
  const Probe probes[] = {{1, 1.027905177977, -0.242466550471}, {12, 0.939544681004, -0.152648714758},
                          {15, 0.969776940437, -0.199505621837}, {16, 0.988987360878, -0.174851615139},
                          {29, 1.020723330794, -0.049254244846}, {39, 1.03, -0.260866592156}};
  for (const auto& p : probes) {
    CAPTURE(p.bus);
    CHECK(std::abs(op.voltage[p.bus - 1]) == doctest::Approx(p.vm).epsilon(1e-9));
    CHECK(std::arg(op.voltage[p.bus - 1]) == doctest::Approx(p.va).epsilon(1e-8));
  }
  CHECK(std::arg(op.voltage[30]) == 0.0);

  const auto slack = *grid.generator_at(31);
  CHECK(op.generator_power[slack].real() == doctest::Approx(6.814225099502814).epsilon(1e-9));
  CHECK(op.generator_power[slack].imag() == doctest::Approx(1.6790129239363316).epsilon(1e-9));
}

TEST_CASE("machine initial conditions match the reference") {
  const auto grid = ne39_case();
  const auto op = solve_power_flow(grid);
  const double d0[] = {-0.063213921298, 0.410547579259, 0.318844392877, 1.166361634916, 0.487974563536,
                       0.299951288107, 0.307887501631, 0.254450998453, 0.487060798501, -0.205022864412};
  const double em[] = {1.106760253731, 1.199664688081, 1.12104198323, 3.014399073853, 1.366270150621,
                       1.199861476208, 1.18284029107, 1.077946702808, 1.148890234179, 1.043675224958};
  for (std::size_t g = 0; g < 10; ++g) {
    CAPTURE(g);
    CHECK(op.rotor_angle[g] == doctest::Approx(d0[g]).epsilon(1e-8));
    CHECK(op.emf_magnitude[g] == doctest::Approx(em[g]).epsilon(1e-8));
  }
  CHECK(op.mechanical_power[9] == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("generation balances load plus losses") {
  const auto grid = ne39_case();
  const auto op = solve_power_flow(grid);
  double load = 0.0;
  for (const auto& b : grid.buses) load += b.load_p;
  CHECK(op.total_generation() == doctest::Approx(load + branch_losses(grid, op.voltage)).epsilon(1e-9));
  CHECK(power_flow_mismatch(grid, op.voltage) < 1e-9);
}

TEST_CASE("divergence is reported") {
  auto grid = ne39_case();
  for (auto& b : grid.buses) b.load_p *= 20.0;
  CHECK_THROWS_AS(solve_power_flow(grid), NumericalError);
}

TEST_CASE("Kron reduction matches the reference") {
  const auto grid = ne39_case();
  const auto op = solve_power_flow(grid);
  FaultSpec fault;
  const auto pre = kron_reduce(grid, op, NetworkPhase::Prefault, fault);
  const auto on = kron_reduce(grid, op, NetworkPhase::FaultOn, fault);
  CHECK(pre.admittance.rows() == 10);
  CHECK(pre.admittance(0, 0).real() == doctest::Approx(1.0783998074693968).epsilon(1e-9));
  CHECK(pre.admittance(0, 0).imag() == doctest::Approx(-14.874512240180973).epsilon(1e-9));
  CHECK(pre.admittance(0, 9).real() == doctest::Approx(1.2357560414593158).epsilon(1e-9));
  CHECK(pre.admittance(0, 9).imag() == doctest::Approx(4.360498608724154).epsilon(1e-9));
  CHECK(on.admittance(0, 0).real() == doctest::Approx(0.7370481318771429).epsilon(1e-9));
  CHECK(on.admittance(3, 4).imag() == doctest::Approx(0.2629489847261422).epsilon(1e-9));
  CHECK((pre.admittance - pre.admittance.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(on.voltage_map.row(14).cwiseAbs().maxCoeff() == 0.0);

  // Pre-fault reduced network reproduces the solved bus voltages.
  Eigen::VectorXcd e(10);
  for (std::size_t g = 0; g < 10; ++g) e[g] = std::polar(op.emf_magnitude[g], op.rotor_angle[g]);
  const Eigen::VectorXcd v = pre.voltage_map * e;
  CHECK((v - op.voltage).cwiseAbs().maxCoeff() < 1e-9);
  const auto post = kron_reduce(grid, op, NetworkPhase::Postfault, fault);
  CHECK((post.admittance - pre.admittance).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two-machine toy reduction by hand") {
  // Bus 1 (slack, gen), bus 2 (PV, gen), bus 3 (load). Lossless lines.
  const char* text = R"(BUS
1 3 0 0 1.0
2 2 0 0 1.0
3 1 1.0 0 1.0
BRANCH
1 3 0 0.1 0
2 3 0 0.1 0
GENERATOR
1 0.5 1.0 1 1 0.2 0.2 5 0.4 3 0 0.2 0.2
2 0.5 1.0 1 1 0.2 0.2 5 0.4 3 0 0.2 0.2
)";
  const auto grid = parse_case(text, "toy", CaseShape::any());
  const auto op = solve_power_flow(grid);
  const auto red = kron_reduce(grid, op, NetworkPhase::FaultOn, FaultSpec{3});
  // Grounding bus 3 leaves each machine behind x'd + x_line to ground, uncoupled.
  CHECK(red.admittance(0, 0).imag() == doctest::Approx(-1.0 / 0.3));
  CHECK(std::abs(red.admittance(0, 1)) < 1e-12);
}
