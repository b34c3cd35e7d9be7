#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "gridfault/error.hpp"
#include "gridfault/simulator.hpp"
#include "gridfault/verify.hpp"

using namespace gridfault;

TEST_CASE("fault-on window is right-continuous") {
  const auto& sim = fixtures::default_simulation();
  REQUIRE(sim.traces.size() == 5);
  const std::size_t last[] = {70, 72, 74, 76, 78};
  for (std::size_t k = 0; k < 5; ++k) {
    const auto& tr = sim.traces[k];
    CHECK(tr.length() == 1001);
    CHECK(tr.fault_first == 10);
    CHECK(tr.fault_last == last[k]);
    CHECK_FALSE(tr.fault_on(9));
    CHECK(tr.fault_on(10));
    CHECK_FALSE(tr.fault_on(last[k]));
  }
}

TEST_CASE("bolted fault holds the faulted bus at zero") {
  const auto& tr = fixtures::default_simulation().traces[2];
  for (std::size_t t = tr.fault_first; t < tr.fault_last; ++t) CHECK(tr.vmag(t, 14) < 1e-6);
  CHECK(tr.vmag(tr.fault_first - 1, 14) > 0.9);
  CHECK(tr.vmag(tr.fault_last, 14) > 0.5);
}

// Rotor angles of the 0.74 s scenario from the numpy reference integrator.
TEST_CASE("0.74 s trajectory matches the reference integrator") {
  const auto& tr = fixtures::default_simulation().traces[2];
  const double at_050[] = {0.497102001394, 1.274257013757, 1.218357517469, 2.09197060872, 1.432629420043,
                           1.51303253343, 1.475331577932, 0.894876013432, 1.310639692419, 0.33657745157};
  const double at_300[] = {3.049209825801, 3.519326883854, 3.429321863112, 4.306004279675, 3.602245685436,
                           3.412453797735, 3.419697586261, 3.368252296513, 3.596202297241, 2.908657380315};
  const double at_1000[] = {3.061449592926, 3.535211086639, 3.443507901598, 4.291025151341, 3.612638074131,
                            3.424614795809, 3.432551009113, 3.379114506229, 3.611724304708, 2.919640631832};
  for (std::size_t g = 0; g < 10; ++g) {
    CAPTURE(g);
    CHECK(tr.delta(50, g) == doctest::Approx(at_050[g]).epsilon(1e-8));
    CHECK(tr.delta(300, g) == doctest::Approx(at_300[g]).epsilon(1e-8));
    CHECK(tr.delta(1000, g) == doctest::Approx(at_1000[g]).epsilon(1e-8));
  }
}

TEST_CASE("undisturbed run stays at equilibrium") {
  const auto grid = ne39_case();
  FaultSpec quiet;
  quiet.clearing = quiet.start;
  REQUIRE(quiet.is_no_fault());
  const auto tr = simulate_scenario(grid, quiet);
  double worst = 0.0;
  for (std::size_t t = 0; t < tr.length(); ++t)
    for (std::size_t g = 0; g < 10; ++g) worst = std::max(worst, std::abs(tr.delta(t, g) - tr.delta(0, g)));
  CHECK(worst <= 1e-3);
  CHECK(worst < 1e-9);
}

TEST_CASE("recorded quantities are consistent") {
  const auto& tr = fixtures::default_simulation().traces[0];
  const auto& op = fixtures::default_simulation().operating_point;
  for (std::size_t i = 0; i < 39; ++i) CHECK(tr.vmag(0, i) == doctest::Approx(std::abs(op.voltage[i])).epsilon(1e-9));
  for (std::size_t g = 0; g < 10; ++g) {
    CHECK(tr.emf(500, g) == doctest::Approx(op.emf_magnitude[g]));
    CHECK(tr.omega(0, g) == 0.0);
  }
  CHECK(tr.generator_buses.front() == 30);
}

TEST_CASE("scenario generation is deterministic") {
  const auto grid = ne39_case();
  FaultSpec f;
  const auto a = generate_scenarios(grid, {0.70, 0.74}, f);
  const auto b = generate_scenarios(grid, {0.70, 0.74}, f);
  CHECK(a[0] == b[0]);
  CHECK(a[1] == b[1]);
  CHECK(a[1] == fixtures::default_simulation().traces[2]);
}

TEST_CASE("fault spec invariants") {
  FaultSpec f;
  CHECK_NOTHROW(validate_fault(f, 39));
  f.horizon = 0.7;
  CHECK_THROWS_AS(validate_fault(f, 39), ValidationError);
  f = FaultSpec{};
  f.clearing = 0.05;
  CHECK_THROWS_AS(validate_fault(f, 39), ValidationError);
  f = FaultSpec{};
  f.bus = 40;
  CHECK_THROWS_AS(validate_fault(f, 39), ValidationError);
  f = FaultSpec{};
  f.clearing = 0.745;
  CHECK_THROWS_AS(validate_fault(f, 39), ValidationError);
}

TEST_CASE("low damping loses synchronism and reports it") {
  SimulationOptions weak;
  weak.damping = 2.0;
  FaultSpec f;
  f.clearing = 0.78;
  CHECK_THROWS_AS(simulate_scenario(ne39_case(), f, weak), InstabilityError);
}

TEST_CASE("undamped energy is conserved to RK4 order") {
  const auto grid = ne39_case();
  const auto op = solve_power_flow(grid);
  const auto e = check_energy(grid, op, FaultSpec{}, 0.01, 1.0);
  CHECK(e.drift_coarse <= 0.005);
  CHECK(e.ratio >= 12.0);
  CHECK(e.ratio <= 20.0);
}
