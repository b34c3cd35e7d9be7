#pragma once

#include <vector>

#include "gridfault/default_case.hpp"
#include "gridfault/features.hpp"
#include "gridfault/pipeline.hpp"

namespace fixtures {

// The default five-scenario run, computed once per test binary.
inline const gridfault::SimulationStage& default_simulation() {
  static const gridfault::SimulationStage sim = gridfault::run_simulation(gridfault::RunConfig{});
  return sim;
}

inline const gridfault::Dataset& default_dataset() {
  static const gridfault::Dataset ds = gridfault::run_dataset(gridfault::RunConfig{}, default_simulation());
  return ds;
}

}  // namespace fixtures
