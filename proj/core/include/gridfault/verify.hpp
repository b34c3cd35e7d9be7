#pragma once

// Acceptance suite shared by `gridfault verify` and the acceptance test.

#include <filesystem>
#include <string>
#include <vector>

#include "gridfault/config.hpp"

namespace gridfault {

enum class Outcome { Pass, Fail, Skip };

struct CriterionResult {
  std::string id;
  std::string title;
  Outcome outcome = Outcome::Skip;
  bool gating = true;
  std::string detail;  // measured values
  double seconds = 0.0;
};

struct VerifyOptions {
  /// Scratch space for the determinism runs; removed afterwards.
  std::filesystem::path scratch = std::filesystem::temp_directory_path() / "gridfault-verify";
};

struct VerifyReport {
  std::vector<CriterionResult> criteria;

  /// False when any gating criterion failed or was skipped.
  bool passed() const;
};

const char* outcome_name(Outcome o);
std::string format_result(const CriterionResult& r);

VerifyReport run_verification(const RunConfig& config, const VerifyOptions& options = {});

// Individual checks, usable on their own.
struct GradientCheck {
  double max_relative_error = 0.0;
  std::size_t configurations = 0;
  std::size_t parameters_checked = 0;
  std::size_t kinks_skipped = 0;  // perturbation flipped a ReLU unit
};

/// Central differences with step `h` against backward() on random models and
/// batches. Entries whose perturbation flips any ReLU unit are skipped.
GradientCheck check_gradients(const std::vector<int>& widths, const Adjacency& adj, std::size_t configurations,
                              std::uint64_t seed, double h = 1e-5);

/// |a - f| / max(|a|, |f|, floor); the floor keeps round-off on near-zero
/// entries from dominating.
inline constexpr double kGradientFloor = 1e-6;

struct EnergyCheck {
  double drift_coarse = 0.0;  // relative drift per second at the coarse step
  double drift_fine = 0.0;
  double ratio = 0.0;
};

/// Undamped motion in the fault-on network, starting from the pre-fault
/// equilibrium, at `coarse_step` and half of it.
EnergyCheck check_energy(const GridCase& grid, const OperatingPoint& op, const FaultSpec& fault, double coarse_step,
                         double duration);

}  // namespace gridfault
