// Prints one line per acceptance criterion; exits nonzero when any gating
// criterion fails.

#include <cstdio>
#include <exception>

#include "gridfault/config.hpp"
#include "gridfault/verify.hpp"

int main(int argc, char** argv) {
  try {
    const auto config = argc > 1 ? gridfault::load_config(argv[1]) : gridfault::RunConfig{};
    gridfault::VerifyOptions opt;
    opt.scratch = std::filesystem::temp_directory_path() / "gridfault-acceptance";
    const auto report = gridfault::run_verification(config, opt);
    for (const auto& c : report.criteria) std::printf("%s\n", gridfault::format_result(c).c_str());
    std::printf("%s\n", report.passed() ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED");
    return report.passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance: %s\n", e.what());
    return 2;
  }
}
