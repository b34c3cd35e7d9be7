#include "gridfault/error.hpp"

#include <sstream>

namespace gridfault {

namespace {

std::string join_violations(const std::vector<std::string>& violations) {
  std::ostringstream out;
  out << "validation failed";
  for (const auto& v : violations) out << "\n  - " << v;
  return out.str();
}

std::string describe_instability(double time, int bus, double angle) {
  std::ostringstream out;
  out << "rotor angle instability at t=" << time << " s: generator at bus " << bus
      << " reached " << angle << " rad";
  return out.str();
}

}  // namespace

ParseError::ParseError(std::string source, int line, std::string field, const std::string& what)
    : Error(source + ":" + std::to_string(line) + ": " + (field.empty() ? "" : field + ": ") + what),
      source_(std::move(source)),
      line_(line),
      field_(std::move(field)) {}

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error(join_violations(violations)), violations_(std::move(violations)) {}

InstabilityError::InstabilityError(double time, int generator_bus, double angle)
    : NumericalError(describe_instability(time, generator_bus, angle)),
      time_(time),
      generator_bus_(generator_bus) {}

}  // namespace gridfault
