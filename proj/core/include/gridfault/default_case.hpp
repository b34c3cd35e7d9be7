#pragma once

#include <string_view>

#include "gridfault/topology.hpp"

namespace gridfault {

/// The New England 39-bus case compiled into the library.
std::string_view ne39_case_text();
GridCase ne39_case();

}  // namespace gridfault
