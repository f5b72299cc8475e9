// ============================================================================
// ddc/io.hpp - text serialization helpers
// ============================================================================
#pragma once

#include <string>

namespace ddc {

/// Shortest round-trip-safe text form used in every output file: 17
/// significant digits, printf "%.17g".
std::string format_double(double value);

} // namespace ddc
