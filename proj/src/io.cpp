#include "ddc/io.hpp"

#include <cstdio>

namespace ddc {

std::string format_double(double value)
{
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%.17g", value);
  return std::string(buf, static_cast<std::size_t>(n));
}

} // namespace ddc
