#pragma once

#include <string>

namespace sdt {

// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double v);

}  // namespace sdt
