#pragma once

#include <string>

namespace eskit {

/// "%.17g": enough digits to round-trip a double, and byte-stable across
/// repeated runs on one platform.
std::string csv_number(double value);

}  // namespace eskit
