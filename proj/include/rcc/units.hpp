#pragma once

#include <cmath>

namespace rcc {

inline double db_to_linear(double value_db) { return std::pow(10.0, value_db / 10.0); }

inline double linear_to_db(double value) { return 10.0 * std::log10(value); }

inline double dbm_to_watts(double value_dbm) { return std::pow(10.0, (value_dbm - 30.0) / 10.0); }

inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

}  // namespace rcc
