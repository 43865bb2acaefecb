#pragma once

// Power and ratio conversions. dB quantities use 10*log10, dBm is referenced to 1 mW.

#include <cmath>
#include <string>

#include "facet/error.hpp"

namespace facet::units {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double linear) {
  if (!(linear > 0.0)) {
    throw DomainError("linear_to_db: argument must be positive, got " + std::to_string(linear));
  }
  return 10.0 * std::log10(linear);
}

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline double watt_to_dbm(double watt) {
  if (!(watt > 0.0)) {
    throw DomainError("watt_to_dbm: argument must be positive, got " + std::to_string(watt));
  }
  return 10.0 * std::log10(watt) + 30.0;
}

}  // namespace facet::units
