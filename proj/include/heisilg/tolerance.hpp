#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace heisilg {

// Multiplier applied to every verification tolerance. Read once from
// HEIS_ILG_TOL; must be a positive number.
inline double tolerance_scale() {
  static const double scale = [] {
    const char* env = std::getenv("HEIS_ILG_TOL");
    if (env == nullptr || *env == '\0') return 1.0;
    char* end = nullptr;
    double v = std::strtod(env, &end);
    if (end == env || !(v > 0.0)) {
      throw std::invalid_argument(std::string("HEIS_ILG_TOL must be positive: ") + env);
    }
    return v;
  }();
  return scale;
}

// Scaled tolerance.
inline double tol(double base) { return base * tolerance_scale(); }

// Relative slack used by the Lipschitz and tameness checks.
inline double lip_slack() { return 1.0 + tol(1e-9); }

}  // namespace heisilg
