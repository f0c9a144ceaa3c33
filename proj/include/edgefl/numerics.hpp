#pragma once

#include <cmath>
#include <concepts>
#include <string>

#include "edgefl/error.hpp"

namespace edgefl::numerics {

inline constexpr double kInvE = 0.36787944117144232160;  // 1/e
inline constexpr double kLn2 = 0.69314718055994530942;

// Real branches of the Lambert W function (inverse of w -> w*e^w).
//   Principal: W0 on [-1/e, inf), returns w >= -1
//   Secondary: W-1 on [-1/e, 0),  returns w <= -1
enum class Branch { kPrincipal, kSecondary };

double lambert_w(Branch branch, double x);

// Bisection on a sign change of f inside [lo, hi]. Stops once the bracket is
// narrower than tol or f hits zero exactly. Used as the slow, obviously
// correct reference for the closed forms in this library.
template <typename F>
  requires std::invocable<F&, double> && std::convertible_to<std::invoke_result_t<F&, double>, double>
double bracketed_root(F&& f, double lo, double hi, double tol) {
  if (!(lo < hi) || !(tol > 0.0)) {
    throw Error(ErrorCode::kDomain, "bracketed_root: need lo < hi and tol > 0");
  }
  double f_lo = f(lo);
  double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if (std::signbit(f_lo) == std::signbit(f_hi)) {
    throw Error(ErrorCode::kNoBracket, "bracketed_root: f(lo) and f(hi) have the same sign on [" +
                                           std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  for (int i = 0; i < 2000 && hi - lo > tol; ++i) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;  // interval below one ulp
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if (std::signbit(f_mid) == std::signbit(f_lo)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

}  // namespace edgefl::numerics
