#include "edgefl/numerics.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace edgefl::numerics {
namespace {

constexpr double kE = 2.71828182845904523536;
// Distance from -1/e below which the argument is treated as the branch point.
constexpr double kBranchPointSnap = 1e-14;
// Arguments this far below -1/e are accepted as rounding noise.
constexpr double kBelowBranchSlack = 1e-15;
constexpr int kMaxIterations = 64;

// Puiseux series around the branch point in p = sqrt(2(1 + e*x)).
// sign = +1 for W0, -1 for W-1.
double branch_point_series(double dist, double sign) {
  const double p = sign * std::sqrt(2.0 * kE * dist);
  return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p - 43.0 / 540.0 * p * p * p * p;
}

double principal_guess(double x, double dist) {
  if (kE * dist < 0.5) return branch_point_series(dist, 1.0);
  if (x < 3.0) {
    // Winitzki's approximation, good to a few percent on (-1/e, 3).
    const double l = std::log1p(x);
    return l * (1.0 - std::log1p(l) / (2.0 + l));
  }
  const double l1 = std::log(x);
  const double l2 = std::log(l1);
  return l1 - l2 + l2 / l1;
}

double secondary_guess(double x, double dist) {
  if (kE * dist < 0.5) return branch_point_series(dist, -1.0);
  const double l1 = std::log(-x);
  const double l2 = std::log(-l1);
  return l1 - l2 + l2 / l1;
}

double halley(double w, double x, Branch branch) {
  for (int i = 0; i < kMaxIterations; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (f == 0.0 || wp1 == 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    double next = w - f / denom;
    // keep iterates on their own side of the branch point
    if (branch == Branch::kPrincipal && next < -1.0) next = 0.5 * (w - 1.0);
    if (branch == Branch::kSecondary && next > -1.0) next = 0.5 * (w - 1.0);
    const double step = std::fabs(next - w);
    w = next;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(w))) break;
  }
  return w;
}

}  // namespace

double lambert_w(Branch branch, double x) {
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::kDomain, "lambert_w: non-finite argument");
  }
  double dist = x + kInvE;
  if (dist < 0.0) {
    if (-dist > kBelowBranchSlack) {
      throw Error(ErrorCode::kDomain, "lambert_w: argument " + std::to_string(x) + " below -1/e");
    }
    dist = 0.0;
  }
  if (branch == Branch::kSecondary && x >= 0.0) {
    throw Error(ErrorCode::kDomain, "lambert_w: secondary branch needs x < 0, got " + std::to_string(x));
  }
  if (dist <= kBranchPointSnap) return -1.0;
  if (x == 0.0) return 0.0;

  if (branch == Branch::kPrincipal) {
    return halley(principal_guess(x, dist), x, branch);
  }
  return halley(secondary_guess(x, dist), x, branch);
}

}  // namespace edgefl::numerics
