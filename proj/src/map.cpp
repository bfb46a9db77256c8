#include "lsv/map.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lsv {

namespace {

void require_unit_interval(double x, const char* what) {
  if (!(x > 0.0 && x <= 1.0)) {
    throw std::domain_error(std::string(what) + ": argument " + std::to_string(x) +
                            " outside (0, 1]");
  }
}

constexpr int kBisectionCap = 200;
constexpr double kLinearRelTol = 1e-14;

}  // namespace

MapParams MapParams::from_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("gamma must lie in (0, 1], got " + std::to_string(gamma));
  }
  MapParams p;
  p.gamma = gamma;
  p.beta = 1.0 / gamma - 1.0;
  p.c = std::pow(std::log(2.0), p.beta);
  return p;
}

double apply_map(const MapParams& params, double x) {
  require_unit_interval(x, "apply_map");
  return apply_map_unchecked(params, x);
}

double map_derivative(const MapParams& params, double x) {
  require_unit_interval(x, "map_derivative");
  if (x > kHalf) return 2.0;
  if (params.beta == 0.0) return 2.0;
  const double u = -std::log(x);
  const double cu = params.c * std::pow(u, -params.beta);
  return 1.0 + cu + params.beta * cu / u;
}

// On (0, 1/2] the left branch satisfies x <= T(x) <= 2x, so the preimage of y
// lies in [y/2, min(y, 1/2)]: a bracket of relative width at most one, which
// plain bisection shrinks to adjacent doubles in ~55 steps.
double left_inverse(const MapParams& params, double y) {
  require_unit_interval(y, "left_inverse");
  if (y == 1.0) return kHalf;
  if (params.beta == 0.0) return 0.5 * y;
  double lo = 0.5 * y;
  double hi = std::fmin(y, kHalf);
  for (int it = 0; it < kBisectionCap; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (apply_map_unchecked(params, mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 0.25 * kLinearRelTol * hi) break;
  }
  // Pick whichever endpoint reproduces y best.
  const double elo = std::fabs(apply_map_unchecked(params, lo) - y);
  const double ehi = std::fabs(apply_map_unchecked(params, hi) - y);
  return elo < ehi ? lo : hi;
}

double right_inverse(double y) {
  require_unit_interval(y, "right_inverse");
  return 0.5 * (y + 1.0);
}

}  // namespace lsv
