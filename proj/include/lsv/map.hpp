#pragma once

// The interval map family with a logarithmically neutral fixed point at 0:
//
//   T(x) = x (1 + c / |log x|^beta)   for x <= 1/2
//   T(x) = 2x - 1                      for x >  1/2
//
// with beta = 1/gamma - 1 and c = (log 2)^beta, so that T(1/2) = 1.
// gamma = 1 is the doubling map.

namespace lsv {

struct MapParams {
  double gamma = 0.5;
  double beta = 1.0;
  double c = 0.0;

  // Throws std::invalid_argument unless gamma is in (0, 1].
  static MapParams from_gamma(double gamma);

  bool is_doubling() const { return beta == 0.0; }
};

inline constexpr double kHalf = 0.5;

// Smallest start offset 2y - 1 reachable from a double y in (1/2, 1); orbits
// started in (0, 1) never go below this scale, so |log x| stays under ~37.
inline constexpr double kFloatFloor = 0x1p-53;

// T(x). Throws std::domain_error for x outside (0, 1].
double apply_map(const MapParams& params, double x);

// Unchecked T(x) for hot loops; x must lie in (0, 1].
inline double apply_map_unchecked(const MapParams& params, double x);

// T'(x) on either branch.
double map_derivative(const MapParams& params, double x);

// Left inverse branch S: (0, 1] -> (0, 1/2].
double left_inverse(const MapParams& params, double y);

// Right inverse branch U: (0, 1] -> (1/2, 1].
double right_inverse(double y);

}  // namespace lsv

#include <cmath>

namespace lsv {

inline double apply_map_unchecked(const MapParams& params, double x) {
  if (x > kHalf) return 2.0 * x - 1.0;
  if (params.beta == 0.0) return 2.0 * x;
  const double u = -std::log(x);
  if (params.beta == 1.0) return x + x * (params.c / u);
  return x + x * (params.c * std::pow(u, -params.beta));
}

}  // namespace lsv
