#include "lsv/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "lsv/errors.hpp"

namespace lsv {

namespace {

constexpr int kBisectionCap = 200;
constexpr double kLogTol = 1e-13;

// Solves w - log(1 + c w^{-beta}) = prev for w >= prev. The left side is
// increasing in w and w - prev <= log(1 + c prev^{-beta}), which brackets the
// root.
double next_log_preimage(const MapParams& params, double prev) {
  const double step_max = std::log1p(params.c * std::pow(prev, -params.beta));
  double lo = prev;
  double hi = prev + step_max;
  auto residual = [&](double w) { return w - std::log1p(params.c * std::pow(w, -params.beta)) - prev; };
  for (int it = 0; it < kBisectionCap; ++it) {
    if (hi - lo <= kLogTol) return 0.5 * (lo + hi);
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return mid;
    if (residual(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw ConvergenceError("compute_geometry: bisection did not converge at u = " +
                         std::to_string(prev));
}

}  // namespace

double GeometrySequence::y(std::size_t n) const {
  // Powers of two are exact for the doubling map.
  const double un = u.at(n);
  if (params.is_doubling()) return std::ldexp(0.5, -static_cast<int>(std::min<std::size_t>(n, 1100)));
  return std::exp(-un);
}

GeometrySequence compute_geometry(const MapParams& params, std::size_t max_index) {
  if (max_index < 1) throw std::invalid_argument("compute_geometry: max_index must be >= 1");
  GeometrySequence g;
  g.params = params;
  g.u.resize(max_index + 1);
  g.u[0] = std::log(2.0);
  for (std::size_t n = 0; n < max_index; ++n) {
    if (params.beta == 0.0) {
      g.u[n + 1] = static_cast<double>(n + 2) * std::log(2.0);
    } else {
      g.u[n + 1] = next_log_preimage(params, g.u[n]);
    }
  }
  return g;
}

double return_tail_exact(const GeometrySequence& geometry, std::size_t n) {
  if (n <= 1) return 1.0;
  if (n - 2 > geometry.max_index()) {
    throw std::out_of_range("return_tail_exact: n = " + std::to_string(n) +
                            " exceeds max_index + 2");
  }
  return geometry.y(n - 2);
}

CellOffsets return_cell_offsets(const GeometrySequence& geometry, std::size_t n) {
  if (n < 1 || n - 1 > geometry.max_index()) {
    throw std::out_of_range("return_cell_offsets: cell index out of range");
  }
  const double upper = n == 1 ? 1.0 : geometry.y(n - 2);
  return {geometry.y(n - 1), upper};
}

Envelope fit_envelope(const GeometrySequence& geometry) {
  Envelope e{std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t n = 1; n <= geometry.max_index(); ++n) {
    const double ratio = geometry.u[n] / std::pow(static_cast<double>(n), geometry.params.gamma);
    e.lower = std::min(e.lower, ratio);
    e.upper = std::max(e.upper, ratio);
  }
  return e;
}

}  // namespace lsv
