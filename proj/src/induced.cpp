#include "lsv/induced.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "lsv/errors.hpp"
#include "lsv/rng.hpp"

namespace lsv {

namespace {

// Forward image of the offset s = 2x - 1 under the remaining n - 1 steps of
// the induced map, with log F'(x) accumulated by the chain rule.
struct InducedImage {
  double value;
  double log_derivative;
  bool single_cell;
};

InducedImage induced_from_offset(const MapParams& params, double s, std::size_t n) {
  double x = s;
  double log_d = std::log(2.0);
  bool ok = true;
  for (std::size_t k = 1; k < n; ++k) {
    if (!(x <= kHalf)) ok = false;
    log_d += std::log(map_derivative(params, x));
    x = apply_map_unchecked(params, x);
  }
  if (!(x > kHalf)) ok = false;
  return {x, log_d, ok};
}

// Skip cells whose offset width is below what double precision resolves
// relative to the offsets themselves.
constexpr double kMinCellOffset = 1e-10;

}  // namespace

std::size_t return_time_cap(const MapParams& params) {
  const double depth = -std::log(kFloatFloor) + 1.0;
  const double cap = 10.0 * std::pow(depth, 1.0 + params.beta) / params.c;
  return static_cast<std::size_t>(std::ceil(cap)) + 64;
}

InducedSample return_time(const MapParams& params, double y) {
  if (!(y > kHalf && y < 1.0)) {
    throw std::domain_error("return_time: start must lie in (1/2, 1), got " + std::to_string(y));
  }
  InducedSample r = return_time_from_offset(params, 2.0 * y - 1.0);
  r.start = y;
  return r;
}

InducedSample return_time_from_offset(const MapParams& params, double s) {
  if (!(s > 0.0 && s <= 1.0)) {
    throw std::domain_error("return_time_from_offset: offset must lie in (0, 1], got " + std::to_string(s));
  }
  const std::size_t cap = return_time_cap(params);
  double x = s;
  std::size_t k = 1;
  while (x <= kHalf) {
    if (x <= 0.0) throw OrbitError("return_time: orbit reached 0");
    if (++k > cap) {
      throw OrbitError("return_time: orbit trapped for more than " + std::to_string(cap) +
                       " steps from offset " + std::to_string(s));
    }
    x = apply_map_unchecked(params, x);
  }
  return {0.5 * (s + 1.0), k, x};
}

InducedAxiomsReport verify_induced_axioms(const MapParams& params, const GeometrySequence& geometry,
                                          std::size_t pair_samples, std::uint64_t seed) {
  if (pair_samples < 1) throw std::invalid_argument("verify_induced_axioms: pair_samples must be >= 1");

  std::size_t n_cells = 1;
  while (n_cells <= geometry.max_index() && geometry.y(n_cells) >= kMinCellOffset) ++n_cells;
  // Cells 1..n_cells have y_{n-1} >= kMinCellOffset.

  InducedAxiomsReport report;
  report.cells.resize(n_cells);
  for (std::size_t n = 1; n <= n_cells; ++n) {
    auto& c = report.cells[n - 1];
    c.return_time = n;
    c.min_expansion = std::numeric_limits<double>::infinity();
  }

  RngStream rng(seed, 0x1d, 0);
  for (std::size_t i = 0; i < pair_samples; ++i) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform_open() * static_cast<double>(n_cells));
    const auto [lo, hi] = return_cell_offsets(geometry, n);
    const double width = hi - lo;
    auto draw = [&] { return lo + width * (1e-6 + (1.0 - 2e-6) * rng.uniform_open()); };
    const double sa = draw();
    const double sb = draw();
    if (sa == sb) continue;
    const InducedImage fa = induced_from_offset(params, sa, n);
    const InducedImage fb = induced_from_offset(params, sb, n);
    if (!fa.single_cell || !fb.single_cell) {
      throw std::logic_error("verify_induced_axioms: sampled pair left the cell {R = " +
                             std::to_string(n) + "}");
    }
    const double dx = 0.5 * std::fabs(sa - sb);
    const double dF = std::fabs(fa.value - fb.value);
    const double expansion = dF / dx;
    const double distortion = dF > 0.0 ? std::fabs(fa.log_derivative - fb.log_derivative) / dF : 0.0;

    auto& c = report.cells[n - 1];
    ++c.pairs;
    c.min_expansion = std::min(c.min_expansion, expansion);
    c.max_expansion = std::max(c.max_expansion, expansion);
    c.max_distortion = std::max(c.max_distortion, distortion);
    ++report.pairs;
  }

  report.min_expansion = std::numeric_limits<double>::infinity();
  for (const auto& c : report.cells) {
    if (c.pairs == 0) continue;
    ++report.cells_sampled;
    report.min_expansion = std::min(report.min_expansion, c.min_expansion);
    report.max_distortion = std::max(report.max_distortion, c.max_distortion);
  }
  report.expansion_ok = report.pairs > 0 && report.min_expansion >= 2.0 - 1e-9;
  return report;
}

}  // namespace lsv
