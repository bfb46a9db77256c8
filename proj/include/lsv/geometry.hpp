#pragma once

#include <cstddef>
#include <vector>

#include "lsv/map.hpp"

namespace lsv {

// Backward orbit of 1/2 under the left inverse branch, y_n = S^n(1/2), held in
// log domain as u[n] = -log y_n so that it stays representable long after
// y_n underflows. Derived sets: I_n = (0, y_n], J_n = (1/2, y_n/2 + 1/2].
struct GeometrySequence {
  MapParams params;
  std::vector<double> u;

  std::size_t max_index() const { return u.size() - 1; }
  double log_y(std::size_t n) const { return -u.at(n); }
  // Linear-domain y_n; underflows to 0 once u[n] > ~745.
  double y(std::size_t n) const;
  // Right endpoint of J_n.
  double j_right(std::size_t n) const { return 0.5 * y(n) + 0.5; }
};

GeometrySequence compute_geometry(const MapParams& params, std::size_t max_index);

// m(R >= n) for normalized Lebesgue measure on Y = (1/2, 1]:
// 1 for n <= 1 and y_{n-2} otherwise, since {R >= n} = J_{n-2}.
double return_tail_exact(const GeometrySequence& geometry, std::size_t n);

// Offsets s = 2x - 1 bounding the return-time cell {R = n} = (U(y_{n-1}), U(y_{n-2})],
// with the convention y_{-1} = 1. Returned as the pair (y_{n-1}, y_{n-2}).
struct CellOffsets {
  double lower;
  double upper;
};
CellOffsets return_cell_offsets(const GeometrySequence& geometry, std::size_t n);

// Best constants in e^{-upper n^gamma} <= y_n <= e^{-lower n^gamma} over
// 1 <= n <= max_index; only their existence is known analytically.
struct Envelope {
  double lower;
  double upper;
};
Envelope fit_envelope(const GeometrySequence& geometry);

}  // namespace lsv
