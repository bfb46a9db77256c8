#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lsv/geometry.hpp"
#include "lsv/map.hpp"

namespace lsv {

// One first return to the base Y = (1/2, 1].
struct InducedSample {
  double start = 0.0;
  std::size_t return_time = 0;
  double landing = 0.0;
};

// Safety cap on the number of iterations before a return. Starts with
// 2y - 1 >= kFloatFloor always return well before it.
std::size_t return_time_cap(const MapParams& params);

// Iterates T from y in (1/2, 1) until the orbit re-enters Y. y = 1 is the
// fixed point and is rejected with std::domain_error; exceeding the cap throws
// OrbitError.
InducedSample return_time(const MapParams& params, double y);

// Same orbit, parametrized by the first image s = 2y - 1 in (0, 1]. Keeps full
// relative precision for starts just above 1/2; `start` holds (s + 1) / 2.
InducedSample return_time_from_offset(const MapParams& params, double s);

struct InducedCellStats {
  std::size_t return_time = 0;
  std::size_t pairs = 0;
  double min_expansion = 0.0;
  double max_expansion = 0.0;
  double max_distortion = 0.0;
};

// Expansion |F(y) - F(x)| / |y - x| and distortion
// |log F'(y) - log F'(x)| / |F(y) - F(x)| sampled on pairs from one cell {R = n}.
struct InducedAxiomsReport {
  std::size_t pairs = 0;
  std::size_t cells_sampled = 0;
  double min_expansion = 0.0;
  // Empirical distortion constant; reported, never compared to a bound.
  double max_distortion = 0.0;
  bool expansion_ok = false;
  std::vector<InducedCellStats> cells;
};

InducedAxiomsReport verify_induced_axioms(const MapParams& params, const GeometrySequence& geometry,
                                          std::size_t pair_samples, std::uint64_t seed);

}  // namespace lsv
