#pragma once

#include <cstddef>

#include "lsv/geometry.hpp"
#include "lsv/map.hpp"
#include "lsv/transfer.hpp"

namespace lsv {

// Everything derived from one parameter value: geometry, Ulam operator and its
// invariant density.
struct Model {
  MapParams params;
  GeometrySequence geometry;
  UlamGrid grid;
  UlamOperator op;
  DensityEstimate density;
};

Model build_model(const MapParams& params, std::size_t cells, std::size_t geometry_max, unsigned threads);

}  // namespace lsv
