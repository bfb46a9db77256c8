#include "lsv/model.hpp"

namespace lsv {

Model build_model(const MapParams& params, std::size_t cells, std::size_t geometry_max, unsigned threads) {
  UlamGrid grid = make_grid(cells);
  UlamOperator op = build_ulam(params, grid, threads);
  DensityEstimate density = invariant_density(op);
  return Model{params, compute_geometry(params, geometry_max), std::move(grid), std::move(op), std::move(density)};
}

}  // namespace lsv
