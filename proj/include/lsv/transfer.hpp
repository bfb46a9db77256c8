#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lsv/map.hpp"
#include "lsv/observables.hpp"

namespace lsv {

// Partition of (0, 1] into cells (b_i, b_{i+1}]. Spacing is geometric on
// (floor, 1/2] and uniform on [1/2, 1]; the first cell absorbs (0, floor), so
// its left edge is 0 for every measure computation.
struct UlamGrid {
  std::vector<double> breakpoints;  // b_0 = floor < ... < b_M = 1
  double floor = 1e-12;

  std::size_t cells() const { return breakpoints.size() - 1; }
  double left(std::size_t i) const { return i == 0 ? 0.0 : breakpoints[i]; }
  double right(std::size_t i) const { return breakpoints[i + 1]; }
  double width(std::size_t i) const { return right(i) - left(i); }
  double mid(std::size_t i) const { return 0.5 * (left(i) + right(i)); }
  // Cell containing x in (0, 1].
  std::size_t locate(double x) const;
};

inline constexpr std::size_t kMinGridCells = 256;

// left_cells defaults to cells / 2.
UlamGrid make_grid(std::size_t cells, double floor = 1e-12, std::size_t left_cells = 0);

// Row-stochastic Ulam matrix P[i][j] = |cell_i ∩ T^{-1}(cell_j)| / |cell_i| in
// CSR form.
class UlamOperator {
 public:
  const UlamGrid& grid() const { return grid_; }
  const MapParams& params() const { return params_; }
  std::size_t nonzeros() const { return values_.size(); }
  std::size_t row_nonzeros(std::size_t i) const { return row_start_[i + 1] - row_start_[i]; }
  double row_sum(std::size_t i) const;
  double entry(std::size_t i, std::size_t j) const;

  // out = in * P (push-forward of a measure given by cell masses).
  void push_forward(std::span<const double> in, std::span<double> out) const;
  // out = P * in (conditional expectation of a cell function one step ahead).
  void pull_back(std::span<const double> in, std::span<double> out) const;

 private:
  friend UlamOperator build_ulam(const MapParams&, const UlamGrid&, unsigned);
  MapParams params_;
  UlamGrid grid_;
  std::vector<std::size_t> row_start_;
  std::vector<std::size_t> cols_;
  std::vector<double> values_;
};

UlamOperator build_ulam(const MapParams& params, const UlamGrid& grid, unsigned threads = 1);

// Piecewise-constant invariant density on the grid.
struct DensityEstimate {
  UlamGrid grid;
  std::vector<double> values;      // density w.r.t. Lebesgue
  std::vector<double> masses;      // values[i] * width(i)
  std::vector<double> cumulative;  // cumulative[i] = mass of cells 0..i-1; size cells+1
  std::size_t iterations = 0;

  // nu((0, z]) with linear interpolation inside the cell holding z.
  double mass_below(double z) const;
  // nu((a, b]).
  double measure(double a, double b) const { return mass_below(b) - mass_below(a); }
  double value_at(double x) const { return values[grid.locate(x)]; }

  static DensityEstimate from_masses(UlamGrid grid, std::vector<double> masses);
};

DensityEstimate invariant_density(const UlamOperator& op, double tol = 1e-12,
                                  std::size_t max_iterations = 1'000'000);

// Midpoint-rule integral of obs against the density. Throws ResolutionError if
// obs varies by more than 10% of max(|f|, 1) across a cell of mass > 1e-6.
double integrate(const Observable& obs, const DensityEstimate& density);

// Copy of obs carrying its nu-mean.
Observable attach_nu_mean(const Observable& obs, const DensityEstimate& density);

// cov_nu(f, f o T^k) for k = 0..n_max, by pushing (f - nu(f)) dnu through P.
std::vector<double> correlation_series(const UlamOperator& op, const DensityEstimate& density,
                                       const Observable& obs, std::size_t n_max);
double correlation(const UlamOperator& op, const DensityEstimate& density, const Observable& obs,
                   std::size_t n);

struct VarianceConstants {
  double V = 0.0;       // Var + 2 sum |cov_i|
  double sigma2 = 0.0;  // Var + 2 sum cov_i
  double variance = 0.0;
  std::size_t terms = 0;  // last lag included
  double truncation_bound = 0.0;
};

// Sums correlations until three consecutive |cov| fall below 1e-10 cov_0.
// Throws TailNotNegligibleError if that does not happen by n_max.
VarianceConstants variance_constants(const UlamOperator& op, const DensityEstimate& density,
                                     const Observable& obs, std::size_t n_max = 100'000);

// int (phi o T) psi dnu two ways: through the operator on cell values, and by
// composing phi with T pointwise on `sub` points per cell.
double pairing_by_operator(const UlamOperator& op, const DensityEstimate& density,
                           const Observable& phi, const Observable& psi);
double pairing_by_quadrature(const MapParams& params, const DensityEstimate& density,
                             const Observable& phi, const Observable& psi, std::size_t sub = 16);

}  // namespace lsv
