#include "lsv/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lsv/errors.hpp"
#include "lsv/parallel.hpp"

namespace lsv {

std::size_t UlamGrid::locate(double x) const {
  if (x <= breakpoints[1]) return 0;
  auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), x);
  const auto idx = static_cast<std::size_t>(it - breakpoints.begin());
  return std::min(idx, cells()) - 1;
}

UlamGrid make_grid(std::size_t cells, double floor, std::size_t left_cells) {
  if (cells < kMinGridCells) {
    throw std::invalid_argument("make_grid: need at least " + std::to_string(kMinGridCells) + " cells");
  }
  if (!(floor > 0.0 && floor < kHalf)) throw std::invalid_argument("make_grid: floor must lie in (0, 1/2)");
  if (left_cells == 0) left_cells = cells / 2;
  if (left_cells >= cells) throw std::invalid_argument("make_grid: left_cells must be < cells");
  const std::size_t right_cells = cells - left_cells;

  UlamGrid g;
  g.floor = floor;
  g.breakpoints.resize(cells + 1);
  const double log_span = std::log(kHalf / floor);
  for (std::size_t i = 0; i < left_cells; ++i) {
    g.breakpoints[i] = floor * std::exp(log_span * static_cast<double>(i) / static_cast<double>(left_cells));
  }
  g.breakpoints[0] = floor;
  g.breakpoints[left_cells] = kHalf;
  for (std::size_t j = 1; j < right_cells; ++j) {
    g.breakpoints[left_cells + j] = kHalf + kHalf * static_cast<double>(j) / static_cast<double>(right_cells);
  }
  g.breakpoints[cells] = 1.0;
  for (std::size_t i = 1; i <= cells; ++i) {
    if (!(g.breakpoints[i] > g.breakpoints[i - 1])) {
      throw std::logic_error("make_grid: breakpoints not strictly increasing");
    }
  }
  return g;
}

double UlamOperator::row_sum(std::size_t i) const {
  double s = 0.0;
  for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) s += values_[k];
  return s;
}

double UlamOperator::entry(std::size_t i, std::size_t j) const {
  for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) {
    if (cols_[k] == j) return values_[k];
  }
  return 0.0;
}

void UlamOperator::push_forward(std::span<const double> in, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t n = grid_.cells();
  for (std::size_t i = 0; i < n; ++i) {
    const double m = in[i];
    if (m == 0.0) continue;
    for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) out[cols_[k]] += m * values_[k];
  }
}

void UlamOperator::pull_back(std::span<const double> in, std::span<double> out) const {
  const std::size_t n = grid_.cells();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) s += values_[k] * in[cols_[k]];
    out[i] = s;
  }
}

// T^{-1}(cell_j) = (S(l_j), S(r_j)] ∪ (U(l_j), U(r_j)]. Each source cell lies
// on one branch (1/2 is a breakpoint), so its row is the overlap of the cell
// with consecutive preimage intervals of that branch.
UlamOperator build_ulam(const MapParams& params, const UlamGrid& grid, unsigned threads) {
  const std::size_t n = grid.cells();
  // edges[j] = left edge of cell j (j < n), edges[n] = 1.
  std::vector<double> edges(n + 1);
  for (std::size_t j = 0; j < n; ++j) edges[j] = grid.left(j);
  edges[n] = 1.0;

  std::vector<double> pre_left(n + 1);
  parallel_for(n + 1, threads, [&](std::size_t j) {
    const double e = edges[j];
    pre_left[j] = e == 0.0 ? 0.0 : left_inverse(params, e);
  });

  std::vector<std::vector<std::pair<std::size_t, double>>> rows(n);
  parallel_for(n, threads, [&](std::size_t i) {
    double l = grid.left(i);
    double r = grid.right(i);
    const bool left_branch = r <= kHalf;
    if (!left_branch) {
      // Right-branch overlaps in offset coordinates s = 2x - 1, where the
      // preimage of cell j is cell j itself; (1 + e) / 2 would round away
      // the width of cells near the floor.
      l = 2.0 * l - 1.0;
      r = 2.0 * r - 1.0;
    }
    const double w = r - l;
    const std::vector<double>& pre = left_branch ? pre_left : edges;
    // First j whose preimage interval (pre[j], pre[j+1]] reaches past l.
    auto it = std::upper_bound(pre.begin(), pre.end(), l);
    std::size_t j = it == pre.begin() ? 0 : static_cast<std::size_t>(it - pre.begin()) - 1;
    auto& row = rows[i];
    for (; j < n && pre[j] < r; ++j) {
      const double overlap = std::min(r, pre[j + 1]) - std::max(l, pre[j]);
      if (overlap > 0.0) row.emplace_back(j, overlap / w);
    }
  });

  UlamOperator op;
  op.params_ = params;
  op.grid_ = grid;
  op.row_start_.resize(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) op.row_start_[i + 1] = op.row_start_[i] + rows[i].size();
  op.cols_.reserve(op.row_start_[n]);
  op.values_.reserve(op.row_start_[n]);
  for (const auto& row : rows) {
    for (const auto& [j, v] : row) {
      op.cols_.push_back(j);
      op.values_.push_back(v);
    }
  }
  return op;
}

double DensityEstimate::mass_below(double z) const {
  if (z <= 0.0) return 0.0;
  if (z >= 1.0) return cumulative.back();
  const std::size_t i = grid.locate(z);
  const double frac = (z - grid.left(i)) / grid.width(i);
  return cumulative[i] + frac * masses[i];
}

DensityEstimate DensityEstimate::from_masses(UlamGrid grid, std::vector<double> masses) {
  DensityEstimate d;
  d.grid = std::move(grid);
  d.masses = std::move(masses);
  const std::size_t n = d.grid.cells();
  d.values.resize(n);
  d.cumulative.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    d.values[i] = d.masses[i] / d.grid.width(i);
    d.cumulative[i + 1] = d.cumulative[i] + d.masses[i];
  }
  return d;
}

DensityEstimate invariant_density(const UlamOperator& op, double tol, std::size_t max_iterations) {
  const UlamGrid& grid = op.grid();
  const std::size_t n = grid.cells();
  std::vector<double> mass(n);
  for (std::size_t i = 0; i < n; ++i) mass[i] = grid.width(i);
  std::vector<double> next(n);

  for (std::size_t it = 1; it <= max_iterations; ++it) {
    op.push_forward(mass, next);
    double total = 0.0;
    for (double v : next) total += v;
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= total;
      change += std::fabs(next[i] - mass[i]);
    }
    mass.swap(next);
    if (change < tol) {
      DensityEstimate d = DensityEstimate::from_masses(grid, std::move(mass));
      d.iterations = it;
      return d;
    }
  }
  throw ConvergenceError("invariant_density: no convergence after " + std::to_string(max_iterations) +
                         " iterations");
}

namespace {

std::vector<double> cell_values(const Observable& obs, const UlamGrid& grid) {
  std::vector<double> f(grid.cells());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = obs(grid.mid(i));
  return f;
}

constexpr double kResolvedMass = 1e-6;
constexpr double kMaxCellVariation = 0.1;

}  // namespace

double integrate(const Observable& obs, const DensityEstimate& density) {
  const UlamGrid& grid = density.grid;
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    const double m = density.masses[i];
    const double fm = obs(grid.mid(i));
    if (m > kResolvedMass) {
      const double lo = obs(std::max(grid.left(i), grid.floor));
      const double hi = obs(grid.right(i));
      const double scale = std::max(std::fabs(fm), 1.0);
      if (std::fabs(hi - lo) > kMaxCellVariation * scale) {
        throw ResolutionError("integrate: " + obs.name() + " varies by " + std::to_string(std::fabs(hi - lo)) +
                              " across cell " + std::to_string(i) + "; refine the grid");
      }
    }
    sum += fm * m;
  }
  return sum;
}

Observable attach_nu_mean(const Observable& obs, const DensityEstimate& density) {
  return obs.with_nu_mean(integrate(obs, density));
}

std::vector<double> correlation_series(const UlamOperator& op, const DensityEstimate& density,
                                       const Observable& obs, std::size_t n_max) {
  const double mean = integrate(obs, density);
  const std::size_t n = density.grid.cells();
  std::vector<double> centered = cell_values(obs, density.grid);
  for (double& v : centered) v -= mean;
  std::vector<double> w(n), next(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = centered[i] * density.masses[i];

  std::vector<double> cov;
  cov.reserve(n_max + 1);
  for (std::size_t k = 0;; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * centered[i];
    cov.push_back(s);
    if (k == n_max) break;
    op.push_forward(w, next);
    w.swap(next);
  }
  return cov;
}

double correlation(const UlamOperator& op, const DensityEstimate& density, const Observable& obs,
                   std::size_t n) {
  return correlation_series(op, density, obs, n).back();
}

VarianceConstants variance_constants(const UlamOperator& op, const DensityEstimate& density,
                                     const Observable& obs, std::size_t n_max) {
  const double mean = integrate(obs, density);
  const std::size_t n = density.grid.cells();
  std::vector<double> centered = cell_values(obs, density.grid);
  for (double& v : centered) v -= mean;
  std::vector<double> w(n), next(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = centered[i] * density.masses[i];
  auto pair_with_f = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * centered[i];
    return s;
  };

  VarianceConstants vc;
  const double cov0 = pair_with_f();
  vc.variance = cov0;
  vc.V = cov0;
  vc.sigma2 = cov0;
  if (cov0 <= 1e-24 * std::max(1.0, mean * mean)) {
    vc.variance = vc.V = vc.sigma2 = 0.0;
    return vc;
  }

  const double negligible = 1e-10 * cov0;
  int quiet = 0;
  double prev_abs = cov0;
  for (std::size_t k = 1; k <= n_max; ++k) {
    op.push_forward(w, next);
    w.swap(next);
    const double c = pair_with_f();
    vc.V += 2.0 * std::fabs(c);
    vc.sigma2 += 2.0 * c;
    vc.terms = k;
    quiet = std::fabs(c) < negligible ? quiet + 1 : 0;
    if (quiet == 3) {
      const double ratio = prev_abs > 0.0 ? std::min(std::fabs(c) / prev_abs, 0.999) : 0.0;
      vc.truncation_bound = 2.0 * std::fabs(c) * ratio / (1.0 - ratio);
      return vc;
    }
    prev_abs = std::fabs(c);
  }
  throw TailNotNegligibleError("variance_constants: correlations still above 1e-10 cov_0 at lag " +
                               std::to_string(n_max));
}

double pairing_by_operator(const UlamOperator& op, const DensityEstimate& density,
                           const Observable& phi, const Observable& psi) {
  const std::size_t n = density.grid.cells();
  const std::vector<double> f = cell_values(phi, density.grid);
  const std::vector<double> g = cell_values(psi, density.grid);
  std::vector<double> pf(n);
  op.pull_back(f, pf);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += density.masses[i] * g[i] * pf[i];
  return s;
}

double pairing_by_quadrature(const MapParams& params, const DensityEstimate& density,
                             const Observable& phi, const Observable& psi, std::size_t sub) {
  const UlamGrid& grid = density.grid;
  double s = 0.0;
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    const double l = grid.left(i);
    const double w = grid.width(i);
    double cell = 0.0;
    for (std::size_t k = 0; k < sub; ++k) {
      const double x = l + w * (static_cast<double>(k) + 0.5) / static_cast<double>(sub);
      cell += psi(x) * phi(apply_map_unchecked(params, x));
    }
    s += density.masses[i] * cell / static_cast<double>(sub);
  }
  return s;
}

}  // namespace lsv
