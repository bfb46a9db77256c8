#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lsv/geometry.hpp"
#include "lsv/montecarlo.hpp"
#include "lsv/transfer.hpp"

namespace lsv {

struct RatePoint {
  double n;
  double p;
  std::optional<std::uint64_t> hits;
};

// Points below min_n, above max_n, or with fewer than min_hits hits (when hit
// counts are known) are dropped before fitting.
struct FitOptions {
  double min_n = 10.0;
  double max_n = std::numeric_limits<double>::infinity();
  std::uint64_t min_hits = 30;
};

// log(-log p) = log_prefactor + exponent * log n, by ordinary least squares.
struct RateFit {
  double exponent = 0.0;
  double log_prefactor = 0.0;
  double r_squared = 0.0;
  double n_min = 0.0;
  double n_max = 0.0;
  std::size_t points_used = 0;
};

inline constexpr std::size_t kMinFitPoints = 4;

// Throws InsufficientPointsError with fewer than 4 points after filtering and
// std::invalid_argument if a kept point has p outside (0, 1).
RateFit fit_stretched_exponent(std::span<const RatePoint> series, const FitOptions& options = {});

std::vector<RatePoint> rate_points(std::span<const DeviationRecord> records);

// Lower-bound mechanism and rate exponent for nu(|S_n(f)| > n nu(f) / 2) with
// the Lipschitz ramp observable.
struct OptALowerRow {
  std::size_t n = 0;
  double p_hat = 0.0;
  double stderr_hat = 0.0;
  double nu_j = 0.0;  // nu(J_n) by quadrature of the density
  bool ok = false;
};

struct OptAReport {
  double nu_f = 0.0;
  double gamma = 0.0;
  double exponent_tolerance = 0.0;
  std::vector<OptALowerRow> rows;
  std::size_t excluded = 0;  // records with n <= 2 / nu(f)
  std::optional<RateFit> fit;
  std::string fit_error;
  bool lower_bound_ok = false;
  bool exponent_ok = false;
  bool pass = false;
};

OptAReport check_thm_opt_a(const MapParams& params, const GeometrySequence& geometry,
                           const DensityEstimate& density, double nu_f,
                           std::span<const DeviationRecord> records, double exponent_tolerance = 0.15,
                           double slack_sigmas = 4.0);

// Rate exponent gamma / (1 + gamma delta) for nu(|S_n(f)| > n) with
// f = |log x|^delta, plus the set inclusion I_m ⊂ {S_n(f) >= eps n}.
struct OptBMechanismRow {
  std::size_t n = 0;
  std::size_t m = 0;
  bool applicable = false;  // m <= n and y_m resolved by the geometry
  double nu_i_m = 0.0;
  double p_hat = 0.0;
  double stderr_hat = 0.0;
  bool ok = true;
};

struct OptBReport {
  double delta = 0.0;
  double nu_f = 0.0;
  double epsilon = 0.0;
  double upsilon2 = 0.0;
  double target_exponent = 0.0;
  double exponent_tolerance = 0.0;
  RateFit fit;
  std::vector<OptBMechanismRow> rows;
  bool exponent_ok = false;
  bool mechanism_ok = false;
  bool pass = false;
};

// Throws InsufficientPointsError when the records do not support a fit.
OptBReport check_thm_opt_b(const MapParams& params, const GeometrySequence& geometry,
                           const DensityEstimate& density, double nu_f, std::span<const DeviationRecord> records,
                           double delta, double epsilon = 1.0, double exponent_tolerance = 0.12,
                           double slack_sigmas = 4.0);

enum class MdpStatus { Pass, AsymptoticsNotReached, InsufficientData };
std::string to_string(MdpStatus status);

struct MdpRow {
  std::size_t n = 0;
  double a_n = 0.0;
  double p_hat = 0.0;
  std::uint64_t hits = 0;
  double scaled_log = 0.0;  // a_n log p_hat
  double ratio = 0.0;       // scaled_log / target
  bool usable = false;
};

struct MdpReport {
  double sigma2 = 0.0;
  double x = 0.0;
  double target = 0.0;  // -x^2 / (2 sigma^2)
  std::vector<MdpRow> rows;
  std::optional<std::size_t> final_n;
  double final_ratio = 0.0;
  bool trend_toward_target = false;
  MdpStatus status = MdpStatus::InsufficientData;
};

// records[i] must correspond to queries[i]. Rows with fewer than min_hits hits
// are tabulated but unusable.
MdpReport check_mdp(std::span<const DeviationRecord> records, std::span<const MdpQuery> queries, double sigma2,
                    double x, std::uint64_t min_hits = 100);

struct ConcentrationRow {
  double t = 0.0;
  double p_hat = 0.0;
  std::uint64_t hits = 0;
  double bound = 0.0;  // 2 exp(-t^2 / (kappa (n L^2 + 1 + t^{2-gamma})))
  bool usable = false;
};

struct ConcentrationReport {
  std::size_t n = 0;
  double lipschitz = 0.0;
  double gamma = 0.0;
  double kappa_fit = 0.0;
  std::size_t violations = 0;  // usable rows with p_hat above the fitted bound
  std::size_t points_used = 0;
  // OLS slopes of log(-log p) against log t on the lower and upper halves of
  // the usable t-grid.
  double slope_low = 0.0;
  double slope_high = 0.0;
  bool bending = false;   // slope_high < slope_low - kBendingMargin
  bool shape_ok = false;  // bending with slope_high < 2 when gamma < 1; no bending when gamma = 1
  std::vector<ConcentrationRow> rows;
};

inline constexpr double kBendingMargin = 0.1;

ConcentrationReport check_concentration(std::span<const DeviationRecord> records, std::size_t n, double lipschitz,
                                        double gamma, std::uint64_t min_hits = 30);

}  // namespace lsv
