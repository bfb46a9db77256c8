#include "lsv/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lsv/errors.hpp"

namespace lsv {

namespace {

struct LineFit {
  double slope;
  double intercept;
  double r_squared;
};

LineFit least_squares(std::span<const double> xs, std::span<const double> ys) {
  const double k = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) throw InsufficientPointsError("least squares: abscissae are all equal");
  const double slope = sxy / sxx;
  const double r2 = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return {slope, my - slope * mx, r2};
}

LineFit log_log_fit(const std::vector<double>& t, const std::vector<double>& p) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.size(); ++i) {
    xs.push_back(std::log(t[i]));
    ys.push_back(std::log(-std::log(p[i])));
  }
  return least_squares(xs, ys);
}

}  // namespace

RateFit fit_stretched_exponent(std::span<const RatePoint> series, const FitOptions& options) {
  std::vector<double> xs, ys;
  RateFit fit;
  fit.n_min = std::numeric_limits<double>::infinity();
  fit.n_max = -std::numeric_limits<double>::infinity();
  for (const auto& pt : series) {
    if (pt.n < options.min_n || pt.n > options.max_n) continue;
    if (pt.hits && *pt.hits < options.min_hits) continue;
    if (!(pt.n > 0.0)) throw std::invalid_argument("fit_stretched_exponent: n must be > 0");
    if (!(pt.p > 0.0 && pt.p < 1.0)) {
      throw std::invalid_argument("fit_stretched_exponent: p = " + std::to_string(pt.p) + " outside (0, 1)");
    }
    xs.push_back(std::log(pt.n));
    ys.push_back(std::log(-std::log(pt.p)));
    fit.n_min = std::min(fit.n_min, pt.n);
    fit.n_max = std::max(fit.n_max, pt.n);
  }
  if (xs.size() < kMinFitPoints) {
    throw InsufficientPointsError("fit_stretched_exponent: " + std::to_string(xs.size()) +
                                  " usable points, need " + std::to_string(kMinFitPoints));
  }
  const LineFit lf = least_squares(xs, ys);
  fit.exponent = lf.slope;
  fit.log_prefactor = lf.intercept;
  fit.r_squared = lf.r_squared;
  fit.points_used = xs.size();
  return fit;
}

std::vector<RatePoint> rate_points(std::span<const DeviationRecord> records) {
  std::vector<RatePoint> pts;
  pts.reserve(records.size());
  for (const auto& r : records) pts.push_back({static_cast<double>(r.n), r.p_hat, r.hits});
  return pts;
}

OptAReport check_thm_opt_a(const MapParams& params, const GeometrySequence& geometry,
                           const DensityEstimate& density, double nu_f,
                           std::span<const DeviationRecord> records, double exponent_tolerance,
                           double slack_sigmas) {
  if (!(nu_f > 0.0)) throw std::invalid_argument("check_thm_opt_a: nu(f) must be > 0");
  OptAReport rep;
  rep.nu_f = nu_f;
  rep.gamma = params.gamma;
  rep.exponent_tolerance = exponent_tolerance;
  std::vector<DeviationRecord> kept;
  for (const auto& r : records) {
    if (static_cast<double>(r.n) <= 2.0 / nu_f) {
      ++rep.excluded;
      continue;
    }
    if (r.n > geometry.max_index()) {
      throw std::out_of_range("check_thm_opt_a: geometry does not reach n = " + std::to_string(r.n));
    }
    kept.push_back(r);
    OptALowerRow row;
    row.n = r.n;
    row.p_hat = r.p_hat;
    row.stderr_hat = r.stderr_hat();
    row.nu_j = density.measure(kHalf, geometry.j_right(r.n));
    row.ok = row.p_hat + slack_sigmas * row.stderr_hat >= row.nu_j;
    rep.rows.push_back(row);
  }
  rep.lower_bound_ok = !rep.rows.empty() &&
                       std::all_of(rep.rows.begin(), rep.rows.end(), [](const auto& r) { return r.ok; });
  try {
    const auto pts = rate_points(kept);
    rep.fit = fit_stretched_exponent(pts);
    rep.exponent_ok = std::fabs(rep.fit->exponent - params.gamma) <= exponent_tolerance;
  } catch (const InsufficientPointsError& e) {
    rep.fit_error = e.what();
  }
  rep.pass = rep.lower_bound_ok && rep.exponent_ok;
  return rep;
}

OptBReport check_thm_opt_b(const MapParams& params, const GeometrySequence& geometry,
                           const DensityEstimate& density, double nu_f, std::span<const DeviationRecord> records,
                           double delta, double epsilon, double exponent_tolerance, double slack_sigmas) {
  if (!(delta > 0.0)) throw std::invalid_argument("check_thm_opt_b: delta must be > 0");
  OptBReport rep;
  rep.delta = delta;
  rep.nu_f = nu_f;
  rep.epsilon = epsilon;
  rep.exponent_tolerance = exponent_tolerance;
  const double gd = params.gamma * delta;
  rep.target_exponent = params.gamma / (1.0 + gd);
  rep.upsilon2 = fit_envelope(geometry).lower;

  const auto pts = rate_points(records);
  rep.fit = fit_stretched_exponent(pts);
  rep.exponent_ok = std::fabs(rep.fit.exponent - rep.target_exponent) <= exponent_tolerance;

  std::size_t applicable = 0;
  rep.mechanism_ok = true;
  for (const auto& r : records) {
    OptBMechanismRow row;
    row.n = r.n;
    // Ceiling keeps upsilon2^delta m^{1+gd} / (1+gd) >= (nu(f) + eps) n.
    const double base = (1.0 + gd) / std::pow(rep.upsilon2, delta) * (nu_f + epsilon) * static_cast<double>(r.n);
    row.m = static_cast<std::size_t>(std::ceil(std::pow(base, 1.0 / (1.0 + gd))));
    row.p_hat = r.p_hat;
    row.stderr_hat = r.stderr_hat();
    row.applicable = row.m >= 1 && row.m <= r.n && row.m <= geometry.max_index();
    if (row.applicable) {
      ++applicable;
      row.nu_i_m = density.mass_below(geometry.y(row.m));
      row.ok = row.nu_i_m <= row.p_hat + slack_sigmas * row.stderr_hat;
      rep.mechanism_ok = rep.mechanism_ok && row.ok;
    }
    rep.rows.push_back(row);
  }
  rep.mechanism_ok = rep.mechanism_ok && applicable > 0;
  rep.pass = rep.exponent_ok && rep.mechanism_ok;
  return rep;
}

std::string to_string(MdpStatus status) {
  switch (status) {
    case MdpStatus::Pass: return "pass";
    case MdpStatus::AsymptoticsNotReached: return "asymptotics not reached";
    case MdpStatus::InsufficientData: return "insufficient data";
  }
  return "unknown";
}

MdpReport check_mdp(std::span<const DeviationRecord> records, std::span<const MdpQuery> queries, double sigma2,
                    double x, std::uint64_t min_hits) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("check_mdp: sigma2 must be > 0");
  if (!(x > 0.0)) throw std::invalid_argument("check_mdp: x must be > 0");
  if (records.size() != queries.size()) throw std::invalid_argument("check_mdp: records and queries differ in length");
  MdpReport rep;
  rep.sigma2 = sigma2;
  rep.x = x;
  rep.target = -x * x / (2.0 * sigma2);
  for (std::size_t i = 0; i < records.size(); ++i) {
    MdpRow row;
    row.n = records[i].n;
    row.a_n = queries[i].a_n;
    row.p_hat = records[i].p_hat;
    row.hits = records[i].hits;
    row.usable = row.hits >= min_hits && row.p_hat < 1.0;
    if (row.hits > 0) {
      row.scaled_log = row.a_n * std::log(row.p_hat);
      row.ratio = row.scaled_log / rep.target;
    } else {
      row.scaled_log = -std::numeric_limits<double>::infinity();
      row.ratio = std::numeric_limits<double>::infinity();
    }
    rep.rows.push_back(row);
  }
  std::vector<const MdpRow*> usable;
  for (const auto& r : rep.rows) {
    if (r.usable) usable.push_back(&r);
  }
  std::sort(usable.begin(), usable.end(), [](auto a, auto b) { return a->n < b->n; });
  if (usable.empty()) {
    rep.status = MdpStatus::InsufficientData;
    return rep;
  }
  rep.final_n = usable.back()->n;
  rep.final_ratio = usable.back()->ratio;
  rep.trend_toward_target = true;
  for (std::size_t i = 1; i < usable.size(); ++i) {
    if (std::fabs(std::log(usable[i]->ratio)) > std::fabs(std::log(usable[i - 1]->ratio))) {
      rep.trend_toward_target = false;
    }
  }
  rep.status = rep.final_ratio >= 0.5 && rep.final_ratio <= 2.0 ? MdpStatus::Pass : MdpStatus::AsymptoticsNotReached;
  return rep;
}

ConcentrationReport check_concentration(std::span<const DeviationRecord> records, std::size_t n, double lipschitz,
                                        double gamma, std::uint64_t min_hits) {
  ConcentrationReport rep;
  rep.n = n;
  rep.lipschitz = lipschitz;
  rep.gamma = gamma;
  const double sum_l2 = static_cast<double>(n) * lipschitz * lipschitz;
  auto denom = [&](double t) { return sum_l2 + 1.0 + std::pow(t, 2.0 - gamma); };

  std::vector<double> ts, ps;
  for (const auto& r : records) {
    ConcentrationRow row;
    row.t = r.threshold;
    row.p_hat = r.p_hat;
    row.hits = r.hits;
    row.usable = r.threshold > 0.0 && r.hits >= min_hits && r.p_hat > 0.0 && r.p_hat < 1.0;
    if (row.usable) {
      rep.kappa_fit = std::max(rep.kappa_fit, row.t * row.t / (denom(row.t) * std::log(2.0 / row.p_hat)));
    }
    rep.rows.push_back(row);
  }
  std::sort(rep.rows.begin(), rep.rows.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  for (const auto& row : rep.rows) {
    if (row.usable) {
      ts.push_back(row.t);
      ps.push_back(row.p_hat);
    }
  }
  rep.points_used = ts.size();
  if (ts.size() < kMinFitPoints) {
    throw InsufficientPointsError("check_concentration: " + std::to_string(ts.size()) + " usable t-points, need " +
                                  std::to_string(kMinFitPoints));
  }
  for (auto& row : rep.rows) {
    row.bound = row.t > 0.0 ? 2.0 * std::exp(-row.t * row.t / (rep.kappa_fit * denom(row.t))) : 2.0;
    // Rows below min_hits are binomial noise and do not constrain kappa.
    if (row.usable && row.p_hat > row.bound * (1.0 + 1e-12)) ++rep.violations;
  }

  const std::size_t half = (ts.size() + 1) / 2;
  const std::vector<double> t_low(ts.begin(), ts.begin() + static_cast<std::ptrdiff_t>(half));
  const std::vector<double> p_low(ps.begin(), ps.begin() + static_cast<std::ptrdiff_t>(half));
  const std::vector<double> t_high(ts.end() - static_cast<std::ptrdiff_t>(half), ts.end());
  const std::vector<double> p_high(ps.end() - static_cast<std::ptrdiff_t>(half), ps.end());
  rep.slope_low = log_log_fit(t_low, p_low).slope;
  rep.slope_high = log_log_fit(t_high, p_high).slope;
  rep.bending = rep.slope_high < rep.slope_low - kBendingMargin;
  rep.shape_ok = gamma < 1.0 ? (rep.bending && rep.slope_high < 2.0) : !rep.bending;
  return rep;
}

}  // namespace lsv
