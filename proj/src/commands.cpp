#include "lsv/commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "lsv/acceptance.hpp"
#include "lsv/errors.hpp"
#include "lsv/induced.hpp"
#include "lsv/io.hpp"
#include "lsv/montecarlo.hpp"

namespace lsv::cli {

using nlohmann::json;

namespace {

std::size_t parse_index(std::string_view text, std::string_view what) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw ConfigError("--n: " + std::string(what) + " '" + std::string(text) + "' is not a non-negative integer");
  }
  return value;
}

bool contains(const std::vector<std::string>& names, const std::string& name) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream ss;
  ss << std::setprecision(precision) << v;
  return ss.str();
}

std::string fmt_fit(const RateFit& fit) {
  return "exponent " + fmt(fit.exponent, 4) + ", r^2 " + fmt(fit.r_squared, 4) + ", n in [" + fmt(fit.n_min) + ", " +
         fmt(fit.n_max) + "], " + std::to_string(fit.points_used) + " points";
}

class Artifacts {
 public:
  Artifacts(std::filesystem::path dir, OutputFormat format, std::string hash)
      : dir_(std::move(dir)), format_(format), hash_(std::move(hash)) {}

  void table(const std::string& stem, const io::CsvTable& table) {
    if (format_ == OutputFormat::Csv) {
      write(stem + ".csv", io::render_csv(table, hash_));
      return;
    }
    json rows = json::array();
    for (const auto& row : table.rows) {
      json r = json::array();
      for (const auto& cell : row) {
        json parsed = json::parse(cell, nullptr, false);
        r.push_back(parsed.is_discarded() ? json(cell) : parsed);
      }
      rows.push_back(std::move(r));
    }
    write(stem + ".json", json{{"manifest", hash_}, {"columns", table.header}, {"rows", rows}}.dump(2) + "\n");
  }

  void report(const std::string& stem, json body) {
    body["manifest"] = hash_;
    write(stem + "_report.json", body.dump(2) + "\n");
  }

  void manifest(const io::RunManifest& m) { write(m.subcommand + "_manifest.json", m.to_json().dump(2) + "\n"); }

  const std::vector<std::filesystem::path>& outputs() const { return outputs_; }

 private:
  void write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    io::write_text(path, content);
    outputs_.push_back(path);
  }

  std::filesystem::path dir_;
  OutputFormat format_;
  std::string hash_;
  std::vector<std::filesystem::path> outputs_;
};

SimulationConfig sim_config(const CommandOptions& o, const MapParams& params) {
  SimulationConfig cfg;
  cfg.seed = o.seed;
  cfg.trials = *o.trials;
  cfg.params = params;
  cfg.threads = o.threads;
  cfg.validate();
  return cfg;
}

std::size_t largest(const NRange& r) { return r.values().back(); }

// Relative |cov_n| / cov_0 above this is kept for the decay fit.
constexpr double kCovarianceFitFloor = 1e-13;

const std::vector<double> kConcentrationTailProbabilities = {0.3,  0.1,  0.03, 1e-2, 3e-3,
                                                             1e-3, 3e-4, 1e-4, 3e-5, 1e-5};

void run_geometry(const CommandOptions& o, const MapParams& params, Artifacts& art, std::ostream& out) {
  const auto g = compute_geometry(params, *o.n_max);
  io::CsvTable t;
  t.header = {"n[index]", "y_n[x]", "minus_log_y_n[nats]", "scaled_log[nats/n^gamma]"};
  for (std::size_t n = 1; n <= g.max_index(); ++n) {
    t.add_row({std::to_string(n), io::format_double(g.y(n)), io::format_double(g.u[n]),
               io::format_double(g.u[n] / std::pow(static_cast<double>(n), params.gamma))});
  }
  art.table("geometry", t);
  const auto env = fit_envelope(g);
  const auto ax = verify_induced_axioms(params, g, 4000, o.seed);
  art.report("geometry", {{"envelope_lower", env.lower},
                          {"envelope_upper", env.upper},
                          {"induced_pairs", ax.pairs},
                          {"induced_cells", ax.cells_sampled},
                          {"min_expansion", ax.min_expansion},
                          {"max_distortion", ax.max_distortion},
                          {"expansion_ok", ax.expansion_ok},
                          {"return_time_cap", return_time_cap(params)}});
  std::vector<std::vector<std::string>> rows;
  for (std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{5}, std::size_t{10}, std::size_t{50},
                        std::size_t{100}, g.max_index()}) {
    if (n <= g.max_index() && (rows.empty() || rows.back()[0] != std::to_string(n))) {
      rows.push_back({std::to_string(n), fmt(g.y(n), 8), fmt(g.u[n], 8)});
    }
  }
  print_aligned(out, {"n", "y_n", "-log y_n"}, rows);
  out << "envelope exp(-" << fmt(env.upper) << " n^g) <= y_n <= exp(-" << fmt(env.lower) << " n^g)\n";
  out << "induced map: min expansion " << fmt(ax.min_expansion) << ", max distortion " << fmt(ax.max_distortion)
      << " over " << ax.pairs << " pairs\n";
}

void run_density(const CommandOptions& o, const MapParams& params, Artifacts& art, std::ostream& out) {
  const Model m = build_model(params, o.cells, 2, o.threads);
  io::CsvTable t;
  t.header = {"cell_left[x]", "cell_right[x]", "density[1/x]"};
  for (std::size_t i = 0; i < m.grid.cells(); ++i) {
    t.add_row({io::format_double(m.grid.left(i)), io::format_double(m.grid.right(i)),
               io::format_double(m.density.values[i])});
  }
  art.table("density", t);
  const auto asym = asymptote_report(m);
  const auto ramp = attach_nu_mean(Observable::item_a(m.geometry), m.density);
  json rep = to_json(asym);
  rep["iterations"] = m.density.iterations;
  rep["cells"] = m.grid.cells();
  rep["nu_item_a"] = *ramp.nu_mean();
  rep["nu_base"] = m.density.measure(kHalf, 1.0);
  art.report("density", rep);
  out << "power iteration converged in " << m.density.iterations << " steps on " << m.grid.cells() << " cells\n";
  out << "phi(x)/|log x|^beta on [" << asym.lo << ", " << asym.hi << "]: min " << fmt(asym.ratio_min) << ", max "
      << fmt(asym.ratio_max) << ", spread " << fmt(asym.spread) << "\n";
  out << "min density on [" << asym.min_density_from << ", 1]: " << fmt(asym.min_density_above) << "\n";
  out << "nu(item-a) = " << fmt(*ramp.nu_mean(), 8) << "\n";
}

void run_tails(const CommandOptions& o, const MapParams& params, Artifacts& art, std::ostream& out) {
  const std::size_t n_max = *o.n_max;
  const auto g = compute_geometry(params, std::max<std::size_t>(n_max, 2));
  const auto records = empirical_return_tail(sim_config(o, params), n_max);
  io::CsvTable t;
  t.header = {"n[iterations]", "exact[probability]", "trials[count]",      "hits[count]",
              "p_hat[probability]", "ci_low[probability]", "ci_high[probability]"};
  std::vector<RatePoint> exact_pts;
  double worst_z = 0.0;
  for (const auto& r : records) {
    const double exact = return_tail_exact(g, r.n);
    t.add_row({std::to_string(r.n), io::format_double(exact), std::to_string(r.trials), std::to_string(r.hits),
               io::format_double(r.p_hat), io::format_double(r.ci_low), io::format_double(r.ci_high)});
    if (exact > 0.0 && exact < 1.0) exact_pts.push_back({static_cast<double>(r.n), exact, std::nullopt});
    if (r.hits >= 25) {
      const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(r.trials));
      if (se > 0.0) worst_z = std::max(worst_z, std::fabs(r.p_hat - exact) / se);
    }
  }
  art.table("tails", t);
  json rep{{"max_abs_z_where_hits_ge_25", worst_z}};
  try {
    const auto fit = fit_stretched_exponent(exact_pts);
    rep["exact_fit"] = to_json(fit);
    out << "exact tail fit: " << fmt_fit(fit) << "\n";
  } catch (const InsufficientPointsError& e) {
    rep["exact_fit_error"] = e.what();
    out << "exact tail fit: " << e.what() << "\n";
  }
  try {
    const auto fit = fit_stretched_exponent(rate_points(records));
    rep["empirical_fit"] = to_json(fit);
    out << "empirical tail fit: " << fmt_fit(fit) << "\n";
  } catch (const std::exception& e) {
    rep["empirical_fit_error"] = e.what();
    out << "empirical tail fit: " << e.what() << "\n";
  }
  art.report("tails", rep);
  out << "largest |empirical - exact| / stderr where hits >= 25: " << fmt(worst_z, 3) << "\n";
}

void run_correlations(const CommandOptions& o, const MapParams& params, Artifacts& art, std::ostream& out) {
  const Model m = build_model(params, o.cells, 2, o.threads);
  const auto obs = attach_nu_mean(make_observable(*o.obs, m.geometry, o.delta, o.cutoff), m.density);
  const auto cov = correlation_series(m.op, m.density, obs, *o.n_max);
  io::CsvTable t;
  t.header = {"n[lag]", "cov[observable^2]"};
  std::vector<RatePoint> pts;
  for (std::size_t n = 0; n < cov.size(); ++n) {
    t.add_row({std::to_string(n), io::format_double(cov[n])});
    const double rel = cov[0] > 0.0 ? std::fabs(cov[n]) / cov[0] : 0.0;
    if (n >= 1 && rel > kCovarianceFitFloor && rel < 1.0) pts.push_back({static_cast<double>(n), rel, std::nullopt});
  }
  art.table("correlations", t);
  const auto vc = variance_constants(m.op, m.density, obs);
  json rep{{"observable", obs.name()}, {"nu_mean", *obs.nu_mean()}, {"variance", vc.variance}, {"V", vc.V},
           {"sigma2", vc.sigma2},     {"terms", vc.terms},           {"truncation_bound", vc.truncation_bound}};
  out << obs.name() << ": nu(f) " << fmt(*obs.nu_mean(), 8) << ", variance " << fmt(vc.variance, 8) << ", sigma^2 "
      << fmt(vc.sigma2, 8) << ", V " << fmt(vc.V, 8) << " (" << vc.terms << " lags)\n";
  try {
    const auto fit = fit_stretched_exponent(pts);
    rep["decay_fit"] = to_json(fit);
    out << "decay fit of |cov_n|/cov_0: " << fmt_fit(fit) << "\n";
  } catch (const InsufficientPointsError& e) {
    rep["decay_fit_error"] = e.what();
    out << "decay fit: " << e.what() << "\n";
  }
  art.report("correlations", rep);
}

void run_deviation(const CommandOptions& o, const MapParams& params, Artifacts& art, std::ostream& out) {
  const auto ns = o.n->values();
  const Model m = build_model(params, o.cells, largest(*o.n) + 1, o.threads);
  const auto obs = attach_nu_mean(make_observable(*o.obs, m.geometry, o.delta, o.cutoff), m.density);
  const double nu = *obs.nu_mean();
  const bool unbounded_family = *o.obs == "log-power" || *o.obs == "truncated-log-power";
  std::vector<DeviationQuery> queries;
  for (std::size_t n : ns) {
    queries.push_back({n, unbounded_family ? static_cast<double>(n) : static_cast<double>(n) * nu / 2.0});
  }
  const auto records = deviation_grid(sim_config(o, params), &m.density, obs, queries, DeviationMode::Absolute);
  art.table("deviation", io::records_table(records));

  std::vector<std::vector<std::string>> rows;
  for (const auto& r : records) {
    rows.push_back({std::to_string(r.n), fmt(r.threshold), std::to_string(r.hits), fmt(r.p_hat, 5),
                    fmt(r.ci_low, 5), fmt(r.ci_high, 5)});
  }
  print_aligned(out, {"n", "threshold", "hits", "p_hat", "ci_low", "ci_high"}, rows);

  json rep{{"observable", obs.name()}, {"nu_mean", nu}};
  if (*o.obs == "item-a") {
    const auto a = check_thm_opt_a(params, m.geometry, m.density, nu, records);
    rep["bounded_rate_check"] = to_json(a);
    if (a.fit) out << "fit: " << fmt_fit(*a.fit) << "\n";
    else out << "fit: " << a.fit_error << "\n";
    out << "lower bound p_hat + 4 se >= nu(J_n): " << (a.lower_bound_ok ? "ok" : "VIOLATED") << "\n";
    out << "exponent within gamma +- " << a.exponent_tolerance << ": " << (a.exponent_ok ? "ok" : "no") << "\n";
  } else if (*o.obs == "log-power") {
    try {
      const auto b = check_thm_opt_b(params, m.geometry, m.density, nu, records, o.delta, o.epsilon);
      rep["unbounded_rate_check"] = to_json(b);
      out << "fit: " << fmt_fit(b.fit) << " (target " << fmt(b.target_exponent, 4) << ")\n";
      out << "mass of I_m below p_hat + 4 se: " << (b.mechanism_ok ? "ok" : "no") << "\n";
    } catch (const InsufficientPointsError& e) {
      rep["fit_error"] = e.what();
      out << "fit: " << e.what() << "\n";
    }
  } else {
    try {
      const auto fit = fit_stretched_exponent(rate_points(records));
      rep["fit"] = to_json(fit);
      out << "fit: " << fmt_fit(fit) << "\n";
    } catch (const InsufficientPointsError& e) {
      rep["fit_error"] = e.what();
      out << "fit: " << e.what() << "\n";
    }
  }
  art.report("deviation", rep);
}

void run_mdp(const CommandOptions& o, const MapParams& params, Artifacts& art, std::ostream& out) {
  const auto ns = o.n->values();
  const Model m = build_model(params, o.cells, 2, o.threads);
  const auto obs = attach_nu_mean(make_observable(*o.obs, m.geometry, o.delta, o.cutoff), m.density);
  const auto vc = variance_constants(m.op, m.density, obs);
  std::vector<MdpQuery> queries;
  for (std::size_t n : ns) queries.push_back({n, std::pow(static_cast<double>(n), -*o.theta)});
  const auto records = mdp_grid(sim_config(o, params), &m.density, obs, queries, o.x);
  const auto rep = check_mdp(records, queries, vc.sigma2, o.x);

  io::CsvTable t;
  t.header = {"n[iterations]", "a_n[speed]",  "threshold[observable]", "trials[count]",       "hits[count]",
              "p_hat[probability]", "ci_low[probability]", "ci_high[probability]", "scaled_log[a_n*log p]"};
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const auto& row = rep.rows[i];
    t.add_row({std::to_string(r.n), io::format_double(row.a_n), io::format_double(r.threshold),
               std::to_string(r.trials), std::to_string(r.hits), io::format_double(r.p_hat),
               io::format_double(r.ci_low), io::format_double(r.ci_high), io::format_double(row.scaled_log)});
    rows.push_back({std::to_string(r.n), fmt(row.a_n, 4), std::to_string(r.hits), fmt(r.p_hat, 5),
                    fmt(row.scaled_log, 5), fmt(row.ratio, 4), row.usable ? "yes" : "no"});
  }
  art.table("mdp", t);
  json body = to_json(rep);
  body["observable"] = obs.name();
  body["theta"] = *o.theta;
  art.report("mdp", body);
  print_aligned(out, {"n", "a_n", "hits", "p_hat", "a_n log p", "ratio", "usable"}, rows);
  out << "target -x^2/(2 sigma^2) = " << fmt(rep.target, 6) << " with sigma^2 = " << fmt(vc.sigma2, 6) << "\n";
  out << "status: " << to_string(rep.status);
  if (rep.final_n) out << " (final n " << *rep.final_n << ", ratio " << fmt(rep.final_ratio, 4) << ")";
  out << ", trend toward target: " << (rep.trend_toward_target ? "yes" : "no") << "\n";
}

void run_concentration(const CommandOptions& o, const MapParams& params, Artifacts& art, std::ostream& out) {
  const auto ns = o.n->values();
  if (ns.size() != 1) throw ConfigError("concentration takes a single --n value");
  const std::size_t n = ns.front();
  const Model m = build_model(params, o.cells, 2, o.threads);
  const auto obs = attach_nu_mean(make_observable(*o.obs, m.geometry, o.delta, o.cutoff), m.density);
  if (!obs.lipschitz_constant()) throw ConfigError("concentration needs a Lipschitz observable, got " + obs.name());
  const auto res =
      concentration_quantile_grid(sim_config(o, params), &m.density, obs, n, kConcentrationTailProbabilities);
  art.table("concentration", io::records_table(res.records));
  json body{{"observable", obs.name()}, {"expected_k", res.expected_k}, {"lipschitz", res.lipschitz}};
  try {
    const auto rep = check_concentration(res.records, n, res.lipschitz, params.gamma);
    body["check"] = to_json(rep);
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : rep.rows) {
      rows.push_back({fmt(r.t, 6), std::to_string(r.hits), fmt(r.p_hat, 5), fmt(r.bound, 5), r.usable ? "yes" : "no"});
    }
    print_aligned(out, {"t", "hits", "p_hat", "bound", "usable"}, rows);
    out << "E K = " << fmt(res.expected_k) << ", L = " << fmt(res.lipschitz) << ", kappa_fit = " << fmt(rep.kappa_fit)
        << ", violations " << rep.violations << "\n";
    out << "slope of log(-log p) vs log t: lower half " << fmt(rep.slope_low, 4) << ", upper half "
        << fmt(rep.slope_high, 4) << (rep.bending ? " (bending)" : " (no bending)") << "\n";
  } catch (const InsufficientPointsError& e) {
    body["check_error"] = e.what();
    out << e.what() << "\n";
  }
  art.report("concentration", body);
}

int run_verify(const CommandOptions& o, Artifacts& art, std::ostream& out) {
  acceptance::Options opts;
  opts.threads = o.threads;
  opts.seed = o.seed;
  opts.scratch = o.out / "verify-scratch";
  opts.progress = &out;
  const auto results = acceptance::run_all(opts);
  json arr = json::array();
  bool all = true;
  for (const auto& r : results) {
    arr.push_back(acceptance::to_json(r));
    all = all && r.pass;
  }
  art.report("verify", {{"criteria", arr}, {"pass", all}});
  out << (all ? "all criteria passed\n" : "verification FAILED\n");
  return all ? kExitOk : kExitVerifyFail;
}

}  // namespace

NRange NRange::parse(std::string_view text) {
  NRange r;
  const auto c1 = text.find(':');
  if (c1 == std::string_view::npos) {
    r.first = r.last = parse_index(text, "value");
    return r;
  }
  const auto c2 = text.find(':', c1 + 1);
  if (c2 == std::string_view::npos) throw ConfigError("--n expects a:b:step");
  r.first = parse_index(text.substr(0, c1), "start");
  r.last = parse_index(text.substr(c1 + 1, c2 - c1 - 1), "end");
  r.step = parse_index(text.substr(c2 + 1), "step");
  if (r.step == 0) throw ConfigError("--n: step must be positive");
  if (r.first > r.last) throw ConfigError("--n: start exceeds end");
  return r;
}

std::vector<std::size_t> NRange::values() const {
  std::vector<std::size_t> v;
  for (std::size_t n = first; n <= last; n += step) v.push_back(n);
  return v;
}

std::string NRange::to_string() const {
  return std::to_string(first) + ":" + std::to_string(last) + ":" + std::to_string(step);
}

CommandOptions resolve(const CommandOptions& options) {
  CommandOptions o = options;
  if (!contains(kSubcommands, o.subcommand)) throw ConfigError("unknown subcommand '" + o.subcommand + "'");
  if (!(o.gamma > 0.0 && o.gamma <= 1.0)) throw ConfigError("--gamma must lie in (0, 1]");
  if (!(o.delta > 0.0) || !std::isfinite(o.delta)) throw ConfigError("--delta must be positive");
  if (o.threads < 1) throw ConfigError("--threads must be at least 1");
  if (o.cells < kMinGridCells || o.cells % 2 != 0) {
    throw ConfigError("--cells must be even and at least " + std::to_string(kMinGridCells));
  }
  if (!(o.epsilon > 0.0)) throw ConfigError("--epsilon must be positive");
  if (!(o.cutoff > 0.0 && o.cutoff < 1.0)) throw ConfigError("--cutoff must lie in (0, 1)");
  if (!(o.x > 0.0) || !std::isfinite(o.x)) throw ConfigError("--x must be positive");
  if (!o.obs) o.obs = "item-a";
  if (!contains(kObservableNames, *o.obs)) throw ConfigError("unknown observable '" + *o.obs + "'");
  if (o.trials && *o.trials == 0) throw ConfigError("--trials must be at least 1");

  const std::string& s = o.subcommand;
  if (!o.n_max) {
    o.n_max = s == "correlations" ? 200 : 400;
  }
  if ((s == "geometry" || s == "tails") && *o.n_max < 1) throw ConfigError("--n-max must be at least 1");
  if (!o.trials) o.trials = (s == "mdp" && o.gamma == 1.0) ? 10'000'000 : 1'000'000;
  if (!o.n) {
    if (s == "deviation") {
      const bool unbounded = *o.obs == "log-power" || *o.obs == "truncated-log-power";
      o.n = unbounded ? NRange{10, 120, 10} : NRange{10, 60, 5};
    } else if (s == "mdp") {
      o.n = o.gamma == 1.0 ? NRange{16, 32, 2} : NRange{50, 800, 50};
    } else if (s == "concentration") {
      o.n = NRange{50, 50, 1};
    } else {
      o.n = NRange{10, 60, 5};
    }
  }
  if (o.n->first < 1) throw ConfigError("--n values must be at least 1");
  const double window = o.gamma / (2.0 - o.gamma);
  if (!o.theta) o.theta = std::min(0.5, 0.6 * window);
  if (s == "mdp" && !(*o.theta > 0.0 && *o.theta < window)) {
    throw ConfigError("--theta must lie in (0, gamma/(2-gamma))");
  }
  return o;
}

json canonical_config(const CommandOptions& o) {
  return {{"subcommand", o.subcommand},
          {"gamma", o.gamma},
          {"delta", o.delta},
          {"seed", o.seed},
          {"trials", o.trials.value_or(0)},
          {"n", o.n ? o.n->to_string() : ""},
          {"format", o.format == OutputFormat::Csv ? "csv" : "json"},
          {"obs", o.obs.value_or("")},
          {"n_max", o.n_max.value_or(0)},
          {"cells", o.cells},
          {"epsilon", o.epsilon},
          {"cutoff", o.cutoff},
          {"x", o.x},
          {"theta", o.theta.value_or(0.0)}};
}

Observable make_observable(const std::string& name, const GeometrySequence& geometry, double delta, double cutoff) {
  if (name == "item-a") return Observable::item_a(geometry);
  if (name == "log-power") return Observable::log_power(delta);
  if (name == "truncated-log-power") return Observable::truncated_log_power(delta, cutoff);
  if (name == "identity") return Observable::piecewise_linear({{0.0, 0.0}, {1.0, 1.0}});
  throw ConfigError("unknown observable '" + name + "'");
}

AsymptoteReport asymptote_report(const Model& model, double lo, double hi, double min_density_from) {
  AsymptoteReport r;
  r.lo = lo;
  r.hi = hi;
  r.min_density_from = min_density_from;
  r.ratio_min = std::numeric_limits<double>::infinity();
  r.ratio_max = 0.0;
  r.min_density_above = std::numeric_limits<double>::infinity();
  const auto& g = model.grid;
  for (std::size_t i = 0; i < g.cells(); ++i) {
    const double mid = g.mid(i);
    if (mid >= lo && mid <= hi) {
      const double ratio = model.density.values[i] / std::pow(-std::log(mid), model.params.beta);
      r.ratio_min = std::min(r.ratio_min, ratio);
      r.ratio_max = std::max(r.ratio_max, ratio);
    }
    if (g.right(i) > min_density_from) r.min_density_above = std::min(r.min_density_above, model.density.values[i]);
  }
  if (!(r.ratio_max > 0.0)) throw ResolutionError("asymptote_report: no grid cell inside the ratio window");
  r.spread = r.ratio_max / r.ratio_min;
  return r;
}

json to_json(const RateFit& fit) {
  return {{"exponent", fit.exponent}, {"log_prefactor", fit.log_prefactor}, {"r_squared", fit.r_squared},
          {"n_min", fit.n_min},       {"n_max", fit.n_max},                 {"points_used", fit.points_used}};
}

json to_json(const OptAReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back(
        {{"n", row.n}, {"p_hat", row.p_hat}, {"stderr", row.stderr_hat}, {"nu_J_n", row.nu_j}, {"ok", row.ok}});
  }
  json j{{"nu_f", r.nu_f},         {"gamma", r.gamma},       {"exponent_tolerance", r.exponent_tolerance},
         {"excluded", r.excluded}, {"rows", rows},           {"lower_bound_ok", r.lower_bound_ok},
         {"exponent_ok", r.exponent_ok}, {"pass", r.pass}};
  if (r.fit) j["fit"] = to_json(*r.fit);
  else j["fit_error"] = r.fit_error;
  return j;
}

json to_json(const OptBReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"n", row.n},
                    {"m", row.m},
                    {"applicable", row.applicable},
                    {"nu_I_m", row.nu_i_m},
                    {"p_hat", row.p_hat},
                    {"stderr", row.stderr_hat},
                    {"ok", row.ok}});
  }
  return {{"delta", r.delta},
          {"nu_f", r.nu_f},
          {"epsilon", r.epsilon},
          {"upsilon2", r.upsilon2},
          {"target_exponent", r.target_exponent},
          {"exponent_tolerance", r.exponent_tolerance},
          {"fit", to_json(r.fit)},
          {"rows", rows},
          {"exponent_ok", r.exponent_ok},
          {"mechanism_ok", r.mechanism_ok},
          {"pass", r.pass}};
}

json to_json(const MdpReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"n", row.n},
                    {"a_n", row.a_n},
                    {"p_hat", row.p_hat},
                    {"hits", row.hits},
                    {"scaled_log", std::isfinite(row.scaled_log) ? json(row.scaled_log) : json(nullptr)},
                    {"ratio", std::isfinite(row.ratio) ? json(row.ratio) : json(nullptr)},
                    {"usable", row.usable}});
  }
  json j{{"sigma2", r.sigma2},
         {"x", r.x},
         {"target", r.target},
         {"rows", rows},
         {"final_ratio", r.final_ratio},
         {"trend_toward_target", r.trend_toward_target},
         {"status", to_string(r.status)}};
  j["final_n"] = r.final_n ? json(*r.final_n) : json(nullptr);
  return j;
}

json to_json(const ConcentrationReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back(
        {{"t", row.t}, {"p_hat", row.p_hat}, {"hits", row.hits}, {"bound", row.bound}, {"usable", row.usable}});
  }
  return {{"n", r.n},
          {"lipschitz", r.lipschitz},
          {"gamma", r.gamma},
          {"kappa_fit", r.kappa_fit},
          {"violations", r.violations},
          {"points_used", r.points_used},
          {"slope_low", r.slope_low},
          {"slope_high", r.slope_high},
          {"bending", r.bending},
          {"shape_ok", r.shape_ok},
          {"rows", rows}};
}

json to_json(const AsymptoteReport& r) {
  return {{"window_low", r.lo},
          {"window_high", r.hi},
          {"ratio_min", r.ratio_min},
          {"ratio_max", r.ratio_max},
          {"spread", r.spread},
          {"min_density_from", r.min_density_from},
          {"min_density", r.min_density_above}};
}

CommandResult execute(const CommandOptions& options, std::ostream& out) {
  const auto wall_start = std::chrono::steady_clock::now();
  const auto started = std::chrono::system_clock::now();
  const CommandOptions o = resolve(options);
  const json config = canonical_config(o);
  CommandResult result;
  result.config_hash = io::config_hash(config);
  Artifacts art(o.out, o.format, result.config_hash);
  const MapParams params = MapParams::from_gamma(o.gamma);

  const std::string& s = o.subcommand;
  if (s == "geometry") run_geometry(o, params, art, out);
  else if (s == "density") run_density(o, params, art, out);
  else if (s == "tails") run_tails(o, params, art, out);
  else if (s == "correlations") run_correlations(o, params, art, out);
  else if (s == "deviation") run_deviation(o, params, art, out);
  else if (s == "mdp") run_mdp(o, params, art, out);
  else if (s == "concentration") run_concentration(o, params, art, out);
  else result.exit_code = run_verify(o, art, out);

  io::RunManifest manifest;
  manifest.subcommand = s;
  manifest.config_hash = result.config_hash;
  manifest.seed = o.seed;
  manifest.gamma = o.gamma;
  manifest.started = io::utc_timestamp(started);
  manifest.finished = io::utc_timestamp(std::chrono::system_clock::now());
  manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  for (const auto& p : art.outputs()) manifest.outputs.push_back(p.string());
  manifest.config = config;
  art.manifest(manifest);
  result.outputs = art.outputs();
  result.outputs.push_back(o.out / (s + "_manifest.json"));
  out << "manifest " << result.config_hash << " -> " << (o.out / (s + "_manifest.json")).string() << "\n";
  return result;
}

int run_command(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  try {
    return execute(options, out).exit_code;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}

void print_aligned(std::ostream& out, const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size() && c < width.size(); ++c) {
      out << (c ? "  " : "") << std::setw(static_cast<int>(width[c])) << cells[c];
    }
    out << "\n";
  };
  line(header);
  for (const auto& row : rows) line(row);
}

}  // namespace lsv::cli
