#include "lsv/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "lsv/errors.hpp"
#include "lsv/induced.hpp"
#include "lsv/parallel.hpp"

namespace lsv {

namespace {

enum StreamId : std::uint64_t {
  kMainStream = 0,
  kPilotStream = 1,
  kReturnStream = 2,
  kHistogramStream = 3,
};

// Neumaier's variant of Kahan summation.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

template <class Batch, class Fn>
std::vector<Batch> run_batches(const SimulationConfig& cfg, std::uint64_t stream, const Batch& proto, Fn&& fn) {
  const std::uint64_t nb = cfg.num_batches();
  std::vector<Batch> out(nb, proto);
  parallel_for(nb, cfg.threads, [&](std::size_t b) {
    RngStream rng(cfg.seed, stream, b);
    fn(rng, cfg.batch_trials(b), out[b]);
  });
  return out;
}

double require_nu_mean(const Observable& obs) {
  if (!obs.nu_mean()) throw ConfigError(obs.name() + ": nu-mean not attached; integrate against the density first");
  return *obs.nu_mean();
}

[[noreturn]] void degenerate_orbit(double x) {
  throw OrbitError("orbit reached the fixed point " + std::to_string(x));
}

// Walks one orbit and reports (j, S_j, max_{i<=j} |S_i|) for j = 1..n_max.
template <class Visit>
void walk_orbit(const MapParams& params, const Observable& obs, double mean, double x, std::size_t n_max,
                Visit&& visit) {
  CompensatedSum s;
  double max_abs = 0.0;
  for (std::size_t j = 1; j <= n_max; ++j) {
    if (x <= 0.0 || x >= 1.0) degenerate_orbit(x);
    s.add(obs(x) - mean);
    const double sj = s.value();
    max_abs = std::max(max_abs, std::fabs(sj));
    if (!visit(j, sj, max_abs)) return;
    x = apply_map_unchecked(params, x);
  }
}

}  // namespace

std::uint64_t SimulationConfig::batch_trials(std::uint64_t b) const {
  const std::uint64_t start = b * batch_size;
  return std::min(batch_size, trials - start);
}

void SimulationConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (sampling == Sampling::LebesgueWithBurnIn && params.is_doubling() && burn_in >= 50) {
    throw ConfigError("Lebesgue sampling with burn-in >= 50 is unsupported for the doubling map: "
                      "binary doubling exhausts the mantissa");
  }
}

double DeviationRecord::stderr_hat() const {
  if (trials == 0) return 0.0;
  return std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(trials));
}

DeviationRecord make_record(std::size_t n, double threshold, std::uint64_t trials, std::uint64_t hits) {
  if (hits > trials) throw std::invalid_argument("make_record: hits exceed trials");
  if (trials == 0) throw std::invalid_argument("make_record: no trials");
  DeviationRecord r;
  r.n = n;
  r.threshold = threshold;
  r.trials = trials;
  r.hits = hits;
  const double N = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / N;
  r.p_hat = p;
  const double z2 = kWilsonZ95 * kWilsonZ95;
  const double denom = 1.0 + z2 / N;
  const double center = (p + z2 / (2.0 * N)) / denom;
  const double half = kWilsonZ95 / denom * std::sqrt(p * (1.0 - p) / N + z2 / (4.0 * N * N));
  r.ci_low = hits == 0 ? 0.0 : std::clamp(center - half, 0.0, p);
  r.ci_high = hits == trials ? 1.0 : std::clamp(center + half, p, 1.0);
  return r;
}

StationarySampler::StationarySampler(const SimulationConfig& config, const DensityEstimate* density)
    : params_(config.params), sampling_(config.sampling), burn_in_(config.burn_in), density_(density) {
  config.validate();
  if (sampling_ == Sampling::InverseCdfOfDensity && density_ == nullptr) {
    throw ConfigError("inverse-CDF sampling requires a density estimate");
  }
}

double StationarySampler::draw(RngStream& rng) const {
  double x;
  if (sampling_ == Sampling::InverseCdfOfDensity) {
    const auto& cum = density_->cumulative;
    const double target = rng.uniform_open() * cum.back();
    auto it = std::upper_bound(cum.begin() + 1, cum.end(), target);
    const std::size_t cell = std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()) - 1,
                                                   density_->grid.cells() - 1);
    x = density_->grid.left(cell) + rng.uniform_open() * density_->grid.width(cell);
  } else {
    x = rng.uniform_open();
  }
  x = force_odd_mantissa(std::clamp(x, 0x1p-1074, 1.0 - 0x1p-53));
  for (std::uint64_t k = 0; k < burn_in_; ++k) {
    x = apply_map_unchecked(params_, x);
    if (x <= 0.0 || x >= 1.0) degenerate_orbit(x);
  }
  return x;
}

double sample_stationary(const SimulationConfig& config, const DensityEstimate* density, RngStream& rng) {
  return StationarySampler(config, density).draw(rng);
}

double birkhoff_sum(const MapParams& params, const Observable& obs, double x0, std::size_t n) {
  const double mean = require_nu_mean(obs);
  if (n < 1) throw std::invalid_argument("birkhoff_sum: n must be >= 1");
  if (!(x0 > 0.0 && x0 <= 1.0)) throw std::domain_error("birkhoff_sum: x0 outside (0, 1]");
  double result = 0.0;
  walk_orbit(params, obs, mean, x0, n, [&](std::size_t j, double sj, double) {
    if (j == n) result = sj;
    return true;
  });
  return result;
}

std::vector<DeviationRecord> deviation_grid(const SimulationConfig& config, const DensityEstimate* density,
                                            const Observable& obs, std::span<const DeviationQuery> queries,
                                            DeviationMode mode) {
  const double mean = require_nu_mean(obs);
  if (queries.empty()) return {};
  std::vector<std::size_t> order(queries.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return queries[a].n < queries[b].n; });
  for (const auto& q : queries) {
    if (q.n < 1) throw ConfigError("deviation: n must be >= 1");
    if (!(q.threshold > 0.0)) throw ConfigError("deviation: threshold must be > 0");
  }
  const std::size_t n_max = queries[order.back()].n;
  const StationarySampler sampler(config, density);

  using Hits = std::vector<std::uint64_t>;
  auto batches = run_batches(config, kMainStream, Hits(queries.size(), 0),
                             [&](RngStream& rng, std::uint64_t count, Hits& hits) {
    for (std::uint64_t t = 0; t < count; ++t) {
      std::size_t qi = 0;
      walk_orbit(config.params, obs, mean, sampler.draw(rng), n_max, [&](std::size_t j, double sj, double mx) {
        while (qi < order.size() && queries[order[qi]].n == j) {
          const std::size_t q = order[qi];
          const double th = queries[q].threshold;
          bool hit = false;
          switch (mode) {
            case DeviationMode::Absolute: hit = std::fabs(sj) > th; break;
            case DeviationMode::OneSided: hit = sj >= th; break;
            case DeviationMode::RunningMax: hit = mx >= th; break;
          }
          hits[q] += hit ? 1 : 0;
          ++qi;
        }
        return true;
      });
    }
  });

  std::vector<DeviationRecord> out;
  out.reserve(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    std::uint64_t total = 0;
    for (const auto& b : batches) total += b[q];
    out.push_back(make_record(queries[q].n, queries[q].threshold, config.trials, total));
  }
  return out;
}

DeviationRecord deviation_cell(const SimulationConfig& config, const DensityEstimate* density,
                               const Observable& obs, std::size_t n, double threshold, DeviationMode mode) {
  const DeviationQuery q{n, threshold};
  return deviation_grid(config, density, obs, std::span(&q, 1), mode).front();
}

std::vector<DeviationRecord> mdp_grid(const SimulationConfig& config, const DensityEstimate* density,
                                      const Observable& obs, std::span<const MdpQuery> queries, double x) {
  if (!(x > 0.0)) throw ConfigError("mdp: x must be > 0 for a one-sided event");
  std::vector<DeviationQuery> dq;
  dq.reserve(queries.size());
  for (const auto& q : queries) {
    if (!(q.a_n > 0.0 && q.a_n < 1.0)) throw ConfigError("mdp: a_n must lie in (0, 1)");
    if (q.n < 1) throw ConfigError("mdp: n must be >= 1");
    dq.push_back({q.n, x * std::sqrt(static_cast<double>(q.n) / q.a_n)});
  }
  return deviation_grid(config, density, obs, dq, DeviationMode::OneSided);
}

DeviationRecord mdp_cell(const SimulationConfig& config, const DensityEstimate* density, const Observable& obs,
                         std::size_t n, double a_n, double x) {
  const MdpQuery q{n, a_n};
  return mdp_grid(config, density, obs, std::span(&q, 1), x).front();
}

namespace {

double lipschitz_of(const Observable& obs) {
  if (!obs.lipschitz_constant()) {
    throw ConfigError("concentration: " + obs.name() + " is not Lipschitz");
  }
  return *obs.lipschitz_constant();
}

// K values of every trial in stream order, plus their compensated sum.
struct KBatch {
  CompensatedSum sum;
  std::vector<double> values;
};

std::vector<KBatch> sample_k(const SimulationConfig& config, const StationarySampler& sampler,
                             const Observable& obs, double mean, std::size_t n, std::uint64_t stream,
                             bool keep_values) {
  return run_batches(config, stream, KBatch{}, [&](RngStream& rng, std::uint64_t count, KBatch& out) {
    if (keep_values) out.values.reserve(count);
    for (std::uint64_t t = 0; t < count; ++t) {
      double k = 0.0;
      walk_orbit(config.params, obs, mean, sampler.draw(rng), n, [&](std::size_t j, double, double mx) {
        if (j == n) k = mx;
        return true;
      });
      out.sum.add(k);
      if (keep_values) out.values.push_back(k);
    }
  });
}

double batch_mean(const std::vector<KBatch>& batches, std::uint64_t trials) {
  CompensatedSum total;
  for (const auto& b : batches) total.add(b.sum.value());
  return total.value() / static_cast<double>(trials);
}

ConcentrationResult concentration_from(const SimulationConfig& config, const StationarySampler& sampler,
                                       const Observable& obs, double mean, std::size_t n, double expected_k,
                                       std::span<const double> ts) {
  ConcentrationResult res;
  res.n = n;
  res.expected_k = expected_k;
  res.lipschitz = lipschitz_of(obs);
  for (double t : ts) {
    if (!(t >= 0.0)) throw ConfigError("concentration: t must be >= 0");
  }
  using Hits = std::vector<std::uint64_t>;
  auto batches = run_batches(config, kMainStream, Hits(ts.size(), 0),
                             [&](RngStream& rng, std::uint64_t count, Hits& hits) {
    for (std::uint64_t t = 0; t < count; ++t) {
      double k = 0.0;
      walk_orbit(config.params, obs, mean, sampler.draw(rng), n, [&](std::size_t j, double, double mx) {
        if (j == n) k = mx;
        return true;
      });
      const double dev = k - expected_k;
      for (std::size_t i = 0; i < ts.size(); ++i) hits[i] += dev >= ts[i] ? 1 : 0;
    }
  });
  for (std::size_t i = 0; i < ts.size(); ++i) {
    std::uint64_t total = 0;
    for (const auto& b : batches) total += b[i];
    res.records.push_back(make_record(n, ts[i], config.trials, total));
  }
  return res;
}

}  // namespace

ConcentrationResult concentration_grid(const SimulationConfig& config, const DensityEstimate* density,
                                       const Observable& obs, std::size_t n, std::span<const double> ts) {
  const double mean = require_nu_mean(obs);
  lipschitz_of(obs);
  if (n < 1) throw ConfigError("concentration: n must be >= 1");
  const StationarySampler sampler(config, density);
  const auto pilot = sample_k(config, sampler, obs, mean, n, kPilotStream, false);
  return concentration_from(config, sampler, obs, mean, n, batch_mean(pilot, config.trials), ts);
}

DeviationRecord concentration_cell(const SimulationConfig& config, const DensityEstimate* density,
                                   const Observable& obs, std::size_t n, double t) {
  return concentration_grid(config, density, obs, n, std::span(&t, 1)).records.front();
}

ConcentrationResult concentration_quantile_grid(const SimulationConfig& config, const DensityEstimate* density,
                                                const Observable& obs, std::size_t n,
                                                std::span<const double> tail_probabilities) {
  const double mean = require_nu_mean(obs);
  lipschitz_of(obs);
  if (n < 1) throw ConfigError("concentration: n must be >= 1");
  const StationarySampler sampler(config, density);
  const auto pilot = sample_k(config, sampler, obs, mean, n, kPilotStream, true);
  const double expected_k = batch_mean(pilot, config.trials);

  std::vector<double> all;
  all.reserve(config.trials);
  for (const auto& b : pilot) all.insert(all.end(), b.values.begin(), b.values.end());
  std::vector<double> ts;
  for (double q : tail_probabilities) {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("concentration: tail probabilities must lie in (0, 1)");
    const auto above = static_cast<std::size_t>(std::ceil(q * static_cast<double>(all.size())));
    const std::size_t idx = all.size() - std::clamp<std::size_t>(above, 1, all.size());
    std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(idx), all.end());
    ts.push_back(std::max(0.0, all[idx] - expected_k));
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return concentration_from(config, sampler, obs, mean, n, expected_k, ts);
}

std::vector<DeviationRecord> empirical_return_tail(const SimulationConfig& config, std::size_t n_max) {
  config.validate();
  if (n_max < 2) throw ConfigError("empirical_return_tail: n_max must be >= 2");
  using Hits = std::vector<std::uint64_t>;
  // hits[k] counts R == k + 1 for k < n_max - 1 and R >= n_max in the last slot.
  auto batches = run_batches(config, kReturnStream, Hits(n_max, 0),
                             [&](RngStream& rng, std::uint64_t count, Hits& hits) {
    for (std::uint64_t t = 0; t < count; ++t) {
      const std::size_t r = return_time_from_offset(config.params, rng.uniform_open()).return_time;
      ++hits[std::min(r, n_max) - 1];
    }
  });
  Hits exact(n_max, 0);
  for (const auto& b : batches) {
    for (std::size_t k = 0; k < n_max; ++k) exact[k] += b[k];
  }
  std::vector<DeviationRecord> out(n_max);
  std::uint64_t at_least = 0;
  for (std::size_t n = n_max; n >= 1; --n) {
    at_least += exact[n - 1];
    out[n - 1] = make_record(n, static_cast<double>(n), config.trials, at_least);
  }
  return out;
}

OrbitHistogram orbit_histogram(const MapParams& params, const UlamGrid& grid, std::size_t orbits,
                               std::size_t length, std::size_t burn_in, std::uint64_t seed, unsigned threads) {
  if (orbits < 2 || length < 1) throw ConfigError("orbit_histogram: need >= 2 orbits of positive length");
  const std::size_t m = grid.cells();
  std::vector<std::vector<std::uint32_t>> counts(orbits);
  parallel_for(orbits, threads, [&](std::size_t o) {
    RngStream rng(seed, kHistogramStream, o);
    auto& c = counts[o];
    c.assign(m, 0);
    double x = force_odd_mantissa(rng.uniform_open());
    for (std::size_t k = 0; k < burn_in + length; ++k) {
      if (k >= burn_in) ++c[grid.locate(x)];
      x = apply_map_unchecked(params, x);
      if (x <= 0.0 || x >= 1.0) degenerate_orbit(x);
    }
  });
  OrbitHistogram h;
  h.samples = static_cast<std::uint64_t>(orbits) * length;
  h.mass.assign(m, 0.0);
  h.stderr_mass.assign(m, 0.0);
  const double inv_len = 1.0 / static_cast<double>(length);
  std::vector<double> sq(m, 0.0);
  for (const auto& c : counts) {
    for (std::size_t i = 0; i < m; ++i) {
      const double f = c[i] * inv_len;
      h.mass[i] += f;
      sq[i] += f * f;
    }
  }
  const double k = static_cast<double>(orbits);
  for (std::size_t i = 0; i < m; ++i) {
    h.mass[i] /= k;
    const double var = std::max(0.0, (sq[i] / k - h.mass[i] * h.mass[i]) * k / (k - 1.0));
    h.stderr_mass[i] = std::sqrt(var / k);
  }
  return h;
}

}  // namespace lsv
