#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lsv/map.hpp"
#include "lsv/observables.hpp"
#include "lsv/rng.hpp"
#include "lsv/transfer.hpp"

namespace lsv {

enum class Sampling { InverseCdfOfDensity, LebesgueWithBurnIn };

// Trials are split into fixed batches; batch b always draws from the stream
// (seed, stream, b), so results do not depend on the worker count.
struct SimulationConfig {
  std::uint64_t seed = 1;
  std::uint64_t trials = 1;
  std::uint64_t batch_size = 1u << 16;
  std::uint64_t burn_in = 0;
  Sampling sampling = Sampling::InverseCdfOfDensity;
  MapParams params;
  unsigned threads = 1;

  std::uint64_t num_batches() const { return (trials + batch_size - 1) / batch_size; }
  std::uint64_t batch_trials(std::uint64_t b) const;
  // Throws ConfigError on an unusable combination.
  void validate() const;
};

// One Monte Carlo estimate of an event probability with a Wilson 95% interval.
struct DeviationRecord {
  std::size_t n = 0;
  double threshold = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;

  double stderr_hat() const;
};

inline constexpr double kWilsonZ95 = 1.959963984540054;

DeviationRecord make_record(std::size_t n, double threshold, std::uint64_t trials, std::uint64_t hits);

// Draws orbit starts distributed (approximately) according to nu.
class StationarySampler {
 public:
  // density may be null only for LebesgueWithBurnIn.
  StationarySampler(const SimulationConfig& config, const DensityEstimate* density);
  double draw(RngStream& rng) const;

 private:
  MapParams params_;
  Sampling sampling_;
  std::uint64_t burn_in_;
  const DensityEstimate* density_;
};

double sample_stationary(const SimulationConfig& config, const DensityEstimate* density, RngStream& rng);

// sum_{k<n} f(T^k x0) - n nu(f) with compensated summation. obs must carry its
// nu-mean. Throws OrbitError if the orbit hits 0 or 1 exactly.
double birkhoff_sum(const MapParams& params, const Observable& obs, double x0, std::size_t n);

enum class DeviationMode {
  Absolute,    // |S_n| > threshold
  OneSided,    // S_n >= threshold
  RunningMax,  // max_{j<=n} |S_j| >= threshold
};

DeviationRecord deviation_cell(const SimulationConfig& config, const DensityEstimate* density,
                               const Observable& obs, std::size_t n, double threshold, DeviationMode mode);

// Several (n, threshold) cells estimated on one shared set of trajectories.
struct DeviationQuery {
  std::size_t n;
  double threshold;
};
std::vector<DeviationRecord> deviation_grid(const SimulationConfig& config, const DensityEstimate* density,
                                            const Observable& obs, std::span<const DeviationQuery> queries,
                                            DeviationMode mode);

// nu(sqrt(a_n / n) S_n >= x).
DeviationRecord mdp_cell(const SimulationConfig& config, const DensityEstimate* density, const Observable& obs,
                         std::size_t n, double a_n, double x);

struct MdpQuery {
  std::size_t n;
  double a_n;
};
std::vector<DeviationRecord> mdp_grid(const SimulationConfig& config, const DensityEstimate* density,
                                      const Observable& obs, std::span<const MdpQuery> queries, double x);

// K = max_{1<=j<=n} |S_j| along the orbit; records estimate nu(K - E K >= t)
// with E K taken from an independent pilot stream of the same size.
struct ConcentrationResult {
  std::size_t n = 0;
  double expected_k = 0.0;
  double lipschitz = 0.0;
  std::vector<DeviationRecord> records;  // threshold = t
};

DeviationRecord concentration_cell(const SimulationConfig& config, const DensityEstimate* density,
                                   const Observable& obs, std::size_t n, double t);
ConcentrationResult concentration_grid(const SimulationConfig& config, const DensityEstimate* density,
                                       const Observable& obs, std::size_t n, std::span<const double> ts);
// Places t at the pilot quantiles with the given upper-tail probabilities.
ConcentrationResult concentration_quantile_grid(const SimulationConfig& config, const DensityEstimate* density,
                                                const Observable& obs, std::size_t n,
                                                std::span<const double> tail_probabilities);

// Empirical m(R >= n), n = 1..n_max, from uniform starts on (1/2, 1).
std::vector<DeviationRecord> empirical_return_tail(const SimulationConfig& config, std::size_t n_max);

// Orbit-occupation estimate of the cell masses, with standard errors taken
// across independent orbits.
struct OrbitHistogram {
  std::vector<double> mass;
  std::vector<double> stderr_mass;
  std::uint64_t samples = 0;
};
OrbitHistogram orbit_histogram(const MapParams& params, const UlamGrid& grid, std::size_t orbits,
                               std::size_t length, std::size_t burn_in, std::uint64_t seed, unsigned threads);

}  // namespace lsv
