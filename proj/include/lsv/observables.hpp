#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lsv/geometry.hpp"

namespace lsv {

struct DensityEstimate;

enum class ObservableKind { ItemALipschitz, LogPower, TruncatedLogPower, PiecewiseLinear };

struct HolderBound {
  double eta;
  double constant;
};

struct Knot {
  double x;
  double value;
};

// Real function on (0, 1] with its regularity metadata. Immutable; the nu-mean
// is attached by copying through with_nu_mean().
class Observable {
 public:
  // Smooth indicator of (1/2, 1]: 0 on (0, y_1], linear ramp on (y_1, 1/2], 1 above.
  static Observable item_a(double y1);
  static Observable item_a(const GeometrySequence& geometry);
  // |log x|^delta.
  static Observable log_power(double delta);
  // (log 1/eps)^delta on (0, eps], |log x|^delta on (eps, 1].
  static Observable truncated_log_power(double delta, double epsilon);
  // Linear interpolation between knots (sorted by x), constant beyond the ends.
  static Observable piecewise_linear(std::vector<Knot> knots);
  static Observable constant(double value);

  double operator()(double x) const;

  ObservableKind kind() const { return kind_; }
  std::string name() const;
  double delta() const { return delta_; }
  double epsilon() const { return epsilon_; }
  double y1() const { return y1_; }
  const std::vector<Knot>& knots() const { return knots_; }

  std::optional<double> lipschitz_constant() const { return lipschitz_; }
  std::optional<HolderBound> holder() const { return holder_; }
  std::optional<double> bv_norm() const { return bv_norm_; }
  std::optional<double> nu_mean() const { return nu_mean_; }
  bool bounded() const { return kind_ != ObservableKind::LogPower; }

  Observable with_nu_mean(double mean) const;

 private:
  Observable() = default;

  ObservableKind kind_ = ObservableKind::PiecewiseLinear;
  double delta_ = 0.0;
  double epsilon_ = 0.0;
  double y1_ = 0.0;
  double cap_ = 0.0;
  std::vector<Knot> knots_;
  std::optional<double> lipschitz_;
  std::optional<HolderBound> holder_;
  std::optional<double> bv_norm_;
  std::optional<double> nu_mean_;
};

// LogPower is evaluated down to this point; below it the value is clamped.
inline constexpr double kLogPowerGuard = 1e-300;

// Throws std::domain_error for x <= 0 or x > 1.
double evaluate(const Observable& obs, double x);

// nu(|f| > t) = nu((0, exp(-t^{1/delta}))) for f = |log x|^delta, integrated
// from the density estimate. Throws ResolutionError when the cut point falls
// inside the grid's first cell.
double tail_mass(const Observable& obs, const DensityEstimate& density, double t);

}  // namespace lsv
