#include "lsv/observables.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "lsv/errors.hpp"
#include "lsv/transfer.hpp"

namespace lsv {

Observable Observable::item_a(double y1) {
  if (!(y1 > 0.0 && y1 < kHalf)) throw std::invalid_argument("item_a: y1 must lie in (0, 1/2)");
  Observable o;
  o.kind_ = ObservableKind::ItemALipschitz;
  o.y1_ = y1;
  const double lip = 1.0 / (kHalf - y1);
  o.lipschitz_ = lip;
  o.holder_ = HolderBound{1.0, lip};
  o.bv_norm_ = 2.0;  // sup 1 plus total variation 1
  return o;
}

Observable Observable::item_a(const GeometrySequence& geometry) { return item_a(geometry.y(1)); }

Observable Observable::log_power(double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("log_power: delta must be > 0");
  Observable o;
  o.kind_ = ObservableKind::LogPower;
  o.delta_ = delta;
  return o;
}

Observable Observable::truncated_log_power(double delta, double epsilon) {
  if (!(delta > 0.0)) throw std::invalid_argument("truncated_log_power: delta must be > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("truncated_log_power: epsilon must lie in (0, 1)");
  }
  Observable o;
  o.kind_ = ObservableKind::TruncatedLogPower;
  o.delta_ = delta;
  o.epsilon_ = epsilon;
  const double log_inv = -std::log(epsilon);
  o.cap_ = std::pow(log_inv, delta);
  if (delta >= 1.0) {
    const double lip = delta * std::pow(log_inv, delta - 1.0) / epsilon;
    o.lipschitz_ = lip;
    o.holder_ = HolderBound{1.0, lip};
  } else {
    o.holder_ = HolderBound{delta, std::pow(epsilon, -delta)};
  }
  o.bv_norm_ = 2.0 * o.cap_;  // monotone from cap down to 0
  return o;
}

Observable Observable::piecewise_linear(std::vector<Knot> knots) {
  if (knots.empty()) throw std::invalid_argument("piecewise_linear: need at least one knot");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i].x > knots[i - 1].x)) {
      throw std::invalid_argument("piecewise_linear: knots must be strictly increasing in x");
    }
  }
  Observable o;
  o.kind_ = ObservableKind::PiecewiseLinear;
  double lip = 0.0;
  double variation = 0.0;
  double sup = std::fabs(knots.front().value);
  for (std::size_t i = 1; i < knots.size(); ++i) {
    const double dv = knots[i].value - knots[i - 1].value;
    lip = std::max(lip, std::fabs(dv) / (knots[i].x - knots[i - 1].x));
    variation += std::fabs(dv);
    sup = std::max(sup, std::fabs(knots[i].value));
  }
  o.knots_ = std::move(knots);
  o.lipschitz_ = lip;
  o.holder_ = HolderBound{1.0, lip};
  o.bv_norm_ = sup + variation;
  return o;
}

Observable Observable::constant(double value) { return piecewise_linear({{0.0, value}}); }

double Observable::operator()(double x) const {
  switch (kind_) {
    case ObservableKind::ItemALipschitz:
      if (x > kHalf) return 1.0;
      if (x <= y1_) return 0.0;
      return (x - y1_) / (kHalf - y1_);
    case ObservableKind::LogPower: {
      if (x >= 1.0) return 0.0;
      const double u = -std::log(std::max(x, kLogPowerGuard));
      return delta_ == 1.0 ? u : std::pow(u, delta_);
    }
    case ObservableKind::TruncatedLogPower: {
      if (x <= epsilon_) return cap_;
      if (x >= 1.0) return 0.0;
      const double u = -std::log(x);
      return delta_ == 1.0 ? u : std::pow(u, delta_);
    }
    case ObservableKind::PiecewiseLinear: {
      if (x <= knots_.front().x) return knots_.front().value;
      if (x >= knots_.back().x) return knots_.back().value;
      auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                                 [](double v, const Knot& k) { return v < k.x; });
      const Knot& b = *it;
      const Knot& a = *(it - 1);
      return a.value + (b.value - a.value) * (x - a.x) / (b.x - a.x);
    }
  }
  return 0.0;
}

std::string Observable::name() const {
  std::ostringstream os;
  switch (kind_) {
    case ObservableKind::ItemALipschitz:
      os << "item-a(y1=" << y1_ << ")";
      break;
    case ObservableKind::LogPower:
      os << "log-power(delta=" << delta_ << ")";
      break;
    case ObservableKind::TruncatedLogPower:
      os << "truncated-log-power(delta=" << delta_ << ",epsilon=" << epsilon_ << ")";
      break;
    case ObservableKind::PiecewiseLinear:
      os << "piecewise-linear(" << knots_.size() << " knots)";
      break;
  }
  return os.str();
}

Observable Observable::with_nu_mean(double mean) const {
  Observable o = *this;
  o.nu_mean_ = mean;
  return o;
}

double evaluate(const Observable& obs, double x) {
  if (!(x > 0.0 && x <= 1.0)) {
    throw std::domain_error("evaluate: x = " + std::to_string(x) + " outside (0, 1]");
  }
  return obs(x);
}

double tail_mass(const Observable& obs, const DensityEstimate& density, double t) {
  if (obs.kind() != ObservableKind::LogPower) {
    throw std::invalid_argument("tail_mass: defined for the log-power observable only");
  }
  if (!(t > 0.0)) throw std::invalid_argument("tail_mass: t must be > 0");
  const double cut = std::exp(-std::pow(t, 1.0 / obs.delta()));
  if (cut < density.grid.right(0)) {
    throw ResolutionError("tail_mass: cut point " + std::to_string(cut) +
                          " lies below the first grid cell; refine the floor");
  }
  return density.mass_below(cut);
}

}  // namespace lsv
