#include "attachsim/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

namespace attachsim {

namespace {

constexpr double kAlphaMin = -40.0;
constexpr double kAlphaMax = 25.0;

double pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }
double cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Inverse Mills ratio phi(a) / Q(a).
double mills(double a) { return pdf(a) / upper_tail(a); }

// Coefficient of variation of a zero-truncated normal with standardised floor a.
double truncated_cv(double a) {
  const double l = mills(a);
  const double var = std::max(0.0, 1.0 + a * l - l * l);
  return std::sqrt(var) / (l - a);
}

}  // namespace

LatencyMoments truncated_normal_moments(double mu, double sigma, double floor_ms) {
  if (sigma <= 0.0) return {std::max(mu, floor_ms), 0.0};
  const double a = (floor_ms - mu) / sigma;
  const double l = mills(a);
  const double mean = mu + sigma * l;
  const double var = sigma * sigma * (1.0 + a * l - l * l);
  return {mean, std::sqrt(std::max(0.0, var))};
}

LatencyMoments clamped_normal_moments(double mu, double sigma) {
  if (sigma <= 0.0) return {std::max(mu, 0.0), 0.0};
  const double a = mu / sigma;
  const double mean = mu * cdf(a) + sigma * pdf(a);
  const double second = (mu * mu + sigma * sigma) * cdf(a) + mu * sigma * pdf(a);
  return {mean, std::sqrt(std::max(0.0, second - mean * mean))};
}

TruncatedNormal::TruncatedNormal(LatencyMoments target, double floor_ms) : floor_(floor_ms) {
  const double excess = target.mean_ms - floor_ms;
  if (target.std_ms <= 0.0 || excess <= 0.0) {
    mu_ = excess <= 0.0 && target.std_ms > 0.0 ? floor_ms : target.mean_ms;
    sigma_ = 0.0;
    mean_ = mu_;
    exact_ = target.std_ms <= 0.0;
    return;
  }

  const double cv = target.std_ms / excess;
  double a = kAlphaMax;
  if (cv < truncated_cv(kAlphaMax)) {
    double lo = kAlphaMin;
    double hi = kAlphaMax;
    for (int i = 0; i < 120; ++i) {
      const double mid = 0.5 * (lo + hi);
      (truncated_cv(mid) < cv ? lo : hi) = mid;
    }
    a = 0.5 * (lo + hi);
  } else {
    exact_ = false;
  }

  // Solve location/scale in the shifted frame Y = X - floor.
  sigma_ = excess / (mills(a) - a);
  mu_ = floor_ms - a * sigma_;
  alpha_ = a;
  lower_tail_ = upper_tail(a);
  const auto m = truncated_normal_moments(mu_, sigma_, floor_ms);
  mean_ = m.mean_ms;
  stddev_ = m.std_ms;
}

double TruncatedNormal::sample(RngStream& rng) const {
  if (sigma_ == 0.0) return mu_;
  // Inversion keeps exactly one uniform per draw.
  const double v = (1.0 - rng.uniform()) * lower_tail_;
  const double z = std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * v);
  return std::max(floor_, mu_ + sigma_ * std::max(z, alpha_));
}

double Lognormal::sample(RngStream& rng) const {
  if (sigma_ln == 0.0) return median_ms;
  return median_ms * std::exp(sigma_ln * rng.normal());
}

double Lognormal::mean() const { return median_ms * std::exp(0.5 * sigma_ln * sigma_ln); }

double Lognormal::variance() const {
  const double s2 = sigma_ln * sigma_ln;
  return median_ms * median_ms * std::exp(s2) * std::expm1(s2);
}

Lognormal Lognormal::from_mean_cv(double mean_ms, double cv) {
  const double s2 = std::log1p(cv * cv);
  return {mean_ms / std::sqrt(1.0 + cv * cv), std::sqrt(s2)};
}

}  // namespace attachsim
