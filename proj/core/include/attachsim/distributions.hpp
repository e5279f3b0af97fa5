#pragma once

#include "attachsim/rng.hpp"

namespace attachsim {

struct LatencyMoments {
  double mean_ms = 0.0;
  double std_ms = 0.0;
};

// Normal distribution truncated below at `floor_ms`, parameterised so that the
// *truncated* distribution has the requested mean and standard deviation.
// Table cells are reported as mean +- std of observed (positive) latencies, so
// matching the moments after truncation keeps simulated cell means unbiased.
//
// If the requested coefficient of variation cannot be reached by a truncated
// normal (std >= mean - floor), the location is pushed to the limit and the
// std is the best achievable; `exact()` reports which case applies.
class TruncatedNormal {
public:
  TruncatedNormal() = default;
  TruncatedNormal(LatencyMoments target, double floor_ms);

  double sample(RngStream& rng) const;

  double mean() const { return mean_; }
  double stddev() const { return stddev_; }
  double location() const { return mu_; }
  double scale() const { return sigma_; }
  double floor() const { return floor_; }
  bool degenerate() const { return sigma_ == 0.0; }
  bool exact() const { return exact_; }

private:
  double floor_ = 0.0;
  double mu_ = 0.0;
  double sigma_ = 0.0;
  double mean_ = 0.0;
  double stddev_ = 0.0;
  double lower_tail_ = 0.0;  // P(Z > alpha) for the standardised floor
  double alpha_ = 0.0;
  bool exact_ = true;
};

// Moments of N(mu, sigma) truncated to [floor, inf).
LatencyMoments truncated_normal_moments(double mu, double sigma, double floor_ms);

// Moments of max(X, 0) for X ~ N(mu, sigma).
LatencyMoments clamped_normal_moments(double mu, double sigma);

// Lognormal parameterised by its median and log-space sigma.
struct Lognormal {
  double median_ms = 1.0;
  double sigma_ln = 0.0;

  double sample(RngStream& rng) const;
  double mean() const;
  double variance() const;

  static Lognormal from_mean_cv(double mean_ms, double cv);
};

}  // namespace attachsim
