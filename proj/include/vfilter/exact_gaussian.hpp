#pragma once

#include "vfilter/weight.hpp"

namespace vfilter {

struct GaussianState {
    double mean = 0.0;
    double var = 1.0;
};

// N(0, 1/(1 - alpha^2)); throws domain_error if |alpha| >= 1.
GaussianState stationary_pi(double alpha);

// Conjugate update of a Gaussian prior by one observation y with noise
// variance beta_obs^2 (no state propagation).
GaussianState gaussian_posterior(const GaussianState& prior, double y, double beta_obs);

struct KalmanResult {
    GaussianState state;
    double loglik = 0.0;  // log N(y; predictive mean, predictive var + beta_obs^2)
};

// Propagate through X' = alpha X + noise, then update by y.
KalmanResult kalman_step(const GaussianState& prior, double y, double alpha, double beta_obs);

// E V(Z) for Z ~ N(mean, var), in closed form.  ExpSquare returns +inf as a
// value whenever c * var >= 1; that infinity is meaningful output, not error.
double gaussian_v_moment(const GaussianState& s, const WeightSpec& v);

double normal_cdf(double x);

}  // namespace vfilter
