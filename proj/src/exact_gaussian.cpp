#include "vfilter/exact_gaussian.hpp"

#include <cmath>
#include <limits>

#include "vfilter/errors.hpp"

namespace vfilter {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

GaussianState stationary_pi(double alpha) {
    if (!(std::fabs(alpha) < 1.0)) throw domain_error("stationary_pi: need |alpha| < 1");
    return {0.0, 1.0 / (1.0 - alpha * alpha)};
}

GaussianState gaussian_posterior(const GaussianState& prior, double y, double beta_obs) {
    if (!(prior.var > 0.0)) throw domain_error("gaussian_posterior: prior variance <= 0");
    if (!(beta_obs > 0.0)) throw domain_error("gaussian_posterior: beta_obs <= 0");
    const double b2 = beta_obs * beta_obs;
    const double denom = prior.var + b2;
    return {(prior.var * y + b2 * prior.mean) / denom, prior.var * b2 / denom};
}

KalmanResult kalman_step(const GaussianState& prior, double y, double alpha, double beta_obs) {
    const GaussianState pred{alpha * prior.mean, alpha * alpha * prior.var + 1.0};
    const double b2 = beta_obs * beta_obs;
    const double innov_var = pred.var + b2;
    const double d = y - pred.mean;
    KalmanResult r;
    r.state = gaussian_posterior(pred, y, beta_obs);
    r.loglik = -0.5 * (d * d / innov_var + std::log(innov_var) + kLog2Pi);
    return r;
}

double gaussian_v_moment(const GaussianState& s, const WeightSpec& v) {
    if (!(s.var >= 0.0)) throw domain_error("gaussian_v_moment: negative variance");
    const double c = v.c, mu = s.mean, var = s.var;
    if (var == 0.0) return v_eval(v, mu);  // point mass limit
    const double sd = std::sqrt(var);
    if (v.family == WeightSpec::Family::ExpAbs) {
        // E exp(c|Z|) splits at zero into two truncated lognormal pieces
        const double base = 0.5 * c * c * var;
        const double up = base + c * mu + std::log(normal_cdf(mu / sd + c * sd));
        const double dn = base - c * mu + std::log(normal_cdf(-mu / sd + c * sd));
        const double mx = std::max(up, dn);
        return std::exp(mx) * (std::exp(up - mx) + std::exp(dn - mx));
    }
    const double t = 1.0 - c * var;
    if (t <= 0.0) return std::numeric_limits<double>::infinity();
    return std::exp(0.5 * c * mu * mu / t) / std::sqrt(t);
}

}  // namespace vfilter
