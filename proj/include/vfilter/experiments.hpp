#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vfilter/assumptions.hpp"

namespace vfilter {

struct DivergenceSpec {
    bool enabled = false;
    double alpha = 0.5;
    double c = 1.5;
    double rmax = 10.0;
    double x = 0.0;
};

struct StabilityConfig {
    std::string name;
    ModelSpec model = ModelSpec::linear(0.5, 1.0);
    Scenario scenario = Scenario::Filter;
    WeightSpec v = WeightSpec::exp_abs(1.0);
    double window_l = 12.0;
    std::size_t nodes = 2000;
    std::size_t steps = 200;
    std::vector<std::uint64_t> seeds = {1};
    std::size_t burn = 20;
    double ybar_halfwidth = 0.0;   // absolute half width; 0 means use the factor
    double ybar_sd_factor = 1.5;   // times the stationary sd of Y
    double d_level = 0.0;          // 0 means use the drift profile's base level
    double init_mean = 0.0, init_var = 1.0;
    double init_tilde_mean = 2.0, init_tilde_var = 1.0;
    DivergenceSpec divergence;
};

// Everything the two closed-form bounds consume, separated from the run so
// tests can assemble synthetic contexts.  Prefix arrays have length steps+1
// with zero at index 0; all products are carried as log prefix sums because
// the raw products overflow on realistic runs.
struct BoundContext {
    double d = 0.0;
    double log_v_d = 0.0;           // log sup of V over the level-d box
    double log_one_minus_rho = 0.0; // at the level-d box
    double log_nu_ratio = 0.0;      // log(nu(V) / nuQ(D))
    double log_nu_ratio_tilde = 0.0;
    std::vector<double> cum_log_z;  // size steps+1
    std::vector<int> cum_in;        // size steps+1
    std::vector<double> log_t_d;    // size steps
    std::vector<double> vmom;       // size steps+1, V-moment of each filter law
    std::vector<double> vmom_tilde;
};

struct BoundValue {
    double value = 0.0;     // may be +inf; the log field is then the record
    double log_value = 0.0;
    bool qualifies = false; // forget bound: the inside-fraction hypothesis at n
};

BoundValue forget_bound(const BoundContext& ctx, std::size_t n, double d,
                        const TheoremConstants& tc);
BoundValue echeck_bound(const BoundContext& ctx, std::size_t n, double d,
                        bool tilde = false);

struct RateFit {
    double slope = 0.0;
    double r2 = 0.0;
    double rho_hat = 1.0;
    std::size_t points = 0;
    std::size_t n_lo = 0, n_hi = 0;
};

// Least-squares fit of log gap against n over [burn, n_cap], dropping points
// at or below the per-index floor (empty floors means the absolute 1e-14
// cut).  Throws degenerate_fit_error below 5 usable points.
RateFit rate_estimate(const std::vector<double>& gap, std::size_t burn,
                      const std::vector<double>& floors = {},
                      std::size_t n_cap = static_cast<std::size_t>(-1));

struct QuartileCheck {
    bool pass = false;
    bool endpoint_drop = false;
    double slope = 0.0;
    std::size_t points = 0;
    std::size_t n_lo = 0, n_hi = 0;
};

// Examines rho^{-n} gap(n) on the last quartile of the censored range: the
// endpoint must drop and, given three or more points, the fitted slope of
// log gap - n log rho must be nonpositive.
QuartileCheck rho_quartile_check(const std::vector<double>& gap,
                                 const std::vector<double>& floors, double log_rho);

struct StabilityTrace {
    StabilityConfig config;
    std::uint64_t seed = 0;
    Interval ybar;
    double d = 0.0;
    double d_under = 0.0;
    Interval core;  // the drift profile's base box D
    Interval box;   // level-d box the LD constants live on
    double rho_cd = 0.0;
    double log_one_minus_rho = 0.0;
    std::vector<double> gap_v, vmom, vmom_tilde;           // size steps+1
    std::vector<double> lambda, lambda_tilde;              // size steps
    std::vector<double> tail, tail_tilde;                  // size steps+1
    double max_tail = 0.0;
    EnvStats env;
    TheoremConstants constants;
    BoundContext ctx;
    std::vector<double> bound_forget, bound_echeck, bound_echeck_tilde;
    std::vector<char> qualifies;
    bool forget_dominates = false;   // gap <= forget bound at every qualifying n
    bool echeck_dominates = false;   // vmom <= running bound at every n >= 1
    bool echeck_tilde_dominates = false;
    bool fit_ok = false;
    std::string fit_error;
    RateFit fit;
    QuartileCheck quartile;
};

// Runs both filters on one simulated path, sharing the per-step kernel
// between the filter updates and the environment statistics.
StabilityTrace stability_run(const StabilityConfig& cfg, std::uint64_t seed);

// Per-index censor floor: the absolute cut never goes below 1e-14 and scales
// with the current V-moments, since the achievable gap resolution does too.
std::vector<double> censor_floors(const std::vector<double>& vmom,
                                  const std::vector<double>& vmom_tilde);

struct DivergencePoint {
    double r = 0.0;
    double value = 0.0;     // may be +inf
    double log_value = 0.0;
};

// Truncated integrals of exp(z^2 (c-1)/2 + alpha z x - alpha^2 x^2 / 2) over
// [-R, R] on a nested ladder; strictly increasing in R by construction.
std::vector<DivergencePoint> prediction_vnorm_divergence(double alpha, double c,
                                                         const std::vector<double>& r_ladder,
                                                         double x = 0.0);

std::string trace_to_csv(const StabilityTrace& t);
std::string trace_summary_json(const StabilityTrace& t);

}  // namespace vfilter
