#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vfilter/filter_engine.hpp"

namespace vfilter {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
};

// Minorization/majorization constants of the transition-plus-observation
// kernel over a symmetric box C = [-r, r]: on C the kernel is sandwiched
// between eps_minus(y) and eps_plus(y) times the normalized Lebesgue measure
// on C.  All constants are carried in log form as well; products of the raw
// values underflow on wide boxes.
struct LDReport {
    Interval C;
    double eps_minus_tilde = 0.0;  // transition part, inf over the box, times |C|
    double eps_plus_tilde = 0.0;
    double log_eps_minus_tilde = 0.0;
    double log_eps_plus_tilde = 0.0;
    std::function<double(double)> log_eps_minus;  // y -> log eps_minus(y)
    std::function<double(double)> log_eps_plus;
    GridMeasure mu_C;  // normalized Lebesgue on C
    double rho_cd = 0.0;
    // log(1 - rho_cd); kept separately because rho_cd rounds to 1 long
    // before the underlying ratio underflows.
    double log_one_minus_rho = 0.0;
};

// Extremal bounds of the two Gaussian factors over the box and the
// observation interval ybar.  Throws domain_error if r <= 0.
LDReport ld_constants(const ModelSpec& m, double r, Interval ybar,
                      std::size_t scan_points = 4096);

// Drift envelope: W >= 0 with level sets C_d = {W <= d} compact, built from
// the weighted one-step contraction of the model.  ExpAbs works for any
// drift whose mean map is affine; ExpSquare requires the linear variant and
// a weight exponent keeping kappa = 1 + c/alpha^2 - 1/(2-c) positive.
struct DriftProfile {
    ModelSpec model;
    WeightSpec v;
    Interval ybar;
    std::function<double(double)> W;
    double d_under = 0.0;  // smallest level whose set contains the unit ball
    Interval D;            // C at level d_under
    double M_const = 0.0;  // ExpAbs envelope constant, nan for ExpSquare
    double kappa = 0.0;    // ExpSquare margin, nan for ExpAbs

    Interval C_of(double d) const;  // level set as a symmetric interval
    double V_of(double d) const;    // sup of V over C_of(d), from the endpoint
};

DriftProfile drift_profile(const ModelSpec& m, const WeightSpec& v, Interval ybar);

double kappa_margin(double alpha, double c);

// log of the exact one-step weighted contraction of the linear model at
// weight exponent c (valid for beta_obs = 1):
// log of integral f(x,dz) g(z,y) V(z) / V(x).
double psi_linear(double alpha, double c, double x, double y);

// Per-step environment statistics along one observation path, measured on
// the window grid.  Step k covers the kernel taking eta_k to eta_{k+1}.
struct EnvStats {
    std::vector<double> upsilon;    // weighted operator norm per step
    std::vector<double> psi_small;  // worst return mass into D per step
    std::vector<double> log_z;      // log((1 v upsilon) / (1 ^ psi_small))
    std::vector<int> in_k;          // observation read by the kernel inside ybar
    std::vector<double> log_t_d;    // log(1 ^ eps_minus(y) mu_C(C n D))
    double l_hat = 0.0;             // mean of log_z
    double gamma_hat = 0.0;         // mean of in_k
    std::vector<double> xi;         // running mean of log_z minus l_hat
    std::vector<double> xi_tilde;   // running mean of in_k minus gamma_hat
};

EnvStats env_stats(const ModelSpec& m, Scenario sc, const ObservationPath& path,
                   const WeightSpec& v, const DriftProfile& profile, double d,
                   const std::vector<double>& nodes, double lo, double hi);

// Worst one-step mass a kernel returns into D from a source inside D.
// Throws domain_error when no source node lies inside D.
double min_return_mass(const KernelGrid& k, Interval D);

// Per-step floor used by the running-moment bound: min(0, log eps_minus(y)
// plus the log fraction of the box that D covers).
double log_t_d_of(const LDReport& ld, Interval D, double y);

// Feasible constant tuple for the asymptotic-rate construction.  Inputs are
// path estimates; rho_cd should be accompanied by log(1 - rho_cd) whenever
// that is available (pass nan to derive it from rho_cd).  Throws
// gamma_too_small_error if gamma_hat <= 2/3.
struct TheoremConstants {
    double gamma_minus = 0.0;
    double gamma_plus = 0.0;
    double beta = 0.0;
    double d = 0.0;
    double rho = 0.0;
    double log_rho = 0.0;
};

TheoremConstants theorem_constants(double l_hat, double gamma_hat, double rho_cd,
                                   double d_under, double log_one_minus_rho_cd);

// Growth-condition screens for the nonlinear family, evaluated on a
// log-spaced radius ladder.
struct EConditionsReport {
    std::vector<double> radii;
    std::vector<double> e1_values;  // sup over |x| = r of |x + b(x)| - |x|
    bool e1_pass = false;
    double sigma_inf = 0.0, sigma_sup = 0.0;
    bool e2_pass = false;
    std::vector<double> e3_values;  // log|h| / r on the ladder
    double e3_limsup = 0.0;
    bool e3_pass = false;
};

EConditionsReport check_e_conditions(const ModelSpec& m, double max_radius = 1000.0);

std::string ld_report_to_json(const LDReport& r, Interval ybar);
std::string e_conditions_to_json(const EConditionsReport& r);

}  // namespace vfilter
