#include "vfilter/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "vfilter/errors.hpp"

namespace vfilter {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double log_gauss_norm(double sd) { return -0.5 * std::log(2.0 * M_PI) - std::log(sd); }

// Range of a FuncSpec over a symmetric box [-r, r].
Interval func_range(const FuncSpec& f, double r) {
    if (f.kind == FuncSpec::Kind::Constant) return {f.value, f.value};
    double a = std::abs(f.value) * r;
    return {-a, a};
}

double dist_to_interval(double y, Interval h) {
    return std::max(0.0, std::max(h.lo - y, y - h.hi));
}

double far_dist_to_interval(double y, Interval h) {
    return std::max(std::abs(y - h.lo), std::abs(y - h.hi));
}

}  // namespace

LDReport ld_constants(const ModelSpec& m, double r, Interval ybar,
                      std::size_t scan_points) {
    if (!(r > 0.0) || !std::isfinite(r)) throw domain_error("ld_constants: box radius must be positive and finite");
    if (!(ybar.lo <= ybar.hi)) throw domain_error("ld_constants: empty observation interval");
    if (scan_points < 8) scan_points = 8;

    LDReport rep;
    rep.C = {-r, r};

    // Transition factor: for each source x the density over the box is a
    // Gaussian slice, so its extremes sit at the nearest and farthest box
    // points from the step mean.  Scan x over the box for the outer extremes.
    const double inv2s = 1.0 / (2.0 * m.sigma * m.sigma);
    double worst_log_inf = kInf, best_log_sup = -kInf;
    for (std::size_t i = 0; i <= scan_points; ++i) {
        double x = -r + 2.0 * r * static_cast<double>(i) / static_cast<double>(scan_points);
        double mu = m.drift_mean(x);
        double d_near = std::max(0.0, std::abs(mu) - r);
        double d_far = r + std::abs(mu);
        worst_log_inf = std::min(worst_log_inf, -d_far * d_far * inv2s);
        best_log_sup = std::max(best_log_sup, -d_near * d_near * inv2s);
    }
    const double lg_f = log_gauss_norm(m.sigma);
    rep.log_eps_minus_tilde = std::log(2.0 * r) + worst_log_inf + lg_f;
    rep.log_eps_plus_tilde = std::log(2.0 * r) + best_log_sup + lg_f;
    rep.eps_minus_tilde = std::exp(rep.log_eps_minus_tilde);
    rep.eps_plus_tilde = std::exp(rep.log_eps_plus_tilde);

    // Observation factor: h maps the box onto an interval, so the extremes
    // of g(., y) over the box are exact.
    const Interval hr = func_range(m.h, r);
    const double beta = m.beta_obs;
    const double lg_g = log_gauss_norm(beta);
    const double lem = rep.log_eps_minus_tilde;
    const double lep = rep.log_eps_plus_tilde;
    rep.log_eps_minus = [hr, beta, lg_g, lem](double y) {
        double d = far_dist_to_interval(y, hr);
        return lem + lg_g - d * d / (2.0 * beta * beta);
    };
    rep.log_eps_plus = [hr, beta, lg_g, lep](double y) {
        double d = dist_to_interval(y, hr);
        return lep + lg_g - d * d / (2.0 * beta * beta);
    };

    rep.mu_C = [&] {
        std::size_t n = 801;
        GridMeasure u;
        u.nodes = uniform_nodes(-r, r, n);
        u.weights.assign(n, 1.0 / static_cast<double>(n));
        u.lo = -r;
        u.hi = r;
        return u;
    }();

    // Worst-case contraction over the observation interval, carried in log
    // form: log(1 - rho) = 2 min_y (log eps_minus(y) - log eps_plus(y)).
    double min_log_ratio = kInf;
    for (std::size_t i = 0; i <= scan_points; ++i) {
        double y = ybar.lo + (ybar.hi - ybar.lo) * static_cast<double>(i) / static_cast<double>(scan_points);
        min_log_ratio = std::min(min_log_ratio, rep.log_eps_minus(y) - rep.log_eps_plus(y));
    }
    rep.log_one_minus_rho = 2.0 * min_log_ratio;
    rep.rho_cd = -std::expm1(rep.log_one_minus_rho);
    return rep;
}

double kappa_margin(double alpha, double c) {
    if (!(c < 2.0)) return -kInf;
    return 1.0 + c / (alpha * alpha) - 1.0 / (2.0 - c);
}

double psi_linear(double alpha, double c, double x, double y) {
    if (!(c < 2.0)) return kInf;
    double kappa = kappa_margin(alpha, c);
    return -0.5 * kappa * alpha * alpha * x * x + alpha * x * y / (2.0 - c) +
           0.5 * y * y * (1.0 / (2.0 - c) - 1.0) -
           0.5 * (std::log(2.0 * M_PI) + std::log(2.0 - c));
}

namespace {

// sup over y in ybar of the exact linear one-step log ratio: quadratic in y,
// so endpoints plus the interior critical point cover every case.
double sup_psi_linear(double alpha, double c, double x, Interval ybar) {
    double best = std::max(psi_linear(alpha, c, x, ybar.lo), psi_linear(alpha, c, x, ybar.hi));
    if (c != 1.0) {
        double ystar = -alpha * x / (c - 1.0);
        if (ystar > ybar.lo && ystar < ybar.hi)
            best = std::max(best, psi_linear(alpha, c, x, ystar));
    }
    return best;
}

}  // namespace

Interval DriftProfile::C_of(double d) const {
    if (!(d >= 0.0)) throw domain_error("C_of: level must be nonnegative");
    auto above = [&](double r) { return std::max(W(r), W(-r)) > d; };
    if (above(0.0)) throw domain_error("C_of: level set has no symmetric core");
    double lo = 0.0, hi = 1e-3;
    while (!above(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) throw domain_error("C_of: level set appears unbounded; drift does not push inward");
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (above(mid) ? hi : lo) = mid;
    }
    return {-lo, lo};
}

double DriftProfile::V_of(double d) const {
    Interval c = C_of(d);
    return v_eval(v, std::max(std::abs(c.lo), std::abs(c.hi)));
}

DriftProfile drift_profile(const ModelSpec& m, const WeightSpec& v, Interval ybar) {
    if (!(ybar.lo <= ybar.hi)) throw domain_error("drift_profile: empty observation interval");
    DriftProfile p;
    p.model = m;
    p.v = v;
    p.ybar = ybar;
    p.M_const = kNaN;
    p.kappa = kNaN;

    if (v.family == WeightSpec::Family::ExpAbs) {
        // One-step envelope: Gaussian step moment bound for the transition
        // part plus the global density cap for the observation part.
        double c = v.c, sigma = m.sigma;
        double log_m = std::log(2.0) + 0.5 * c * c * sigma * sigma;
        double log_gsup = log_gauss_norm(m.beta_obs);
        p.M_const = std::exp(log_m);
        FuncSpec b = m.b;
        p.W = [c, b, log_m, log_gsup](double x) {
            double psi = c * (std::abs(x + b(x)) - std::abs(x)) + log_m + log_gsup;
            return std::max(0.0, -psi);
        };
    } else {
        if (m.variant != ModelSpec::Variant::Linear || m.beta_obs != 1.0)
            throw domain_error("drift_profile: quadratic weights need the linear model with unit observation noise");
        if (!(v.c < 2.0))
            throw kappa_nonpositive_error("drift_profile: weight exponent must be below 2 for the step integral to exist");
        double kappa = kappa_margin(m.alpha, v.c);
        if (!(kappa > 0.0))
            throw kappa_nonpositive_error("drift_profile: quadratic drift margin is not positive for this exponent");
        p.kappa = kappa;
        double alpha = m.alpha, c = v.c;
        p.W = [alpha, c, ybar](double x) {
            return std::max(0.0, -sup_psi_linear(alpha, c, x, ybar));
        };
    }

    double d_under = 0.0;
    for (int i = 0; i <= 2000; ++i) {
        double x = -1.0 + 2.0 * static_cast<double>(i) / 2000.0;
        d_under = std::max(d_under, p.W(x));
    }
    p.d_under = d_under;
    p.D = p.C_of(d_under);
    return p;
}

double min_return_mass(const KernelGrid& k, Interval D) {
    double worst = kInf;
    bool any_source = false;
    for (std::size_t i = 0; i < k.rows(); ++i) {
        if (k.source_nodes[i] < D.lo || k.source_nodes[i] > D.hi) continue;
        any_source = true;
        double mass = 0.0;
        for (std::size_t j = 0; j < k.cols(); ++j) {
            if (k.target_nodes[j] < D.lo || k.target_nodes[j] > D.hi) continue;
            mass += k.entry(i, j);
        }
        worst = std::min(worst, mass);
    }
    if (!any_source) throw domain_error("min_return_mass: no grid nodes inside the core set");
    return worst;
}

double log_t_d_of(const LDReport& ld, Interval D, double y) {
    double inter_lo = std::max(ld.C.lo, D.lo);
    double inter_hi = std::min(ld.C.hi, D.hi);
    double w = std::max(0.0, inter_hi - inter_lo);
    if (w == 0.0 || ld.C.width() == 0.0) return -kInf;
    double log_mass = std::log(w) - std::log(ld.C.width());
    return std::min(0.0, ld.log_eps_minus(y) + log_mass);
}

EnvStats env_stats(const ModelSpec& m, Scenario sc, const ObservationPath& path,
                   const WeightSpec& v, const DriftProfile& profile, double d,
                   const std::vector<double>& nodes, double lo, double hi) {
    if (path.y.size() < 2) throw domain_error("env_stats: need at least two observations");
    Interval box = profile.C_of(d);
    LDReport ld = ld_constants(m, box.hi, profile.ybar);

    EnvStats st;
    std::size_t steps = path.y.size() - 1;
    st.upsilon.reserve(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        KernelGrid kern = q_kernel(m, sc, path.y[k], path.y[k + 1], nodes, lo, hi);
        double ups = kernel_vnorm(kern, v);
        double ret = min_return_mass(kern, profile.D);
        double y_read = (sc == Scenario::Filter) ? path.y[k + 1] : path.y[k];
        st.upsilon.push_back(ups);
        st.psi_small.push_back(ret);
        st.log_z.push_back(std::log(std::max(1.0, ups)) - std::log(std::min(1.0, ret)));
        st.in_k.push_back(y_read >= profile.ybar.lo && y_read <= profile.ybar.hi ? 1 : 0);
        st.log_t_d.push_back(log_t_d_of(ld, profile.D, y_read));
    }

    double sum_z = 0.0, sum_g = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        sum_z += st.log_z[k];
        sum_g += st.in_k[k];
    }
    st.l_hat = sum_z / static_cast<double>(steps);
    st.gamma_hat = sum_g / static_cast<double>(steps);

    double run_z = 0.0, run_g = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        run_z += st.log_z[k];
        run_g += st.in_k[k];
        double nk = static_cast<double>(k + 1);
        st.xi.push_back(run_z / nk - st.l_hat);
        st.xi_tilde.push_back(run_g / nk - st.gamma_hat);
    }
    return st;
}

TheoremConstants theorem_constants(double l_hat, double gamma_hat, double rho_cd,
                                   double d_under, double log_one_minus_rho_cd) {
    if (!std::isfinite(l_hat) || l_hat < 0.0)
        throw domain_error("theorem_constants: mean log growth must be finite and nonnegative");
    if (!(gamma_hat > 2.0 / 3.0))
        throw gamma_too_small_error("theorem_constants: inside fraction must exceed 2/3");
    if (gamma_hat > 1.0) throw domain_error("theorem_constants: inside fraction above one");

    double log_1m = log_one_minus_rho_cd;
    if (std::isnan(log_1m)) {
        if (!(rho_cd < 1.0))
            throw domain_error("theorem_constants: contraction factor rounds to one; pass its log complement");
        log_1m = std::log1p(-rho_cd);
    }
    if (!(log_1m <= 0.0)) throw domain_error("theorem_constants: log complement must be nonpositive");

    double slack = 3.0 * gamma_hat - 2.0;
    TheoremConstants tc;
    tc.gamma_minus = (1.0 - gamma_hat) + 0.1 * slack;
    tc.gamma_plus = (2.0 * gamma_hat - 1.0) - 0.1 * slack;
    tc.beta = 0.5 * (tc.gamma_minus + tc.gamma_plus);
    double half_gap = tc.gamma_plus - tc.beta;
    tc.d = std::max(d_under, (4.0 * l_hat + 0.1) / half_gap);

    // Asymptotic per-step rate needed by either bound term, then the rate is
    // placed halfway between that floor and one, all in log space.
    double q = std::exp(log_1m);
    double log_rho_cd = (q >= 1.0) ? -kInf : std::log1p(-q);
    double term1 = (tc.beta - tc.gamma_minus) * log_rho_cd;
    double term2 = -0.5 * tc.d * half_gap + 2.0 * l_hat;
    double log_lb = std::max(term1, term2);
    tc.log_rho = std::log1p(0.5 * std::expm1(log_lb));
    tc.rho = std::exp(tc.log_rho);
    return tc;
}

EConditionsReport check_e_conditions(const ModelSpec& m, double max_radius) {
    if (!(max_radius > 1.0)) throw domain_error("check_e_conditions: ladder must extend past radius one");
    EConditionsReport rep;
    const int n = 28;
    for (int i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / static_cast<double>(n - 1);
        rep.radii.push_back(std::pow(10.0, t * std::log10(max_radius)));
    }

    for (double r : rep.radii) {
        double inc = std::max(std::abs(m.drift_mean(r)) - r, std::abs(m.drift_mean(-r)) - r);
        rep.e1_values.push_back(inc);
        double habs = std::max(std::abs(m.h(r)), std::abs(m.h(-r)));
        rep.e3_values.push_back(std::log(habs) / r);
    }

    std::size_t half = rep.radii.size() / 2;
    double tail_max_e1 = -kInf;
    for (std::size_t i = half; i < rep.e1_values.size(); ++i) tail_max_e1 = std::max(tail_max_e1, rep.e1_values[i]);
    rep.e1_pass = tail_max_e1 < 0.0;

    rep.sigma_inf = m.sigma;
    rep.sigma_sup = m.sigma;
    rep.e2_pass = rep.sigma_inf > 0.0 && std::isfinite(rep.sigma_sup);

    double tail_max_e3 = -kInf;
    for (std::size_t i = half; i < rep.e3_values.size(); ++i) tail_max_e3 = std::max(tail_max_e3, rep.e3_values[i]);
    rep.e3_limsup = tail_max_e3;
    rep.e3_pass = std::isfinite(tail_max_e3) && tail_max_e3 <= 1.0;
    return rep;
}

namespace {

nlohmann::json jnum(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

nlohmann::json jvec(const std::vector<double>& xs) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : xs) a.push_back(jnum(x));
    return a;
}

}  // namespace

std::string ld_report_to_json(const LDReport& r, Interval ybar) {
    nlohmann::json j;
    j["box"] = {{"lo", r.C.lo}, {"hi", r.C.hi}};
    j["ybar"] = {{"lo", ybar.lo}, {"hi", ybar.hi}};
    j["eps_minus_tilde"] = jnum(r.eps_minus_tilde);
    j["eps_plus_tilde"] = jnum(r.eps_plus_tilde);
    j["log_eps_minus_tilde"] = jnum(r.log_eps_minus_tilde);
    j["log_eps_plus_tilde"] = jnum(r.log_eps_plus_tilde);
    j["rho_Cd"] = jnum(r.rho_cd);
    j["log_one_minus_rho"] = jnum(r.log_one_minus_rho);
    return j.dump(2);
}

std::string e_conditions_to_json(const EConditionsReport& r) {
    nlohmann::json j;
    j["radii"] = jvec(r.radii);
    j["e1_values"] = jvec(r.e1_values);
    j["e1_pass"] = r.e1_pass;
    j["sigma_inf"] = jnum(r.sigma_inf);
    j["sigma_sup"] = jnum(r.sigma_sup);
    j["e2_pass"] = r.e2_pass;
    j["e3_values"] = jvec(r.e3_values);
    j["e3_limsup"] = jnum(r.e3_limsup);
    j["e3_pass"] = r.e3_pass;
    return j.dump(2);
}

}  // namespace vfilter
