// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure.  Tolerances are pinned here, next to the checks that use them.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vfilter/assumptions.hpp"
#include "vfilter/errors.hpp"
#include "vfilter/exact_gaussian.hpp"
#include "vfilter/experiments.hpp"
#include "vfilter/filter_engine.hpp"
#include "vfilter/grid_measure.hpp"
#include "vfilter/models.hpp"
#include "vfilter/presets.hpp"
#include "vfilter/weight.hpp"

using namespace vfilter;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int g_failures = 0;

void report(int k, const std::string& name, bool pass, const std::string& detail) {
    std::printf("ACCEPTANCE %d %s: %s (%s)\n", k, name.c_str(),
                pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3g", x);
    return buf;
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

// ---------------------------------------------------------------- criterion 1

void criterion_oracle_equivalence() {
    const double tol = 1e-6;       // relative, mean scale floored at one
    const double budget_s = 30.0;  // wall clock for both runs together
    double worst_mean = 0.0, worst_var = 0.0;
    double t0 = now_seconds();

    for (double alpha : {0.5, 0.9}) {
        ModelSpec m = ModelSpec::linear(alpha, 1.0);
        const double L = 12.0;
        const std::size_t n_nodes = 2000;
        std::vector<double> nodes = uniform_nodes(-L, L, n_nodes);
        ObservationPath path = simulate(m, 201, 1).obs;

        GaussianState prior = stationary_pi(alpha);
        GridMeasure eta = initial_measure(
            m, Scenario::Filter, gaussian_on_grid(nodes, -L, L, prior.mean, prior.var),
            path.y[0]);
        GaussianState s = gaussian_posterior(prior, path.y[0], 1.0);

        auto compare = [&](const GridMeasure& g, const GaussianState& ex) {
            double me = std::abs(grid_mean(g) - ex.mean) / std::max(1.0, std::abs(ex.mean));
            double ve = std::abs(grid_var(g) - ex.var) / ex.var;
            worst_mean = std::max(worst_mean, me);
            worst_var = std::max(worst_var, ve);
        };
        compare(eta, s);
        for (std::size_t k = 1; k < path.y.size(); ++k) {
            eta = step(eta, m, Scenario::Filter, path.y[k - 1], path.y[k]).eta;
            s = kalman_step(s, path.y[k], alpha, 1.0).state;
            compare(eta, s);
        }
    }

    double elapsed = now_seconds() - t0;
    bool pass = worst_mean <= tol && worst_var <= tol && elapsed < budget_s;
    report(1, "oracle-equivalence", pass,
           "max mean err " + fmt(worst_mean) + ", max var err " + fmt(worst_var) +
               ", " + fmt(elapsed) + " s");
}

// ----------------------------------------------------- criteria 2, 3, 5, 7 runs

struct AllTraces {
    std::vector<StabilityTrace> stable, nonlinear;
    StabilityTrace divergent;
    StabilityConfig cfg_stable, cfg_nonlinear, cfg_divergent;
};

AllTraces run_all_presets() {
    AllTraces all;
    all.cfg_stable = make_preset("linear-filter-stable");
    all.cfg_nonlinear = make_preset("nonlinear-e-conditions");
    all.cfg_divergent = make_preset("linear-prediction-divergent");
    for (std::uint64_t s : all.cfg_stable.seeds)
        all.stable.push_back(stability_run(all.cfg_stable, s));
    for (std::uint64_t s : all.cfg_nonlinear.seeds)
        all.nonlinear.push_back(stability_run(all.cfg_nonlinear, s));
    all.divergent = stability_run(all.cfg_divergent, all.cfg_divergent.seeds.at(0));
    return all;
}

void criterion_forgetting(const AllTraces& all) {
    const double r2_floor = 0.8;
    bool pass = true;
    double worst_r2 = 1.0, worst_slope = -kInf;
    std::size_t checked = 0;
    auto eval = [&](const std::vector<StabilityTrace>& ts) {
        for (const StabilityTrace& t : ts) {
            ++checked;
            if (!(t.fit_ok && t.fit.slope < 0.0 && t.fit.r2 > r2_floor && t.quartile.pass))
                pass = false;
            if (t.fit_ok) {
                worst_r2 = std::min(worst_r2, t.fit.r2);
                worst_slope = std::max(worst_slope, t.fit.slope);
            } else {
                worst_r2 = -1.0;
            }
        }
    };
    eval(all.stable);
    eval(all.nonlinear);
    report(2, "forgetting-rate", pass,
           std::to_string(checked) + " runs, worst r2 " + fmt(worst_r2) +
               ", worst slope " + fmt(worst_slope));
}

void criterion_domination(const AllTraces& all) {
    bool pass = true;
    std::size_t checked = 0;
    auto eval = [&](const StabilityTrace& t) {
        ++checked;
        if (!(t.forget_dominates && t.echeck_dominates && t.echeck_tilde_dominates))
            pass = false;
    };
    for (const StabilityTrace& t : all.stable) eval(t);
    for (const StabilityTrace& t : all.nonlinear) eval(t);
    eval(all.divergent);
    report(3, "bound-domination", pass, std::to_string(checked) + " runs checked");
}

// ---------------------------------------------------------------- criterion 4

void criterion_s_decomposition(const AllTraces& all) {
    const double tol_vnorm = 1e-6;
    const double tol_unit = 1e-8;
    const StabilityConfig& cfg = all.cfg_stable;
    const double L = cfg.window_l;
    std::vector<double> nodes = uniform_nodes(-L, L, cfg.nodes);

    ObservationPath path = simulate(cfg.model, 11, cfg.seeds.at(0)).obs;
    GridMeasure lambda0 =
        gaussian_on_grid(nodes, -L, L, cfg.init_mean, cfg.init_var);
    SDecomposition sd = s_decompose(cfg.model, cfg.scenario, path, 10, lambda0);

    double worst_row = 0.0;
    for (const std::vector<double>& row : sd.s_rowsums)
        for (double rs : row) worst_row = std::max(worst_row, std::abs(rs - 1.0));
    double nu_err = std::abs(sd.nu_h0 - 1.0);
    double recon_err = vnorm(subtract(sd.reconstruction, sd.direct), cfg.v);

    bool pass = recon_err <= tol_vnorm && worst_row <= tol_unit && nu_err <= tol_unit;
    report(4, "s-decomposition", pass,
           "recon vnorm " + fmt(recon_err) + ", worst rowsum dev " + fmt(worst_row) +
               ", init integral dev " + fmt(nu_err));
}

// ---------------------------------------------------------------- criterion 5

void criterion_dichotomy(const AllTraces& all) {
    bool pass = true;
    std::ostringstream detail;

    // The drift margin of the divergent pair is positive by plain arithmetic.
    double kappa = kappa_margin(0.5, 1.5);
    if (!(kappa == 5.0 && kappa > 0.0)) {
        pass = false;
        detail << "kappa " << kappa << "; ";
    }

    // One-sided truncated integral blows up along the ladder...
    std::vector<double> ladder;
    for (int r = 1; r <= 10; ++r) ladder.push_back(static_cast<double>(r));
    const DivergenceSpec& dv = all.cfg_divergent.divergence;
    std::vector<DivergencePoint> pts =
        prediction_vnorm_divergence(dv.alpha, dv.c, ladder, dv.x);
    bool growing = true;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (!(pts[i].value > pts[i - 1].value)) growing = false;
    if (!(growing && pts.back().value > 1e8)) {
        pass = false;
        detail << "ladder end " << fmt(pts.back().value) << "; ";
    }

    // ...while the conditioned gap still forgets at the fitted rate.
    const StabilityTrace& t = all.divergent;
    if (!(t.fit_ok && t.fit.slope < 0.0 && t.fit.r2 > 0.8 && t.quartile.pass)) {
        pass = false;
        detail << "conditioned fit r2 " << fmt(t.fit_ok ? t.fit.r2 : -1.0) << "; ";
    }

    // Exact one-sided laws carry infinite weighted moments at every step of
    // the same path, while the conditioned laws stay integrable.
    const StabilityConfig& cfg = all.cfg_divergent;
    ObservationPath path = simulate(cfg.model, cfg.steps + 1, cfg.seeds.at(0)).obs;
    WeightSpec w = WeightSpec::exp_square(dv.c);
    GaussianState s = gaussian_posterior(stationary_pi(dv.alpha), path.y[0], 1.0);
    bool split_ok = true;
    for (std::size_t k = 1; k < path.y.size(); ++k) {
        GaussianState pred{dv.alpha * s.mean, dv.alpha * dv.alpha * s.var + 1.0};
        if (!std::isinf(gaussian_v_moment(pred, w))) split_ok = false;
        if (!std::isfinite(gaussian_v_moment(s, w))) split_ok = false;
        s = kalman_step(s, path.y[k], dv.alpha, 1.0).state;
    }
    if (!split_ok) {
        pass = false;
        detail << "moment split broken; ";
    }

    // The closed-form moment flips to infinity exactly at c * var = 1.
    WeightSpec w2 = WeightSpec::exp_square(2.0);
    bool edge_ok = std::isinf(gaussian_v_moment({0.0, 0.5}, w2)) &&
                   std::isinf(gaussian_v_moment({0.0, 0.75}, w2)) &&
                   std::isfinite(gaussian_v_moment({0.0, 0.5 - 1e-9}, w2));
    if (!edge_ok) {
        pass = false;
        detail << "moment edge broken; ";
    }

    detail << "ladder end " << fmt(pts.back().value) << ", conditioned r2 "
           << fmt(t.fit.r2);
    report(5, "dichotomy", pass, detail.str());
}

// ---------------------------------------------------------------- criterion 6

void criterion_assumption_checker() {
    bool pass = true;
    std::ostringstream detail;

    ModelSpec good = ModelSpec::nonlinear(FuncSpec::scale(-0.5), 1.0,
                                          FuncSpec::identity(), 1.0);
    ModelSpec bad = ModelSpec::nonlinear(FuncSpec::scale(1.0), 1.0,
                                         FuncSpec::identity(), 1.0);
    EConditionsReport rg = check_e_conditions(good);
    EConditionsReport rb = check_e_conditions(bad);
    if (!(rg.e1_pass && rg.e2_pass && rg.e3_pass && !rb.e1_pass)) {
        pass = false;
        detail << "growth screens wrong; ";
    }

    WeightSpec v = WeightSpec::exp_abs(1.0);
    double hw = 3.0 * stationary_sd_y(good);
    Interval ybar{-hw, hw};
    DriftProfile prof = drift_profile(good, v, ybar);
    LDReport ld = ld_constants(good, prof.D.hi, ybar);

    // Sandwich inequality at random points of the core box.
    std::mt19937_64 rng(2026);
    std::uniform_real_distribution<double> ux(prof.D.lo, prof.D.hi);
    std::uniform_real_distribution<double> uy(ybar.lo, ybar.hi);
    const double slack = 1e-9;
    double log_vol = std::log(prof.D.width());
    bool sandwich_ok = true;
    for (int i = 0; i < 1000; ++i) {
        double x = ux(rng), z = ux(rng), y = uy(rng);
        double lhs = std::log(transition_density(good, x, z)) + obs_density_log(good, z, y);
        if (!(ld.log_eps_minus(y) - log_vol <= lhs + slack &&
              lhs <= ld.log_eps_plus(y) - log_vol + slack))
            sandwich_ok = false;
    }
    if (!sandwich_ok) {
        pass = false;
        detail << "sandwich violated; ";
    }

    // Drift inequality outside the core: one-step weighted mass never
    // exceeds e^{-W(x)} V(x).
    bool drift_ok = true;
    std::uniform_real_distribution<double> ux_out(prof.D.hi, 9.0);
    std::uniform_real_distribution<double> uside(0.0, 1.0);
    const std::size_t qn = 8000;
    const double qlo = -40.0, qhi = 40.0;
    const double qh = (qhi - qlo) / static_cast<double>(qn);
    double worst_margin = -kInf;
    for (int i = 0; i < 1000; ++i) {
        double x = ux_out(rng) * (uside(rng) < 0.5 ? -1.0 : 1.0);
        double y = uy(rng);
        double acc = 0.0;
        for (std::size_t j = 0; j < qn; ++j) {
            double z = qlo + (static_cast<double>(j) + 0.5) * qh;
            acc += transition_density(good, x, z) * obs_density(good, z, y) * v_eval(v, z);
        }
        double lhs = acc * qh;
        double rhs = std::exp(-prof.W(x)) * v_eval(v, x) * (1.0 + 1e-9);
        worst_margin = std::max(worst_margin, lhs / rhs);
        if (!(lhs <= rhs)) drift_ok = false;
    }
    if (!drift_ok) {
        pass = false;
        detail << "drift inequality violated; ";
    }

    // Inside fraction measured on a simulated path, on the stated window.
    std::vector<double> nodes = uniform_nodes(-22.0, 22.0, 800);
    ObservationPath path = simulate(good, 200, 1).obs;
    EnvStats env = env_stats(good, Scenario::Filter, path, v, prof, prof.d_under,
                             nodes, -22.0, 22.0);
    if (!(env.gamma_hat > 2.0 / 3.0)) {
        pass = false;
        detail << "inside fraction " << fmt(env.gamma_hat) << "; ";
    }

    // The constructed constants satisfy their defining system on direct
    // substitution, all in log space.
    bool tc_ok = true;
    try {
        TheoremConstants tc = theorem_constants(env.l_hat, env.gamma_hat, ld.rho_cd,
                                                prof.d_under, ld.log_one_minus_rho);
        double lhs = std::log(2.0 * tc.rho - 1.0);
        double log_rho_cd = std::log1p(-std::exp(ld.log_one_minus_rho));
        const double eps = 1e-9;
        tc_ok = tc.gamma_minus > 1.0 - env.gamma_hat &&
                tc.gamma_plus < 2.0 * env.gamma_hat - 1.0 &&
                tc.gamma_minus < tc.beta && tc.beta < tc.gamma_plus &&
                tc.d >= prof.d_under &&
                lhs >= (tc.beta - tc.gamma_minus) * log_rho_cd - eps &&
                lhs >= -0.5 * tc.d * (tc.gamma_plus - tc.beta) + 2.0 * env.l_hat - eps &&
                tc.rho < 1.0 && tc.rho > 0.0;
    } catch (const std::exception& e) {
        tc_ok = false;
        detail << "constants threw: " << e.what() << "; ";
    }
    if (!tc_ok) {
        pass = false;
        detail << "constant system violated; ";
    }

    detail << "inside fraction " << fmt(env.gamma_hat) << ", drift margin "
           << fmt(worst_margin);
    report(6, "assumption-checker", pass, detail.str());
}

// ---------------------------------------------------------------- criterion 7

void criterion_hygiene(const AllTraces& all) {
    bool pass = true;
    std::ostringstream detail;

    // Quadrature refinement: the weighted norm of a Gaussian difference must
    // be stable under a tenfold finer grid.
    const double L = 15.0;
    auto gap_norm = [&](std::size_t n, const WeightSpec& w) {
        std::vector<double> nodes = uniform_nodes(-L, L, n);
        GridMeasure a = gaussian_on_grid(nodes, -L, L, 0.0, 1.0);
        GridMeasure b = gaussian_on_grid(nodes, -L, L, 0.8, 1.3);
        return vnorm(subtract(a, b), w);
    };
    double worst_quad = 0.0;
    for (const WeightSpec& w : {WeightSpec::exp_abs(1.0), WeightSpec::exp_square(0.3)}) {
        double coarse = gap_norm(1500, w);
        double fine = gap_norm(15000, w);
        worst_quad = std::max(worst_quad, std::abs(coarse - fine) / fine);
    }
    if (!(worst_quad < 1e-4)) {
        pass = false;
        detail << "quadrature drift " << fmt(worst_quad) << "; ";
    }

    // Tail diagnostic across every accepted run.
    double worst_tail = 0.0;
    for (const StabilityTrace& t : all.stable) worst_tail = std::max(worst_tail, t.max_tail);
    for (const StabilityTrace& t : all.nonlinear) worst_tail = std::max(worst_tail, t.max_tail);
    worst_tail = std::max(worst_tail, all.divergent.max_tail);
    if (!(worst_tail < 1e-8)) {
        pass = false;
        detail << "tail " << fmt(worst_tail) << "; ";
    }

    // Re-running a seed reproduces the trace byte for byte.
    StabilityTrace again = stability_run(all.cfg_stable, all.cfg_stable.seeds.at(0));
    if (trace_to_csv(again) != trace_to_csv(all.stable.at(0))) {
        pass = false;
        detail << "seed rerun differs; ";
    }

    detail << "quadrature drift " << fmt(worst_quad) << ", worst tail "
           << fmt(worst_tail);
    report(7, "numerical-hygiene", pass, detail.str());
}

}  // namespace

int main() {
    try {
        criterion_oracle_equivalence();
        AllTraces all = run_all_presets();
        criterion_forgetting(all);
        criterion_domination(all);
        criterion_s_decomposition(all);
        criterion_dichotomy(all);
        criterion_assumption_checker();
        criterion_hygiene(all);
    } catch (const std::exception& e) {
        std::printf("ACCEPTANCE aborted: %s\n", e.what());
        return 2;
    }
    if (g_failures > 0) {
        std::printf("ACCEPTANCE result: %d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("ACCEPTANCE result: all criteria passed\n");
    return 0;
}
