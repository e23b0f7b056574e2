#include "vfilter/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "vfilter/errors.hpp"
#include "vfilter/exact_gaussian.hpp"

namespace vfilter {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logaddexp(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    double m = std::max(a, b);
    if (m == kInf) return kInf;
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

nlohmann::json jnum(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

double mass_inside(const GridMeasure& m, Interval box) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m.nodes[i] >= box.lo && m.nodes[i] <= box.hi) s += m.weights[i];
    return s;
}

struct LinFit {
    double slope = 0.0, intercept = 0.0, r2 = 1.0;
};

LinFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
    double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LinFit f;
    f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    if (syy > 0.0) {
        double ssres = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double r = ys[i] - (f.intercept + f.slope * xs[i]);
            ssres += r * r;
        }
        f.r2 = 1.0 - ssres / syy;
    }
    return f;
}

double floor_at(const std::vector<double>& floors, std::size_t n) {
    if (floors.empty()) return 1e-14;
    return floors[std::min(n, floors.size() - 1)];
}

}  // namespace

BoundValue forget_bound(const BoundContext& ctx, std::size_t n, double d,
                        const TheoremConstants& tc) {
    if (ctx.cum_log_z.size() < n + 1 || ctx.cum_in.size() < n + 1 ||
        ctx.vmom.size() < n + 1 || ctx.vmom_tilde.size() < n + 1)
        throw domain_error("forget_bound: context shorter than requested step");

    double nn = static_cast<double>(n);
    double log_rho_cd = std::log1p(-std::exp(ctx.log_one_minus_rho));
    double e1 = std::floor(nn * (tc.beta - tc.gamma_minus));
    double term1 = std::log(2.0) + std::log(ctx.vmom[n]) + std::log(ctx.vmom_tilde[n]);
    if (e1 > 0.0) term1 += e1 * log_rho_cd;  // guards 0 * (-inf) when rho is 0

    double e2 = std::floor(nn * (tc.gamma_plus - tc.beta));
    double term2 = std::log(2.0) + ctx.log_nu_ratio + ctx.log_nu_ratio_tilde -
                   0.5 * d * e2 + 2.0 * ctx.cum_log_z[n];

    BoundValue b;
    b.log_value = logaddexp(term1, term2);
    b.value = std::exp(b.log_value);
    double need = std::max(1.0 - tc.gamma_minus, 0.5 * (1.0 + tc.gamma_plus));
    b.qualifies = n >= 1 && static_cast<double>(ctx.cum_in[n]) >= nn * need;
    return b;
}

BoundValue echeck_bound(const BoundContext& ctx, std::size_t n, double d, bool tilde) {
    if (ctx.cum_log_z.size() < n + 1 || ctx.cum_in.size() < n + 1 ||
        ctx.log_t_d.size() + 1 < n + 1)
        throw domain_error("echeck_bound: context shorter than requested step");

    double ratio = tilde ? ctx.log_nu_ratio_tilde : ctx.log_nu_ratio;
    double acc = ratio - d * static_cast<double>(ctx.cum_in[n]) + ctx.cum_log_z[n];
    for (std::size_t k = 1; k <= n; ++k) {
        double i_tail = static_cast<double>(ctx.cum_in[n] - ctx.cum_in[k - 1]);
        double z_tail = ctx.cum_log_z[n] - ctx.cum_log_z[k - 1];
        double term = ctx.log_v_d + d - d * i_tail + z_tail - ctx.log_t_d[k - 1];
        acc = logaddexp(acc, term);
    }
    BoundValue b;
    b.log_value = acc;
    b.value = std::exp(acc);
    b.qualifies = true;
    return b;
}

std::vector<double> censor_floors(const std::vector<double>& vmom,
                                  const std::vector<double>& vmom_tilde) {
    std::vector<double> floors(vmom.size(), 1e-14);
    for (std::size_t i = 0; i < vmom.size(); ++i) {
        double scale = std::max(1.0, std::max(vmom[i], i < vmom_tilde.size() ? vmom_tilde[i] : 0.0));
        floors[i] = 1e-14 * scale;
    }
    return floors;
}

RateFit rate_estimate(const std::vector<double>& gap, std::size_t burn,
                      const std::vector<double>& floors, std::size_t n_cap) {
    if (gap.empty()) throw degenerate_fit_error("rate_estimate: empty gap sequence");
    std::size_t hi = std::min(n_cap, gap.size() - 1);

    // Truncate at the first censored index: past the resolution floor the
    // sequence is rounding noise, and noise can wander back above the cut.
    std::vector<double> xs, ys;
    for (std::size_t n = burn; n <= hi; ++n) {
        if (!(std::isfinite(gap[n]) && gap[n] > floor_at(floors, n))) break;
        xs.push_back(static_cast<double>(n));
        ys.push_back(std::log(gap[n]));
    }
    if (xs.size() < 5)
        throw degenerate_fit_error("rate_estimate: fewer than 5 usable points above the floor");

    LinFit f = least_squares(xs, ys);
    RateFit r;
    r.slope = f.slope;
    r.r2 = f.r2;
    r.rho_hat = std::exp(f.slope);
    r.points = xs.size();
    r.n_lo = static_cast<std::size_t>(xs.front());
    r.n_hi = static_cast<std::size_t>(xs.back());
    return r;
}

QuartileCheck rho_quartile_check(const std::vector<double>& gap,
                                 const std::vector<double>& floors, double log_rho) {
    QuartileCheck q;
    std::vector<std::size_t> usable;
    for (std::size_t n = 0; n < gap.size(); ++n) {
        if (!(std::isfinite(gap[n]) && gap[n] > floor_at(floors, n))) break;
        usable.push_back(n);
    }
    if (usable.size() < 2) return q;

    std::size_t count = std::max<std::size_t>(2, usable.size() / 4);
    std::size_t start = usable.size() - count;
    std::vector<double> xs, ys;
    for (std::size_t i = start; i < usable.size(); ++i) {
        double n = static_cast<double>(usable[i]);
        xs.push_back(n);
        ys.push_back(std::log(gap[usable[i]]) - n * log_rho);
    }
    q.points = xs.size();
    q.n_lo = usable[start];
    q.n_hi = usable.back();
    q.endpoint_drop = ys.back() < ys.front();
    if (xs.size() >= 3) q.slope = least_squares(xs, ys).slope;
    q.pass = q.endpoint_drop && (xs.size() < 3 || q.slope <= 0.0);
    return q;
}

StabilityTrace stability_run(const StabilityConfig& cfg, std::uint64_t seed) {
    if (cfg.steps < 1) throw domain_error("stability_run: need at least one step");
    if (cfg.nodes < 16) throw domain_error("stability_run: grid too coarse");

    StabilityTrace t;
    t.config = cfg;
    t.seed = seed;

    const double L = cfg.window_l;
    std::vector<double> nodes = uniform_nodes(-L, L, cfg.nodes);

    double hw = cfg.ybar_halfwidth > 0.0 ? cfg.ybar_halfwidth
                                         : cfg.ybar_sd_factor * stationary_sd_y(cfg.model);
    t.ybar = {-hw, hw};

    DriftProfile prof = drift_profile(cfg.model, cfg.v, t.ybar);
    t.d_under = prof.d_under;
    t.core = prof.D;
    double d = cfg.d_level > 0.0 ? cfg.d_level : prof.d_under;
    if (d < prof.d_under)
        throw domain_error("stability_run: level below the drift profile's base level");
    t.d = d;
    t.box = prof.C_of(d);
    LDReport ld = ld_constants(cfg.model, t.box.hi, t.ybar);
    t.rho_cd = ld.rho_cd;
    t.log_one_minus_rho = ld.log_one_minus_rho;

    SimulatedPath sim = simulate(cfg.model, cfg.steps + 1, seed);
    const std::vector<double>& y = sim.obs.y;

    GridMeasure base = gaussian_on_grid(nodes, -L, L, cfg.init_mean, cfg.init_var);
    GridMeasure base_t = gaussian_on_grid(nodes, -L, L, cfg.init_tilde_mean, cfg.init_tilde_var);
    GridMeasure eta, eta_t;
    try {
        eta = initial_measure(cfg.model, cfg.scenario, base, y[0]);
        eta_t = initial_measure(cfg.model, cfg.scenario, base_t, y[0]);
    } catch (const zero_mass_error& e) {
        throw zero_mass_error(std::string("stability_run: initialization: ") + e.what());
    }

    auto record = [&](const GridMeasure& a, const GridMeasure& b) {
        t.gap_v.push_back(vnorm(subtract(a, b), cfg.v));
        t.vmom.push_back(vnorm(a, cfg.v));
        t.vmom_tilde.push_back(vnorm(b, cfg.v));
        t.tail.push_back(tail_fraction(a, cfg.v));
        t.tail_tilde.push_back(tail_fraction(b, cfg.v));
    };
    record(eta, eta_t);

    BoundContext& ctx = t.ctx;
    ctx.d = d;
    ctx.log_v_d = v_eval_log(cfg.v, std::max(std::abs(t.box.lo), std::abs(t.box.hi)));
    ctx.log_one_minus_rho = ld.log_one_minus_rho;
    ctx.cum_log_z.push_back(0.0);
    ctx.cum_in.push_back(0);

    EnvStats& env = t.env;
    for (std::size_t k = 1; k <= cfg.steps; ++k) {
        KernelGrid kern = q_kernel(cfg.model, cfg.scenario, y[k - 1], y[k], nodes, -L, L);
        if (k == 1) {
            double m_d = mass_inside(apply_kernel(eta, kern), prof.D);
            double m_d_t = mass_inside(apply_kernel(eta_t, kern), prof.D);
            ctx.log_nu_ratio = std::log(t.vmom[0]) - std::log(m_d);
            ctx.log_nu_ratio_tilde = std::log(t.vmom_tilde[0]) - std::log(m_d_t);
        }

        double ups = kernel_vnorm(kern, cfg.v);
        double ret = min_return_mass(kern, prof.D);
        double y_read = cfg.scenario == Scenario::Filter ? y[k] : y[k - 1];
        double log_z = std::log(std::max(1.0, ups)) - std::log(std::min(1.0, ret));
        int in_k = (y_read >= t.ybar.lo && y_read <= t.ybar.hi) ? 1 : 0;
        env.upsilon.push_back(ups);
        env.psi_small.push_back(ret);
        env.log_z.push_back(log_z);
        env.in_k.push_back(in_k);
        env.log_t_d.push_back(log_t_d_of(ld, prof.D, y_read));
        ctx.cum_log_z.push_back(ctx.cum_log_z.back() + log_z);
        ctx.cum_in.push_back(ctx.cum_in.back() + in_k);

        StepResult s, s_t;
        try {
            s = step_with_kernel(eta, kern);
            s_t = step_with_kernel(eta_t, kern);
        } catch (const zero_mass_error& e) {
            throw zero_mass_error("stability_run: step " + std::to_string(k) + ": " + e.what());
        }
        eta = std::move(s.eta);
        eta_t = std::move(s_t.eta);
        t.lambda.push_back(s.lambda);
        t.lambda_tilde.push_back(s_t.lambda);
        record(eta, eta_t);
    }

    double steps_d = static_cast<double>(cfg.steps);
    env.l_hat = ctx.cum_log_z.back() / steps_d;
    env.gamma_hat = static_cast<double>(ctx.cum_in.back()) / steps_d;
    for (std::size_t k = 1; k <= cfg.steps; ++k) {
        double nk = static_cast<double>(k);
        env.xi.push_back(ctx.cum_log_z[k] / nk - env.l_hat);
        env.xi_tilde.push_back(static_cast<double>(ctx.cum_in[k]) / nk - env.gamma_hat);
    }

    ctx.log_t_d = env.log_t_d;
    ctx.vmom = t.vmom;
    ctx.vmom_tilde = t.vmom_tilde;

    t.constants = theorem_constants(env.l_hat, env.gamma_hat, ld.rho_cd, prof.d_under,
                                    ld.log_one_minus_rho);

    for (std::size_t n = 0; n <= cfg.steps; ++n) {
        BoundValue f = forget_bound(ctx, n, d, t.constants);
        BoundValue e = echeck_bound(ctx, n, d, false);
        BoundValue et = echeck_bound(ctx, n, d, true);
        t.bound_forget.push_back(f.value);
        t.bound_echeck.push_back(e.value);
        t.bound_echeck_tilde.push_back(et.value);
        t.qualifies.push_back(f.qualifies ? 1 : 0);
    }

    t.max_tail = 0.0;
    for (double v : t.tail) t.max_tail = std::max(t.max_tail, v);
    for (double v : t.tail_tilde) t.max_tail = std::max(t.max_tail, v);

    const double slack = 1.0 + 1e-6;
    t.forget_dominates = true;
    t.echeck_dominates = true;
    t.echeck_tilde_dominates = true;
    for (std::size_t n = 0; n <= cfg.steps; ++n) {
        if (t.qualifies[n] && !(t.gap_v[n] <= t.bound_forget[n] * slack))
            t.forget_dominates = false;
        if (n >= 1 && !(t.vmom[n] <= t.bound_echeck[n] * slack)) t.echeck_dominates = false;
        if (n >= 1 && !(t.vmom_tilde[n] <= t.bound_echeck_tilde[n] * slack))
            t.echeck_tilde_dominates = false;
    }

    std::vector<double> floors = censor_floors(t.vmom, t.vmom_tilde);
    try {
        t.fit = rate_estimate(t.gap_v, cfg.burn, floors, 200);
        t.fit_ok = true;
    } catch (const degenerate_fit_error& e) {
        t.fit_ok = false;
        t.fit_error = e.what();
    }
    t.quartile = rho_quartile_check(t.gap_v, floors, t.constants.log_rho);
    return t;
}

std::vector<DivergencePoint> prediction_vnorm_divergence(double alpha, double c,
                                                         const std::vector<double>& r_ladder,
                                                         double x) {
    if (r_ladder.empty()) throw domain_error("prediction_vnorm_divergence: empty ladder");
    for (std::size_t i = 0; i < r_ladder.size(); ++i) {
        if (!(r_ladder[i] > 0.0) || !std::isfinite(r_ladder[i]))
            throw domain_error("prediction_vnorm_divergence: ladder radii must be positive");
        if (i > 0 && !(r_ladder[i] > r_ladder[i - 1]))
            throw domain_error("prediction_vnorm_divergence: ladder must increase");
    }
    if (!(c > 0.0)) throw domain_error("prediction_vnorm_divergence: c must be positive");

    double rmax = r_ladder.back();
    std::size_t half = std::max<std::size_t>(200000, static_cast<std::size_t>(20000.0 * rmax));
    double h = rmax / static_cast<double>(half);
    double log_h = std::log(h);
    auto log_term = [&](double z) {
        return 0.5 * z * z * (c - 1.0) + alpha * z * x - 0.5 * alpha * alpha * x * x + log_h;
    };

    // Accumulate outward from zero so each ladder value extends the previous
    // sum; monotonicity in R is then structural, not a quadrature accident.
    std::vector<DivergencePoint> out;
    double acc = -kInf;
    std::size_t next = 0;
    for (std::size_t s = 0; s < half && next < r_ladder.size(); ++s) {
        double z = (static_cast<double>(s) + 0.5) * h;
        while (next < r_ladder.size() && z > r_ladder[next]) {
            out.push_back({r_ladder[next], std::exp(acc), acc});
            ++next;
        }
        if (next >= r_ladder.size()) break;
        acc = logaddexp(acc, log_term(z));
        acc = logaddexp(acc, log_term(-z));
    }
    while (next < r_ladder.size()) {
        out.push_back({r_ladder[next], std::exp(acc), acc});
        ++next;
    }
    return out;
}

std::string trace_to_csv(const StabilityTrace& t) {
    std::ostringstream os;
    os << "n,gap_v,bound_forget,vmom,vmom_tilde,bound_echeck,lambda,lambda_tilde,i_count\n";
    for (std::size_t n = 0; n < t.gap_v.size(); ++n) {
        bool has_step = n < t.lambda.size();
        os << n << ',' << fmt17(t.gap_v[n]) << ',' << fmt17(t.bound_forget[n]) << ','
           << fmt17(t.vmom[n]) << ',' << fmt17(t.vmom_tilde[n]) << ','
           << fmt17(t.bound_echeck[n]) << ','
           << (has_step ? fmt17(t.lambda[n]) : std::string("nan")) << ','
           << (has_step ? fmt17(t.lambda_tilde[n]) : std::string("nan")) << ','
           << t.ctx.cum_in[n] << '\n';
    }
    return os.str();
}

std::string trace_summary_json(const StabilityTrace& t) {
    nlohmann::json j;
    j["name"] = t.config.name;
    j["seed"] = t.seed;
    j["scenario"] = t.config.scenario == Scenario::Filter ? "filter" : "prediction";
    j["steps"] = t.config.steps;
    j["nodes"] = t.config.nodes;
    j["window_l"] = t.config.window_l;
    j["weight_family"] =
        t.config.v.family == WeightSpec::Family::ExpAbs ? "exp_abs" : "exp_square";
    j["weight_c"] = t.config.v.c;
    j["ybar"] = {{"lo", t.ybar.lo}, {"hi", t.ybar.hi}};
    j["d_under"] = jnum(t.d_under);
    j["d"] = jnum(t.d);
    j["box"] = {{"lo", t.box.lo}, {"hi", t.box.hi}};
    j["core"] = {{"lo", t.core.lo}, {"hi", t.core.hi}};
    j["rho_Cd"] = jnum(t.rho_cd);
    j["log_one_minus_rho"] = jnum(t.log_one_minus_rho);
    j["l_hat"] = jnum(t.env.l_hat);
    j["gamma_hat"] = jnum(t.env.gamma_hat);
    j["constants"] = {{"gamma_minus", jnum(t.constants.gamma_minus)},
                      {"gamma_plus", jnum(t.constants.gamma_plus)},
                      {"beta", jnum(t.constants.beta)},
                      {"d", jnum(t.constants.d)},
                      {"rho", jnum(t.constants.rho)},
                      {"log_rho", jnum(t.constants.log_rho)}};
    j["gap_first"] = jnum(t.gap_v.front());
    j["gap_last"] = jnum(t.gap_v.back());
    j["max_tail"] = jnum(t.max_tail);
    int qcount = 0;
    for (char q : t.qualifies) qcount += q;
    j["qualify_count"] = qcount;
    j["forget_dominates"] = t.forget_dominates;
    j["echeck_dominates"] = t.echeck_dominates;
    j["echeck_tilde_dominates"] = t.echeck_tilde_dominates;
    j["fit"] = {{"ok", t.fit_ok},
                {"error", t.fit_error},
                {"slope", jnum(t.fit.slope)},
                {"r2", jnum(t.fit.r2)},
                {"rho_hat", jnum(t.fit.rho_hat)},
                {"points", t.fit.points},
                {"n_lo", t.fit.n_lo},
                {"n_hi", t.fit.n_hi}};
    j["quartile"] = {{"pass", t.quartile.pass},
                     {"endpoint_drop", t.quartile.endpoint_drop},
                     {"slope", jnum(t.quartile.slope)},
                     {"points", t.quartile.points},
                     {"n_lo", t.quartile.n_lo},
                     {"n_hi", t.quartile.n_hi}};
    j["log_forget_final"] = jnum(std::log(t.bound_forget.back()));
    j["log_echeck_final"] = jnum(std::log(t.bound_echeck.back()));
    return j.dump(2);
}

}  // namespace vfilter
