#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vfilter/errors.hpp"
#include "vfilter/exact_gaussian.hpp"
#include "vfilter/experiments.hpp"
#include "vfilter/filter_engine.hpp"
#include "vfilter/presets.hpp"

namespace {

using namespace vfilter;

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

WeightSpec weight_of(const std::string& family, double c) {
    if (family == "exp_abs") return WeightSpec::exp_abs(c);
    if (family == "exp_square") return WeightSpec::exp_square(c);
    throw domain_error("weight family must be 'exp_abs' or 'exp_square'");
}

Scenario scenario_of(const std::string& s) {
    if (s == "filter") return Scenario::Filter;
    if (s == "prediction") return Scenario::Prediction;
    throw domain_error("scenario must be 'filter' or 'prediction'");
}

std::pair<double, double> parse_init(const std::string& s) {
    std::size_t comma = s.find(',');
    if (comma == std::string::npos)
        throw domain_error("--init expects 'mean,var', e.g. '0,1'");
    double mean = std::stod(s.substr(0, comma));
    double var = std::stod(s.substr(comma + 1));
    if (!(var > 0.0)) throw domain_error("--init variance must be positive");
    return {mean, var};
}

std::vector<double> divergence_ladder(double rmax) {
    std::vector<double> ladder;
    for (double r = 1.0; r < rmax; r += 1.0) ladder.push_back(r);
    ladder.push_back(rmax);
    return ladder;
}

std::string divergence_csv(const std::vector<DivergencePoint>& pts) {
    std::string out = "r,value,log_value\n";
    for (const DivergencePoint& p : pts)
        out += fmt17(p.r) + "," + fmt17(p.value) + "," + fmt17(p.log_value) + "\n";
    return out;
}

int cmd_simulate(const std::string& model_path, std::size_t n, std::uint64_t seed,
                 const std::string& out, const std::string& states_out) {
    ModelSpec m = model_from_json(read_file(model_path));
    SimulatedPath sim = simulate(m, n, seed);
    write_file(out, path_to_csv(m, sim.obs));
    if (!states_out.empty()) {
        std::string csv = "k,x\n";
        for (std::size_t k = 0; k < sim.x.size(); ++k)
            csv += std::to_string(k) + "," + fmt17(sim.x[k]) + "\n";
        write_file(states_out, csv);
    }
    std::cout << "wrote " << n << " observations to " << out << "\n";
    return 0;
}

int cmd_filter(const std::string& scenario, const std::string& model_path,
               const std::string& init, const std::string& obs_path, const std::string& out,
               double L, std::size_t points, const std::string& family, double c,
               const std::string& dump) {
    ModelSpec m = model_from_json(read_file(model_path));
    Scenario sc = scenario_of(scenario);
    WeightSpec v = weight_of(family, c);
    ObservationPath path = path_from_csv_file(obs_path);
    auto [mean, var] = parse_init(init);
    std::vector<double> nodes = uniform_nodes(-L, L, points);
    GridMeasure lambda0 = gaussian_on_grid(nodes, -L, L, mean, var);
    FilterRun r = run(m, sc, lambda0, path, v);
    write_file(out, run_to_csv(r));
    if (!dump.empty()) dump_densities(r, dump);
    std::cout << "wrote " << r.etas.size() << " steps to " << out << "\n";
    return 0;
}

int cmd_stability(const std::string& config_path, const std::string& out_dir) {
    StabilityConfig cfg = config_from_toml_file(config_path);
    std::filesystem::create_directories(out_dir);

    nlohmann::json summaries = nlohmann::json::array();
    bool first = true;
    for (std::uint64_t seed : cfg.seeds) {
        StabilityTrace t = stability_run(cfg, seed);
        std::string csv = trace_to_csv(t);
        write_file(out_dir + "/trace_" + std::to_string(seed) + ".csv", csv);
        if (first) write_file(out_dir + "/trace.csv", csv);
        first = false;
        summaries.push_back(nlohmann::json::parse(trace_summary_json(t)));
        std::cout << "seed " << seed << ": gap " << fmt17(t.gap_v.front()) << " -> "
                  << fmt17(t.gap_v.back())
                  << (t.fit_ok ? ", slope " + fmt17(t.fit.slope) + ", r2 " + fmt17(t.fit.r2)
                               : ", fit: " + t.fit_error)
                  << "\n";
    }
    write_file(out_dir + "/summary.json", summaries.dump(2) + "\n");

    if (cfg.divergence.enabled) {
        const DivergenceSpec& ds = cfg.divergence;
        auto pts = prediction_vnorm_divergence(ds.alpha, ds.c, divergence_ladder(ds.rmax), ds.x);
        write_file(out_dir + "/divergence.csv", divergence_csv(pts));
        std::cout << "divergence scan: value at R=" << fmt17(pts.back().r) << " is "
                  << fmt17(pts.back().value) << "\n";
    }
    std::cout << "results in " << out_dir << "\n";
    return 0;
}

int cmd_check(const std::string& model_path, double ybar_halfwidth, double c,
              const std::string& family, const std::string& scenario, double L,
              std::size_t points, std::size_t n, std::uint64_t seed, const std::string& out) {
    ModelSpec m = model_from_json(read_file(model_path));
    WeightSpec v = weight_of(family, c);
    Interval ybar{-ybar_halfwidth, ybar_halfwidth};

    nlohmann::json j;
    j["e_conditions"] = nlohmann::json::parse(e_conditions_to_json(check_e_conditions(m)));

    try {
        DriftProfile profile = drift_profile(m, v, ybar);
        LDReport ld = ld_constants(m, profile.D.hi, ybar);
        SimulatedPath sim = simulate(m, n, seed);
        std::vector<double> nodes = uniform_nodes(-L, L, points);
        EnvStats env = env_stats(m, scenario_of(scenario), sim.obs, v, profile,
                                 profile.d_under, nodes, -L, L);

        j["d_under"] = jnum(profile.d_under);
        j["core"] = {{"lo", profile.D.lo}, {"hi", profile.D.hi}};
        j["eps_minus_tilde"] = jnum(ld.eps_minus_tilde);
        j["rho_Cd"] = jnum(ld.rho_cd);
        j["gamma_hat"] = jnum(env.gamma_hat);
        j["l_hat"] = jnum(env.l_hat);
        j["ld"] = nlohmann::json::parse(ld_report_to_json(ld, ybar));
        j["env"] = {{"steps", n},
                    {"seed", seed},
                    {"scenario", scenario},
                    {"gamma_hat", jnum(env.gamma_hat)},
                    {"l_hat", jnum(env.l_hat)}};
        try {
            TheoremConstants tc = theorem_constants(env.l_hat, env.gamma_hat, ld.rho_cd,
                                                    profile.d_under, ld.log_one_minus_rho);
            j["constants"] = {{"gamma_minus", jnum(tc.gamma_minus)},
                              {"gamma_plus", jnum(tc.gamma_plus)},
                              {"beta", jnum(tc.beta)},
                              {"d", jnum(tc.d)},
                              {"rho", jnum(tc.rho)},
                              {"log_rho", jnum(tc.log_rho)}};
        } catch (const std::exception& e) {
            j["constants"] = {{"error", e.what()}};
        }
    } catch (const std::exception& e) {
        j["error"] = e.what();
        j["d_under"] = "nan";
        j["eps_minus_tilde"] = "nan";
        j["rho_Cd"] = "nan";
        j["gamma_hat"] = "nan";
        j["l_hat"] = "nan";
    }

    write_file(out, j.dump(2) + "\n");
    std::cout << "wrote report to " << out << "\n";
    return 0;
}

int cmd_divergence(double alpha, double c, double rmax, double x, const std::string& out) {
    auto pts = prediction_vnorm_divergence(alpha, c, divergence_ladder(rmax), x);
    std::string csv = divergence_csv(pts);
    if (out.empty()) {
        std::cout << csv;
    } else {
        write_file(out, csv);
        std::cout << "wrote " << pts.size() << " ladder points to " << out << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"grid laboratory for products of nonnegative kernels in a random environment"};
    app.require_subcommand(1);

    std::string model_path, obs_path, out_path, out_dir, config_path, states_out, dump;
    std::string scenario = "filter", family = "exp_abs", init = "0,1";
    double L = 12.0, c = 1.0, ybar = 1.0, alpha = 0.5, rmax = 10.0, x = 0.0;
    std::size_t n = 200, points = 2000;
    std::uint64_t seed = 0;

    CLI::App* sim = app.add_subcommand("simulate", "draw a signal/observation path");
    sim->add_option("--model", model_path, "model json file")->required();
    sim->add_option("--n", n, "path length")->required();
    sim->add_option("--seed", seed, "rng seed")->required();
    sim->add_option("--out", out_path, "observation csv")->required();
    sim->add_option("--states-out", states_out, "also write the hidden states");

    CLI::App* fil = app.add_subcommand("filter", "run the normalized recursion on a grid");
    fil->add_option("--scenario", scenario, "filter|prediction");
    fil->add_option("--model", model_path, "model json file")->required();
    fil->add_option("--init", init, "initial law as 'mean,var'")->required();
    fil->add_option("--obs", obs_path, "observation csv")->required();
    fil->add_option("--out", out_path, "per-step csv")->required();
    fil->add_option("--L", L, "grid half width");
    fil->add_option("--points", points, "grid size");
    fil->add_option("--weight", family, "exp_abs|exp_square");
    fil->add_option("--c", c, "weight rate");
    fil->add_option("--dump-densities", dump, "raw density dump file");

    CLI::App* stab = app.add_subcommand("stability", "two-filter gap experiment");
    stab->add_option("--config", config_path, "toml run config")->required();
    stab->add_option("--out-dir", out_dir, "output directory")->required();

    CLI::App* chk = app.add_subcommand("check-assumptions", "model diagnostics report");
    chk->add_option("--model", model_path, "model json file")->required();
    chk->add_option("--ybar", ybar, "observation window half width")->required();
    chk->add_option("--c", c, "weight rate")->required();
    chk->add_option("--family", family, "exp_abs|exp_square");
    chk->add_option("--scenario", scenario, "filter|prediction");
    chk->add_option("--L", L, "grid half width for the environment pass");
    chk->add_option("--points", points, "grid size for the environment pass");
    chk->add_option("--n", n, "environment path length");
    chk->add_option("--seed", seed, "environment path seed");
    chk->add_option("--out", out_path, "report json")->required();

    CLI::App* div = app.add_subcommand("divergence", "radial scan of the weighted moment");
    div->add_option("--alpha", alpha, "state contraction")->required();
    div->add_option("--c", c, "weight rate")->required();
    div->add_option("--rmax", rmax, "largest radius")->required();
    div->add_option("--x", x, "conditioning point");
    div->add_option("--out", out_path, "csv file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(model_path, n, seed, out_path, states_out);
        if (fil->parsed())
            return cmd_filter(scenario, model_path, init, obs_path, out_path, L, points,
                              family, c, dump);
        if (stab->parsed()) return cmd_stability(config_path, out_dir);
        if (chk->parsed())
            return cmd_check(model_path, ybar, c, family, scenario, L, points, n, seed,
                             out_path);
        if (div->parsed()) return cmd_divergence(alpha, c, rmax, x, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
