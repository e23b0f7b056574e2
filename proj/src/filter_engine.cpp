#include "vfilter/filter_engine.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "vfilter/errors.hpp"

namespace vfilter {

GridMeasure initial_measure(const ModelSpec& m, Scenario sc, const GridMeasure& lambda0,
                            double y0) {
    if (sc == Scenario::Prediction) return lambda0;
    GridMeasure out = lambda0;
    for (std::size_t i = 0; i < out.size(); ++i)
        out.weights[i] *= obs_density(m, out.nodes[i], y0);
    try {
        return normalize(out).first;
    } catch (const zero_mass_error&) {
        throw zero_mass_error("initial_measure: observation weight underflowed the prior");
    }
}

StepResult step_with_kernel(const GridMeasure& eta, const KernelGrid& k) {
    GridMeasure pushed = apply_kernel(eta, k);
    auto [normalized, mass] = normalize(pushed);
    return {std::move(normalized), mass};
}

StepResult step(const GridMeasure& eta, const ModelSpec& m, Scenario sc, double y_now,
                double y_next) {
    const KernelGrid k = q_kernel(m, sc, y_now, y_next, eta.nodes, eta.lo, eta.hi);
    return step_with_kernel(eta, k);
}

FilterRun run(const ModelSpec& m, Scenario sc, const GridMeasure& lambda0,
              const ObservationPath& path, const WeightSpec& v) {
    if (path.y.empty()) throw domain_error("run: empty observation path");
    FilterRun out;
    out.scenario = sc;
    const std::size_t n = path.y.size();
    out.etas.reserve(n);
    out.etas.push_back(initial_measure(m, sc, lambda0, path.y[0]));
    out.v_moments.push_back(vnorm(out.etas[0], v));
    out.tail_diags.push_back(tail_fraction(out.etas[0], v));
    for (std::size_t k = 1; k < n; ++k) {
        StepResult s;
        try {
            s = step(out.etas[k - 1], m, sc, path.y[k - 1], path.y[k]);
        } catch (const zero_mass_error&) {
            std::ostringstream os;
            os << "run: normalization mass vanished at step " << k;
            throw zero_mass_error(os.str());
        }
        out.lambdas.push_back(s.lambda);
        out.etas.push_back(std::move(s.eta));
        out.v_moments.push_back(vnorm(out.etas[k], v));
        out.tail_diags.push_back(tail_fraction(out.etas[k], v));
    }
    return out;
}

SDecomposition s_decompose(const ModelSpec& m, Scenario sc, const ObservationPath& path,
                           std::size_t n, const GridMeasure& lambda0) {
    if (n == 0) throw domain_error("s_decompose: n must be >= 1");
    if (path.y.size() < n + 1) throw domain_error("s_decompose: path shorter than n + 1");

    FilterRun fr = run(m, sc, lambda0, path, WeightSpec::exp_abs(1.0));
    const GridMeasure nu = fr.etas[0];
    const std::size_t g = nu.size();

    SDecomposition out;
    out.lambdas.assign(fr.lambdas.begin(), fr.lambdas.begin() + static_cast<long>(n));
    out.direct = fr.etas[n];

    // backward sweep: h[n] = 1, h[k] = (step-k kernel applied to h[k+1]) / lambda_k
    out.h.assign(n + 1, std::vector<double>(g, 1.0));
    for (std::size_t k = n; k-- > 0;) {
        const KernelGrid kk = q_kernel(m, sc, path.y[k], path.y[k + 1], nu.nodes, nu.lo, nu.hi);
        std::vector<double> qh = apply_kernel_to_function(kk, out.h[k + 1]);
        const double lam = out.lambdas[k];
        for (std::size_t i = 0; i < g; ++i) qh[i] /= lam;
        out.h[k] = std::move(qh);
    }

    double nu_h0 = 0.0;
    for (std::size_t i = 0; i < g; ++i) nu_h0 += nu.weights[i] * out.h[0][i];
    out.nu_h0 = nu_h0;

    // forward sweep through the Markov transitions built from the same kernels
    GridMeasure cur = nu;
    for (std::size_t i = 0; i < g; ++i) cur.weights[i] *= out.h[0][i];
    out.s_rowsums.assign(n, std::vector<double>(g, 0.0));
    for (std::size_t k = 0; k < n; ++k) {
        KernelGrid kk = q_kernel(m, sc, path.y[k], path.y[k + 1], nu.nodes, nu.lo, nu.hi);
        const double lam = out.lambdas[k];
        for (std::size_t i = 0; i < g; ++i) {
            double* row = &kk.density[i * g];
            const double denom = lam * out.h[k][i];
            double rs = 0.0;
            for (std::size_t j = 0; j < g; ++j) {
                row[j] = row[j] * out.h[k + 1][j] / denom;
                rs += row[j];
            }
            out.s_rowsums[k][i] = rs;
        }
        cur = apply_kernel(cur, kk);
    }
    out.reconstruction = std::move(cur);
    return out;
}

namespace {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

std::string run_to_csv(const FilterRun& r) {
    std::ostringstream os;
    os << "k,lambda_k,v_moment_k,tail_diag_k\n";
    for (std::size_t k = 0; k < r.etas.size(); ++k) {
        const double lam =
            k < r.lambdas.size() ? r.lambdas[k] : std::numeric_limits<double>::quiet_NaN();
        os << k << "," << fmt17(lam) << "," << fmt17(r.v_moments[k]) << ","
           << fmt17(r.tail_diags[k]) << "\n";
    }
    return os.str();
}

void dump_densities(const FilterRun& r, const std::string& filename) {
    std::ofstream f(filename, std::ios::binary);
    if (!f) throw domain_error("dump_densities: cannot open " + filename);
    const std::uint64_t steps = r.etas.size();
    const std::uint64_t nodes = r.etas.empty() ? 0 : r.etas[0].size();
    f.write(reinterpret_cast<const char*>(&steps), sizeof(steps));
    f.write(reinterpret_cast<const char*>(&nodes), sizeof(nodes));
    if (nodes == 0) return;
    f.write(reinterpret_cast<const char*>(r.etas[0].nodes.data()),
            static_cast<std::streamsize>(nodes * sizeof(double)));
    for (const GridMeasure& m : r.etas)
        f.write(reinterpret_cast<const char*>(m.weights.data()),
                static_cast<std::streamsize>(nodes * sizeof(double)));
}

}  // namespace vfilter
