#include "vfilter/models.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "vfilter/errors.hpp"

namespace vfilter {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double normal_pdf(double x, double mean, double var) {
    const double d = x - mean;
    return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * M_PI * var);
}

// One normal draw per call; Box-Muller without the cached spare so the
// generator state alone determines the stream.
double draw_normal(std::mt19937_64& gen) {
    const double u1 = 1.0 - std::ldexp(static_cast<double>(gen() >> 11), -53);  // (0, 1]
    const double u2 = std::ldexp(static_cast<double>(gen() >> 11), -53);        // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

ModelSpec ModelSpec::linear(double alpha, double beta_obs) {
    if (!(std::fabs(alpha) < 1.0)) throw domain_error("linear model needs |alpha| < 1");
    if (!(beta_obs > 0.0)) throw domain_error("beta_obs must be positive");
    ModelSpec m;
    m.variant = Variant::Linear;
    m.alpha = alpha;
    m.b = FuncSpec::scale(alpha - 1.0);
    m.h = FuncSpec::identity();
    m.sigma = 1.0;
    m.beta_obs = beta_obs;
    return m;
}

ModelSpec ModelSpec::nonlinear(FuncSpec b, double sigma, FuncSpec h, double beta_obs) {
    if (!(sigma > 0.0)) throw domain_error("sigma must be positive");
    if (!(beta_obs > 0.0)) throw domain_error("beta_obs must be positive");
    ModelSpec m;
    m.variant = Variant::Nonlinear;
    m.alpha = 0.0;
    m.b = b;
    m.h = h;
    m.sigma = sigma;
    m.beta_obs = beta_obs;
    return m;
}

double transition_density(const ModelSpec& m, double x, double x_next) {
    return normal_pdf(x_next, m.drift_mean(x), m.sigma * m.sigma);
}

double obs_density(const ModelSpec& m, double x, double y) {
    return normal_pdf(y, m.h(x), m.beta_obs * m.beta_obs);
}

double obs_density_log(const ModelSpec& m, double x, double y) {
    const double d = (y - m.h(x)) / m.beta_obs;
    return -0.5 * d * d - std::log(m.beta_obs) - 0.5 * kLog2Pi;
}

namespace {

// Fills row i with N(t_j; mu, sigma^2) * col_factor[j] without one exp per
// entry: along a uniform target grid the Gaussian satisfies
//   dens(j*+s) = dens(j*) * a^s * q^(s^2),
// a geometric-in-s recurrence (three multiplies per entry).  Starting at the
// node nearest the mean keeps every intermediate <= exp(delta^2/2sigma^2),
// so nothing overflows and far entries underflow to an honest zero.
void fill_gaussian_row(double* row, const std::vector<double>& targets, double step,
                       double mu, double sigma, const std::vector<double>& col_factor) {
    const std::size_t n = targets.size();
    const double inv2s = 0.5 / (sigma * sigma);
    double pos = (mu - targets[0]) / step;
    std::size_t jstar = 0;
    if (pos > 0.0) jstar = std::min<std::size_t>(static_cast<std::size_t>(pos + 0.5), n - 1);
    const double delta = targets[jstar] - mu;
    const double e0 = std::exp(-delta * delta * inv2s);
    const double q = std::exp(-step * step * inv2s);
    const double q2 = q * q;
    const double a_up = std::exp(-step * delta * 2.0 * inv2s);

    row[jstar] = e0 * col_factor[jstar];
    double t = e0, rho = a_up * q;
    for (std::size_t j = jstar + 1; j < n; ++j) {
        t *= rho;
        rho *= q2;
        if (t == 0.0) break;  // rest of the row underflows too
        row[j] = t * col_factor[j];
    }
    t = e0;
    rho = q / a_up;
    for (std::size_t j = jstar; j-- > 0;) {
        t *= rho;
        rho *= q2;
        if (t == 0.0) break;
        row[j] = t * col_factor[j];
    }
}

KernelGrid make_kernel(const ModelSpec& m, const std::vector<double>& nodes, double lo,
                       double hi, const std::vector<double>& col_factor,
                       const std::vector<double>& row_factor) {
    KernelGrid k;
    k.source_nodes = nodes;
    k.target_nodes = nodes;
    k.source_lo = k.target_lo = lo;
    k.source_hi = k.target_hi = hi;
    const std::size_t n = nodes.size();
    k.density.assign(n * n, 0.0);
    const double step = n > 1 ? nodes[1] - nodes[0] : hi - lo;
    for (std::size_t i = 0; i < n; ++i) {
        fill_gaussian_row(&k.density[i * n], nodes, step, m.drift_mean(nodes[i]), m.sigma,
                          col_factor);
        if (!row_factor.empty()) {
            const double r = row_factor[i];
            double* row = &k.density[i * n];
            for (std::size_t j = 0; j < n; ++j) row[j] *= r;
        }
    }
    return k;
}

}  // namespace

KernelGrid transition_kernel(const ModelSpec& m, const std::vector<double>& nodes,
                             double lo, double hi) {
    const std::size_t n = nodes.size();
    const double step = n > 1 ? nodes[1] - nodes[0] : hi - lo;
    const double norm = step / (std::sqrt(2.0 * M_PI) * m.sigma);
    std::vector<double> col(n, norm);
    return make_kernel(m, nodes, lo, hi, col, {});
}

KernelGrid q_kernel(const ModelSpec& m, Scenario sc, double y_now, double y_next,
                    const std::vector<double>& nodes, double lo, double hi) {
    const std::size_t n = nodes.size();
    const double step = n > 1 ? nodes[1] - nodes[0] : hi - lo;
    const double norm = step / (std::sqrt(2.0 * M_PI) * m.sigma);
    std::vector<double> col(n, norm), row;
    if (sc == Scenario::Filter) {
        for (std::size_t j = 0; j < n; ++j) col[j] *= obs_density(m, nodes[j], y_next);
    } else {
        row.resize(n);
        for (std::size_t i = 0; i < n; ++i) row[i] = obs_density(m, nodes[i], y_now);
    }
    return make_kernel(m, nodes, lo, hi, col, row);
}

SimulatedPath simulate(const ModelSpec& m, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw domain_error("simulate: n must be >= 1");
    std::mt19937_64 gen(seed);
    SimulatedPath out;
    out.x.resize(n);
    out.obs.y.resize(n);
    out.obs.seed = seed;
    out.obs.origin = ObservationPath::Origin::Simulated;

    double x;
    if (m.variant == ModelSpec::Variant::Linear) {
        x = draw_normal(gen) / std::sqrt(1.0 - m.alpha * m.alpha);
    } else {
        x = 0.0;
        for (int i = 0; i < 10000; ++i) x = m.drift_mean(x) + m.sigma * draw_normal(gen);
    }
    for (std::size_t k = 0; k < n; ++k) {
        out.x[k] = x;
        out.obs.y[k] = m.h(x) + m.beta_obs * draw_normal(gen);
        x = m.drift_mean(x) + m.sigma * draw_normal(gen);
    }
    return out;
}

double stationary_sd_x(const ModelSpec& m) {
    if (m.variant == ModelSpec::Variant::Linear)
        return 1.0 / std::sqrt(1.0 - m.alpha * m.alpha);
    // deterministic reference run, independent of user seeds
    const std::size_t n = 20000;
    SimulatedPath p = simulate(m, n, 0xC0FFEEULL);
    double s = 0.0, s2 = 0.0;
    for (double v : p.x) {
        s += v;
        s2 += v * v;
    }
    const double mean = s / static_cast<double>(n);
    return std::sqrt(s2 / static_cast<double>(n) - mean * mean);
}

double stationary_sd_y(const ModelSpec& m) {
    if (m.variant == ModelSpec::Variant::Linear)
        return std::sqrt(1.0 / (1.0 - m.alpha * m.alpha) + m.beta_obs * m.beta_obs);
    const std::size_t n = 20000;
    SimulatedPath p = simulate(m, n, 0xC0FFEEULL);
    double s = 0.0, s2 = 0.0;
    for (double v : p.obs.y) {
        s += v;
        s2 += v * v;
    }
    const double mean = s / static_cast<double>(n);
    return std::sqrt(s2 / static_cast<double>(n) - mean * mean);
}

namespace {

nlohmann::json func_to_json(const FuncSpec& f) {
    return {{"kind", f.kind == FuncSpec::Kind::Scale ? "scale" : "constant"},
            {"value", f.value}};
}

FuncSpec func_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const double value = j.at("value").get<double>();
    if (kind == "scale") return FuncSpec::scale(value);
    if (kind == "constant") return FuncSpec::constant(value);
    throw domain_error("unknown function kind: " + kind);
}

}  // namespace

std::string model_to_json(const ModelSpec& m) {
    nlohmann::json j;
    if (m.variant == ModelSpec::Variant::Linear) {
        j["variant"] = "linear";
        j["alpha"] = m.alpha;
    } else {
        j["variant"] = "nonlinear";
        j["b"] = func_to_json(m.b);
        j["sigma"] = m.sigma;
        j["h"] = func_to_json(m.h);
    }
    j["beta_obs"] = m.beta_obs;
    return j.dump();
}

ModelSpec model_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    const std::string variant = j.at("variant").get<std::string>();
    const double beta = j.at("beta_obs").get<double>();
    if (variant == "linear") return ModelSpec::linear(j.at("alpha").get<double>(), beta);
    if (variant == "nonlinear")
        return ModelSpec::nonlinear(func_from_json(j.at("b")), j.at("sigma").get<double>(),
                                    func_from_json(j.at("h")), beta);
    throw domain_error("unknown model variant: " + variant);
}

namespace {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

std::string path_to_csv(const ModelSpec& m, const ObservationPath& p) {
    std::ostringstream os;
    os << "# model=" << model_to_json(m) << " seed=" << p.seed << " origin="
       << (p.origin == ObservationPath::Origin::Simulated ? "simulated" : "external") << "\n";
    os << "k,y\n";
    for (std::size_t k = 0; k < p.y.size(); ++k) os << k << "," << fmt17(p.y[k]) << "\n";
    return os.str();
}

ObservationPath path_from_csv(const std::string& text) {
    ObservationPath p;
    p.origin = ObservationPath::Origin::External;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find("seed=");
            if (pos != std::string::npos) p.seed = std::stoull(line.substr(pos + 5));
            const auto opos = line.find("origin=simulated");
            if (opos != std::string::npos) p.origin = ObservationPath::Origin::Simulated;
            continue;
        }
        if (line.rfind("k,", 0) == 0) continue;  // header row
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw domain_error("path csv: malformed line: " + line);
        p.y.push_back(std::stod(line.substr(comma + 1)));
    }
    if (p.y.empty()) throw domain_error("path csv: no observations");
    return p;
}

ObservationPath path_from_csv_file(const std::string& filename) {
    return path_from_csv(read_file(filename));
}

void write_file(const std::string& filename, const std::string& content) {
    std::ofstream f(filename, std::ios::binary);
    if (!f) throw domain_error("cannot open for writing: " + filename);
    f << content;
}

std::string read_file(const std::string& filename) {
    std::ifstream f(filename, std::ios::binary);
    if (!f) throw domain_error("cannot open for reading: " + filename);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

}  // namespace vfilter
