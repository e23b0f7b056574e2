#include "vfilter/grid_measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vfilter/errors.hpp"

namespace vfilter {

std::vector<double> uniform_nodes(double lo, double hi, std::size_t n) {
    if (!(hi > lo) || n == 0) throw domain_error("uniform_nodes: need hi > lo and n >= 1");
    const double h = (hi - lo) / static_cast<double>(n);
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = lo + (static_cast<double>(i) + 0.5) * h;
    return xs;
}

double cell_width(const GridMeasure& m) {
    if (m.size() < 2) return m.hi - m.lo;
    return m.nodes[1] - m.nodes[0];
}

void validate(const GridMeasure& m) {
    if (m.nodes.size() != m.weights.size())
        throw domain_error("GridMeasure: nodes/weights length mismatch");
    if (m.nodes.empty()) throw domain_error("GridMeasure: empty support");
    if (!(m.lo < m.hi)) throw domain_error("GridMeasure: bad window");
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
        if (!std::isfinite(m.nodes[i])) throw domain_error("GridMeasure: non-finite node");
        if (i > 0 && !(m.nodes[i] > m.nodes[i - 1]))
            throw domain_error("GridMeasure: nodes must be strictly increasing");
        if (m.nodes[i] < m.lo || m.nodes[i] > m.hi)
            throw domain_error("GridMeasure: node outside window");
        if (!std::isfinite(m.weights[i])) throw domain_error("GridMeasure: non-finite weight");
    }
}

bool is_probability(const GridMeasure& m, double tol) {
    double mass = 0.0;
    for (double w : m.weights) {
        if (w < 0.0) return false;
        mass += w;
    }
    return std::fabs(mass - 1.0) <= tol;
}

GridMeasure gaussian_on_grid(const std::vector<double>& nodes, double lo, double hi,
                             double mean, double var) {
    if (!(var > 0.0)) throw domain_error("gaussian_on_grid: variance must be positive");
    GridMeasure m{nodes, std::vector<double>(nodes.size()), lo, hi};
    const double h = nodes.size() > 1 ? nodes[1] - nodes[0] : hi - lo;
    const double inv2v = 0.5 / var;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double d = nodes[i] - mean;
        m.weights[i] = std::exp(-d * d * inv2v) * h;  // common prefactor cancels below
    }
    return normalize(m).first;
}

GridMeasure delta_on_grid(const std::vector<double>& nodes, double lo, double hi, double x) {
    GridMeasure m{nodes, std::vector<double>(nodes.size(), 0.0), lo, hi};
    std::size_t best = 0;
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (std::fabs(nodes[i] - x) < std::fabs(nodes[best] - x)) best = i;
    m.weights[best] = 1.0;
    return m;
}

double integrate(const GridMeasure& m, const std::function<double(double)>& phi) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s += phi(m.nodes[i]) * m.weights[i];
    return s;
}

double vnorm(const GridMeasure& m, const WeightSpec& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double w = std::fabs(m.weights[i]);
        if (w == 0.0) continue;  // V * 0 = 0 even where V overflows
        s += v_eval(v, m.nodes[i]) * w;
    }
    return s;
}

double tail_fraction(const GridMeasure& m, const WeightSpec& v) {
    const std::size_t n = m.size();
    std::size_t edge = static_cast<std::size_t>(std::floor(0.025 * static_cast<double>(n)));
    edge = std::max<std::size_t>(edge, 1);
    if (2 * edge >= n) return 1.0;
    double tail = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = std::fabs(m.weights[i]);
        if (w == 0.0) continue;
        const double t = v_eval(v, m.nodes[i]) * w;
        total += t;
        if (i < edge || i >= n - edge) tail += t;
    }
    if (total == 0.0) return 0.0;
    return tail / total;
}

double grid_mean(const GridMeasure& m) {
    double s = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        s += m.nodes[i] * m.weights[i];
        mass += m.weights[i];
    }
    return s / mass;
}

double grid_var(const GridMeasure& m) {
    const double mu = grid_mean(m);
    double s = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double d = m.nodes[i] - mu;
        s += d * d * m.weights[i];
        mass += m.weights[i];
    }
    return s / mass;
}

std::pair<GridMeasure, double> normalize(const GridMeasure& m) {
    double mass = 0.0;
    for (double w : m.weights) mass += w;
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw zero_mass_error("normalize: total mass is not positive and finite");
    GridMeasure out = m;
    const double inv = 1.0 / mass;
    for (double& w : out.weights) w *= inv;
    return {std::move(out), mass};
}

GridMeasure scale(const GridMeasure& m, double a) {
    GridMeasure out = m;
    for (double& w : out.weights) w *= a;
    return out;
}

GridMeasure subtract(const GridMeasure& a, const GridMeasure& b) {
    if (a.nodes != b.nodes) throw grid_mismatch_error("subtract: node sets differ");
    GridMeasure out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.weights[i] -= b.weights[i];
    return out;
}

}  // namespace vfilter
