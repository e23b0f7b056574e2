#include "vfilter/kernel.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "vfilter/errors.hpp"

namespace vfilter {

void validate(const KernelGrid& k) {
    if (k.density.size() != k.rows() * k.cols())
        throw domain_error("KernelGrid: density size mismatch");
    if (k.rows() == 0 || k.cols() == 0) throw domain_error("KernelGrid: empty grid");
    for (double d : k.density)
        if (!(d >= 0.0) || !std::isfinite(d))
            throw domain_error("KernelGrid: entries must be finite and >= 0");
}

double row_sum(const KernelGrid& k, std::size_t i) {
    double s = 0.0;
    const std::size_t c = k.cols();
    for (std::size_t j = 0; j < c; ++j) s += k.density[i * c + j];
    return s;
}

GridMeasure apply_kernel(const GridMeasure& m, const KernelGrid& k) {
    if (m.nodes != k.source_nodes)
        throw grid_mismatch_error("apply_kernel: measure nodes differ from kernel source nodes");
    GridMeasure out;
    out.nodes = k.target_nodes;
    out.lo = k.target_lo;
    out.hi = k.target_hi;
    out.weights.assign(k.cols(), 0.0);
    const std::size_t rows = k.rows(), cols = k.cols();
    // Compensated accumulation: the filter recursion reuses these sums every
    // step, so plain summation error compounds into a visible gap floor.
    std::vector<double> comp(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        const double wi = m.weights[i];
        if (wi == 0.0) continue;
        const double* row = &k.density[i * cols];
        for (std::size_t j = 0; j < cols; ++j) {
            const double y = wi * row[j] - comp[j];
            const double t = out.weights[j] + y;
            comp[j] = (t - out.weights[j]) - y;
            out.weights[j] = t;
        }
    }
    return out;
}

std::vector<double> apply_kernel_to_function(const KernelGrid& k, const std::vector<double>& phi) {
    if (phi.size() != k.cols())
        throw grid_mismatch_error("apply_kernel_to_function: length differs from target grid");
    std::vector<double> out(k.rows(), 0.0);
    const std::size_t rows = k.rows(), cols = k.cols();
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = &k.density[i * cols];
        double s = 0.0, comp = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            const double y = row[j] * phi[j] - comp;
            const double t = s + y;
            comp = (t - s) - y;
            s = t;
        }
        out[i] = s;
    }
    return out;
}

KernelGrid compose_kernels(const KernelGrid& a, const KernelGrid& b) {
    if (a.target_nodes != b.source_nodes)
        throw grid_mismatch_error("compose_kernels: inner grids differ");
    KernelGrid out;
    out.source_nodes = a.source_nodes;
    out.source_lo = a.source_lo;
    out.source_hi = a.source_hi;
    out.target_nodes = b.target_nodes;
    out.target_lo = b.target_lo;
    out.target_hi = b.target_hi;
    out.density.assign(a.rows() * b.cols(), 0.0);
    const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t l = 0; l < m; ++l) {
            const double ail = a.density[i * m + l];
            if (ail == 0.0) continue;
            const double* brow = &b.density[l * p];
            double* orow = &out.density[i * p];
            for (std::size_t j = 0; j < p; ++j) orow[j] += ail * brow[j];
        }
    }
    return out;
}

namespace {

// Per-row log-sum-exp fallback for windows where V overflows pointwise.
double kernel_vnorm_logspace(const KernelGrid& k, const WeightSpec& v) {
    const std::size_t rows = k.rows(), cols = k.cols();
    std::vector<double> logv(cols);
    for (std::size_t j = 0; j < cols; ++j) logv[j] = v_eval_log(v, k.target_nodes[j]);
    double best_log = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = &k.density[i * cols];
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < cols; ++j) {
            if (row[j] == 0.0) continue;
            const double e = logv[j] + std::log(row[j]);
            if (e > mx) mx = e;
        }
        if (mx == -std::numeric_limits<double>::infinity()) continue;  // all-zero row
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            if (row[j] == 0.0) continue;
            s += std::exp(logv[j] + std::log(row[j]) - mx);
        }
        const double log_ratio = mx + std::log(s) - v_eval_log(v, k.source_nodes[i]);
        if (log_ratio > best_log) best_log = log_ratio;
    }
    return std::exp(best_log);
}

}  // namespace

double kernel_vnorm(const KernelGrid& k, const WeightSpec& v) {
    const std::size_t rows = k.rows(), cols = k.cols();
    std::vector<double> vt(cols);
    for (std::size_t j = 0; j < cols; ++j) {
        vt[j] = v_eval(v, k.target_nodes[j]);
        if (std::isinf(vt[j])) return kernel_vnorm_logspace(k, v);
    }
    double best_log = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = &k.density[i * cols];
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += row[j] * vt[j];
        if (s == 0.0) continue;
        // divide in log space: V at the source node may itself be huge
        const double log_ratio = std::log(s) - v_eval_log(v, k.source_nodes[i]);
        if (log_ratio > best_log) best_log = log_ratio;
    }
    return std::exp(best_log);
}

}  // namespace vfilter
