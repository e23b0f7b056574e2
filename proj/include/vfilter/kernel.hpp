#pragma once

#include <vector>

#include "vfilter/grid_measure.hpp"

namespace vfilter {

// Nonnegative integral kernel discretized as a dense transfer matrix:
// entry(i, j) = kernel density from source node i to target node j times the
// target cell width.  Applying it to a mass vector is then a plain
// vector-matrix product, and for a Markov kernel row sums sit in (0, 1 + eps]
// up to window truncation.
struct KernelGrid {
    std::vector<double> source_nodes;
    std::vector<double> target_nodes;
    double source_lo = 0.0, source_hi = 0.0;
    double target_lo = 0.0, target_hi = 0.0;
    std::vector<double> density;  // row-major, rows() x cols()

    std::size_t rows() const { return source_nodes.size(); }
    std::size_t cols() const { return target_nodes.size(); }
    double entry(std::size_t i, std::size_t j) const { return density[i * cols() + j]; }
    double& entry(std::size_t i, std::size_t j) { return density[i * cols() + j]; }
};

void validate(const KernelGrid& k);

double row_sum(const KernelGrid& k, std::size_t i);

// (m K)(j) = sum_i m_i K(i, j).  Throws grid_mismatch_error unless the
// measure's nodes coincide with the kernel's source nodes.
GridMeasure apply_kernel(const GridMeasure& m, const KernelGrid& k);

// (K phi)(i) = sum_j K(i, j) phi(j), phi given by node values.
std::vector<double> apply_kernel_to_function(const KernelGrid& k, const std::vector<double>& phi);

// Matrix product; a's target grid must coincide with b's source grid.
KernelGrid compose_kernels(const KernelGrid& a, const KernelGrid& b);

// Weighted operator norm over the window: max_i sum_j V(t_j) K(i,j) / V(s_i).
// Evaluated in log space so wide windows cannot overflow intermediates.
double kernel_vnorm(const KernelGrid& k, const WeightSpec& v);

}  // namespace vfilter
