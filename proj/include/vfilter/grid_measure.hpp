#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "vfilter/weight.hpp"

namespace vfilter {

// Signed finite measure supported on a finite set of nodes inside the window
// [lo, hi].  Weights are node masses: for a density represented on a uniform
// grid each weight is density(node) * cell width, so plain sums realize
// integrals.  Nodes must be strictly increasing; weights must be finite.
struct GridMeasure {
    std::vector<double> nodes;
    std::vector<double> weights;
    double lo = 0.0;
    double hi = 0.0;

    std::size_t size() const { return nodes.size(); }
};

// Midpoints of n equal cells over [lo, hi].
std::vector<double> uniform_nodes(double lo, double hi, std::size_t n);

double cell_width(const GridMeasure& m);

// Validates the structural invariants (ordering, finiteness, window).
// Throws domain_error on violation.  Intended for construction sites and
// tests, not inner loops.
void validate(const GridMeasure& m);

// weights >= 0 and total mass within tol of 1.
bool is_probability(const GridMeasure& m, double tol = 1e-12);

// N(mean, var) truncated to the window of `nodes` and renormalized to mass 1.
GridMeasure gaussian_on_grid(const std::vector<double>& nodes, double lo, double hi,
                             double mean, double var);

// Unit point mass at the node closest to x.
GridMeasure delta_on_grid(const std::vector<double>& nodes, double lo, double hi, double x);

// sum of phi(node) * weight.
double integrate(const GridMeasure& m, const std::function<double(double)>& phi);

// Weighted total variation: sum of V(node) * |weight|.  +inf is a legal
// result (the weight may overflow on wide windows; that is how divergence
// of a weighted moment is reported).
double vnorm(const GridMeasure& m, const WeightSpec& v);

// Fraction of the V-weighted mass sitting in the outermost 5% of nodes
// (both ends together).  Runs whose measures leak past this are rejected
// upstream; the threshold lives with the experiments.
double tail_fraction(const GridMeasure& m, const WeightSpec& v);

// Mean and central variance, normalized by total mass; convenience for
// oracle comparisons.
double grid_mean(const GridMeasure& m);
double grid_var(const GridMeasure& m);

// Scales weights to total mass 1.  Returns the normalized measure and the
// pre-normalization mass.  Throws zero_mass_error if the mass is <= 0 or
// not finite.
std::pair<GridMeasure, double> normalize(const GridMeasure& m);

GridMeasure scale(const GridMeasure& m, double a);
GridMeasure subtract(const GridMeasure& a, const GridMeasure& b);

}  // namespace vfilter
