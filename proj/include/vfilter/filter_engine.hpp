#pragma once

#include <string>
#include <vector>

#include "vfilter/models.hpp"

namespace vfilter {

// Normalized filtering (or prediction) trace along one observation path.
// etas[k] is the step-k distribution; lambdas[k] is the mass removed when
// stepping from etas[k] to etas[k+1] (one fewer lambda than etas).
struct FilterRun {
    Scenario scenario = Scenario::Filter;
    std::vector<GridMeasure> etas;
    std::vector<double> lambdas;
    std::vector<double> v_moments;
    std::vector<double> tail_diags;
};

// Filter scenario: reweight lambda0 by the first observation and normalize.
// Prediction scenario: pass lambda0 through unchanged (it must already be a
// probability measure).
GridMeasure initial_measure(const ModelSpec& m, Scenario sc, const GridMeasure& lambda0,
                            double y0);

struct StepResult {
    GridMeasure eta;
    double lambda = 0.0;
};

// One update: push eta through the scenario's step kernel and normalize.
// The scenario decides which observation the kernel reads: stepping from
// index k-1 to k, y_now = y[k-1] and y_next = y[k].
StepResult step(const GridMeasure& eta, const ModelSpec& m, Scenario sc, double y_now,
                double y_next);

// Same update with a prebuilt kernel, so several traces can share it.
StepResult step_with_kernel(const GridMeasure& eta, const KernelGrid& k);

// Full trace over the path: etas index 0..n-1 where n = path length.
FilterRun run(const ModelSpec& m, Scenario sc, const GridMeasure& lambda0,
              const ObservationPath& path, const WeightSpec& v);

// Backward-forward decomposition of the step-n distribution into a product
// of Markov transitions started from the tilted initial law.
struct SDecomposition {
    std::vector<std::vector<double>> h;          // h[k] on the grid, k = 0..n
    std::vector<double> lambdas;                 // from the underlying run
    std::vector<std::vector<double>> s_rowsums;  // per k = 1..n, per source node
    double nu_h0 = 0.0;                          // integral of h[0] against the initial law
    GridMeasure reconstruction;                  // tilted init pushed through S_1..S_n
    GridMeasure direct;                          // etas[n] from the plain recursion
};

SDecomposition s_decompose(const ModelSpec& m, Scenario sc, const ObservationPath& path,
                           std::size_t n, const GridMeasure& lambda0);

// CSV columns k,lambda_k,v_moment_k,tail_diag_k (lambda of the final row is
// nan: no step leaves it).
std::string run_to_csv(const FilterRun& r);

// Optional raw dump of every density in the trace: plain doubles, nodes
// first, then one weight row per step.
void dump_densities(const FilterRun& r, const std::string& filename);

}  // namespace vfilter
