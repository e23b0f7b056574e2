#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vfilter/kernel.hpp"

namespace vfilter {

// Serializable scalar function, enough for the shipped model family:
//   Scale:    f(x) = value * x
//   Constant: f(x) = value
struct FuncSpec {
    enum class Kind { Scale, Constant };
    Kind kind = Kind::Scale;
    double value = 1.0;

    double operator()(double x) const { return kind == Kind::Scale ? value * x : value; }

    static FuncSpec scale(double v) { return {Kind::Scale, v}; }
    static FuncSpec constant(double v) { return {Kind::Constant, v}; }
    static FuncSpec identity() { return scale(1.0); }
};

// One-dimensional state space model
//   X_{k+1} = X_k + b(X_k) + sigma * V_k
//   Y_k     = h(X_k) + beta_obs * W_k
// with iid standard normal noises.  The Linear variant pins b(x) = (a-1)x,
// sigma = 1, h(x) = x, so the state recursion is X_{k+1} = a X_k + V_k and
// closed-form Gaussian references apply.
struct ModelSpec {
    enum class Variant { Linear, Nonlinear };

    Variant variant = Variant::Linear;
    double alpha = 0.5;  // Linear only
    FuncSpec b = FuncSpec::scale(-0.5);
    FuncSpec h = FuncSpec::identity();
    double sigma = 1.0;
    double beta_obs = 1.0;

    double drift_mean(double x) const { return x + b(x); }

    static ModelSpec linear(double alpha, double beta_obs);
    static ModelSpec nonlinear(FuncSpec b, double sigma, FuncSpec h, double beta_obs);
};

// Which product of densities a step kernel carries:
//   Filter:     K(x, x') = f(x, x') g(x', y_next)
//   Prediction: K(x, x') = g(x, y_now) f(x, x')
enum class Scenario { Filter, Prediction };

struct ObservationPath {
    enum class Origin { Simulated, External };
    std::vector<double> y;
    std::uint64_t seed = 0;
    Origin origin = Origin::Simulated;
};

// Transition density f(x, x') = N(x'; x + b(x), sigma^2).
double transition_density(const ModelSpec& m, double x, double x_next);

// Observation density g(x, y) = N(y; h(x), beta_obs^2), normalized in y.
double obs_density(const ModelSpec& m, double x, double y);
double obs_density_log(const ModelSpec& m, double x, double y);

// Markov transition kernel on the window (no observation factor).
KernelGrid transition_kernel(const ModelSpec& m, const std::vector<double>& nodes,
                             double lo, double hi);

// Step kernel for the scenario; reads y_next (Filter) or y_now (Prediction).
KernelGrid q_kernel(const ModelSpec& m, Scenario sc, double y_now, double y_next,
                    const std::vector<double>& nodes, double lo, double hi);

struct SimulatedPath {
    std::vector<double> x;
    ObservationPath obs;
};

// n draws of (X_k, Y_k), k = 0..n-1.  X_0 starts at stationarity: exact for
// the linear variant, via a fixed long burn-in from 0 otherwise.
// Deterministic given the seed.
SimulatedPath simulate(const ModelSpec& m, std::size_t n, std::uint64_t seed);

// Stationary standard deviations, used to size observation intervals.
// Linear in closed form; nonlinear via a deterministic long simulation.
double stationary_sd_x(const ModelSpec& m);
double stationary_sd_y(const ModelSpec& m);

std::string model_to_json(const ModelSpec& m);
ModelSpec model_from_json(const std::string& text);

// CSV with a `# model=... seed=... origin=...` header comment, columns k,y.
std::string path_to_csv(const ModelSpec& m, const ObservationPath& p);
ObservationPath path_from_csv(const std::string& text);
ObservationPath path_from_csv_file(const std::string& filename);
void write_file(const std::string& filename, const std::string& content);
std::string read_file(const std::string& filename);

}  // namespace vfilter
