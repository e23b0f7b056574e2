#include <cmath>
#include <limits>

#include <doctest.h>

#include "vfilter/errors.hpp"
#include "vfilter/exact_gaussian.hpp"
#include "vfilter/grid_measure.hpp"

using namespace vfilter;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("stationary law of the AR(1) chain") {
    GaussianState s = stationary_pi(0.5);
    CHECK(s.mean == 0.0);
    CHECK(s.var == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(stationary_pi(1.0), domain_error);
}

TEST_CASE("conjugate update, rational case") {
    // prior N(0, 4/3), observation 1 at unit noise: posterior N(4/7, 4/7)
    GaussianState post = gaussian_posterior({0.0, 4.0 / 3.0}, 1.0, 1.0);
    CHECK(post.mean == doctest::Approx(4.0 / 7.0).epsilon(1e-15));
    CHECK(post.var == doctest::Approx(4.0 / 7.0).epsilon(1e-15));
}

TEST_CASE("kalman step against hand formulas") {
    double alpha = 0.8, beta = 1.3, y = 0.6;
    GaussianState prior{0.5, 0.9};
    KalmanResult r = kalman_step(prior, y, alpha, beta);
    double pm = alpha * prior.mean;
    double pv = alpha * alpha * prior.var + 1.0;
    double b2 = beta * beta;
    CHECK(r.state.mean == doctest::Approx((pv * y + b2 * pm) / (pv + b2)).epsilon(1e-14));
    CHECK(r.state.var == doctest::Approx(pv * b2 / (pv + b2)).epsilon(1e-14));
    double s = pv + b2, d = y - pm;
    double ll = -0.5 * (d * d / s + std::log(s) + std::log(2.0 * M_PI));
    CHECK(r.loglik == doctest::Approx(ll).epsilon(1e-13));
}

TEST_CASE("kalman variance reaches the algebraic fixed point") {
    double alpha = 0.5;
    GaussianState s = stationary_pi(alpha);
    for (int k = 0; k < 60; ++k) s = kalman_step(s, 0.0, alpha, 1.0).state;
    // prediction variance solves p^2 = alpha^2 p + 1
    double a2 = alpha * alpha;
    double p_star = 0.5 * (a2 + std::sqrt(a2 * a2 + 4.0));
    double v_star = p_star / (p_star + 1.0);
    CHECK(s.var == doctest::Approx(v_star).epsilon(1e-12));
}

TEST_CASE("quadratic-weight moment closed form and its infinity edge") {
    // E exp(x^2/4) over N(0,1) = sqrt(2)
    WeightSpec half = WeightSpec::exp_square(0.5);
    CHECK(gaussian_v_moment({0.0, 1.0}, half) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    CHECK(gaussian_v_moment({0.0, 1.0}, WeightSpec::exp_square(1.0)) == kInf);
    CHECK(gaussian_v_moment({2.0, 0.25}, WeightSpec::exp_square(4.0)) == kInf);
    CHECK(gaussian_v_moment({0.0, 0.25}, WeightSpec::exp_square(4.0 - 1e-9)) < kInf);
    CHECK(gaussian_v_moment({0.0, 0.999999}, WeightSpec::exp_square(1.0)) > 1e2);
}

TEST_CASE("moment degenerates to the weight value at zero variance") {
    CHECK(gaussian_v_moment({1.5, 0.0}, WeightSpec::exp_abs(2.0)) ==
          doctest::Approx(std::exp(3.0)).epsilon(1e-14));
    CHECK(gaussian_v_moment({-3.0, 0.0}, WeightSpec::exp_square(0.5)) ==
          doctest::Approx(std::exp(2.25)).epsilon(1e-14));
}

TEST_CASE("absolute-weight moment against quadrature") {
    GaussianState s{0.7, 2.3};
    WeightSpec v = WeightSpec::exp_abs(1.3);
    double analytic = gaussian_v_moment(s, v);

    double sd = std::sqrt(s.var);
    double lo = s.mean - 14.0 * sd, hi = s.mean + 14.0 * sd;
    std::size_t n = 400000;
    double h = (hi - lo) / static_cast<double>(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double x = lo + (static_cast<double>(i) + 0.5) * h;
        double z = (x - s.mean) / sd;
        acc += std::exp(1.3 * std::fabs(x) - 0.5 * z * z);
    }
    acc *= h / (sd * std::sqrt(2.0 * M_PI));
    CHECK(analytic == doctest::Approx(acc).epsilon(1e-9));
}

TEST_CASE("normal cdf endpoints and symmetry") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_cdf(1.0) + normal_cdf(-1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(normal_cdf(10.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(normal_cdf(-37.0) > 0.0);  // deep tail stays subnormal rather than zero
}

TEST_CASE("grid posterior matches the conjugate posterior") {
    // one Bayes update done two ways: closed form vs reweighted grid
    GaussianState prior{0.4, 1.1};
    double y = -0.9, beta = 0.7;
    GaussianState post = gaussian_posterior(prior, y, beta);

    std::vector<double> nodes = uniform_nodes(-12.0, 12.0, 6000);
    GridMeasure g = gaussian_on_grid(nodes, -12.0, 12.0, prior.mean, prior.var);
    for (std::size_t i = 0; i < g.size(); ++i) {
        double d = (y - nodes[i]) / beta;
        g.weights[i] *= std::exp(-0.5 * d * d);
    }
    g = normalize(g).first;
    CHECK(grid_mean(g) == doctest::Approx(post.mean).epsilon(1e-9));
    CHECK(grid_var(g) == doctest::Approx(post.var).epsilon(1e-7));
}
