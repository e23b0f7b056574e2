#pragma once

#include <cmath>

#include "vfilter/errors.hpp"

namespace vfilter {

// Weight function V: R -> [1, inf) used for weighted norms and moments.
// Two families:
//   ExpAbs:    V(x) = exp(c|x|)
//   ExpSquare: V(x) = exp(c x^2 / 2)
// Both satisfy V(0) = 1 and V >= 1; c must be > 0.
struct WeightSpec {
    enum class Family { ExpAbs, ExpSquare };

    Family family = Family::ExpAbs;
    double c = 1.0;

    static WeightSpec exp_abs(double c) { return make(Family::ExpAbs, c); }
    static WeightSpec exp_square(double c) { return make(Family::ExpSquare, c); }

  private:
    static WeightSpec make(Family f, double c) {
        if (!(c > 0.0) || !std::isfinite(c))
            throw domain_error("weight parameter c must be positive and finite");
        return WeightSpec{f, c};
    }
};

// log V(x); always finite for finite x.
inline double v_eval_log(const WeightSpec& v, double x) {
    return v.family == WeightSpec::Family::ExpAbs ? v.c * std::fabs(x)
                                                  : 0.5 * v.c * x * x;
}

// V(x); may overflow to +inf, which callers must treat as a legal value.
inline double v_eval(const WeightSpec& v, double x) { return std::exp(v_eval_log(v, x)); }

}  // namespace vfilter
