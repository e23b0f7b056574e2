#pragma once

#include <stdexcept>
#include <string>

namespace vfilter {

// Thrown when a measure that should carry positive finite mass does not
// (normalizing an all-zero or overflowed weight vector, a vanished
// normalization constant mid-run, ...).
struct zero_mass_error : std::runtime_error {
    explicit zero_mass_error(const std::string& what) : std::runtime_error(what) {}
};

// Node layouts disagree where they must match exactly.
struct grid_mismatch_error : std::runtime_error {
    explicit grid_mismatch_error(const std::string& what) : std::runtime_error(what) {}
};

// Parameter outside the admissible region (|alpha| >= 1, radius <= 0, ...).
struct domain_error : std::runtime_error {
    explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// The quadratic-weight drift margin kappa = 1 + c/alpha^2 - 1/(2-c) is not
// positive; carries the admissible c-range in the message.
struct kappa_nonpositive_error : std::runtime_error {
    explicit kappa_nonpositive_error(const std::string& what) : std::runtime_error(what) {}
};

// Environment statistics too thin: the fraction of steps inside the good
// observation set must exceed 2/3 before any constants can be built.
struct gamma_too_small_error : std::runtime_error {
    explicit gamma_too_small_error(const std::string& what) : std::runtime_error(what) {}
};

// Too few usable points after censoring to fit a decay rate.
struct degenerate_fit_error : std::runtime_error {
    explicit degenerate_fit_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vfilter
