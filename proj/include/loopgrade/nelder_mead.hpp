#pragma once

#include <functional>
#include <vector>

namespace loopgrade {

struct NelderMeadOptions {
    int max_iter = 400;      // outer iterations (reflect/expand/... cycles)
    double rel_tol = 1e-3;   // relative simplex spread that counts as converged
    double init_step = 0.25; // initial simplex edge per coordinate
};

struct NelderMeadResult {
    std::vector<double> x;
    double fx = 0.0;
    int evals = 0;
    bool converged = false;
};

/// Downhill simplex with the standard coefficients (reflect 1, expand 2,
/// contract 0.5, shrink 0.5). The objective may return +infinity to mark
/// infeasible points.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& fn,
                             const std::vector<double>& x0, const NelderMeadOptions& opts = {});

} // namespace loopgrade
