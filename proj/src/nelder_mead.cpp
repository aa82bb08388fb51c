#include "loopgrade/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace loopgrade {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& fn,
                             const std::vector<double>& x0, const NelderMeadOptions& opts) {
    const std::size_t d = x0.size();
    NelderMeadResult result;
    result.x = x0;

    std::vector<std::vector<double>> verts(d + 1, x0);
    std::vector<double> fv(d + 1);
    for (std::size_t i = 0; i < d; ++i) verts[i + 1][i] += opts.init_step;
    for (std::size_t i = 0; i <= d; ++i) fv[i] = fn(verts[i]);
    result.evals = static_cast<int>(d + 1);

    std::vector<std::size_t> order(d + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    };
    auto spread = [&] {
        const auto& best = verts[order[0]];
        double s = 0.0;
        for (std::size_t i = 1; i <= d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                s = std::max(s, std::abs(verts[order[i]][j] - best[j]) /
                                    std::max(1.0, std::abs(best[j])));
        return s;
    };

    std::vector<double> centroid(d), xr(d), xe(d), xc(d);
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        sort_simplex();
        if (spread() < opts.rel_tol) {
            result.converged = true;
            break;
        }
        const std::size_t best = order[0], worst = order[d], second = order[d - 1];

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < d; ++j) centroid[j] += verts[i][j];
        }
        for (double& c : centroid) c /= static_cast<double>(d);

        for (std::size_t j = 0; j < d; ++j) xr[j] = centroid[j] + (centroid[j] - verts[worst][j]);
        const double fr = fn(xr);
        ++result.evals;

        if (fr < fv[best]) {
            for (std::size_t j = 0; j < d; ++j)
                xe[j] = centroid[j] + 2.0 * (centroid[j] - verts[worst][j]);
            const double fe = fn(xe);
            ++result.evals;
            if (fe < fr) {
                verts[worst] = xe;
                fv[worst] = fe;
            } else {
                verts[worst] = xr;
                fv[worst] = fr;
            }
        } else if (fr < fv[second]) {
            verts[worst] = xr;
            fv[worst] = fr;
        } else {
            const bool outside = fr < fv[worst];
            const auto& base = outside ? xr : verts[worst];
            for (std::size_t j = 0; j < d; ++j) xc[j] = centroid[j] + 0.5 * (base[j] - centroid[j]);
            const double fc = fn(xc);
            ++result.evals;
            if (fc < (outside ? fr : fv[worst])) {
                verts[worst] = xc;
                fv[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= d; ++i) { // shrink toward the best vertex
                    if (i == best) continue;
                    for (std::size_t j = 0; j < d; ++j)
                        verts[i][j] = verts[best][j] + 0.5 * (verts[i][j] - verts[best][j]);
                    fv[i] = fn(verts[i]);
                    ++result.evals;
                }
            }
        }
    }

    sort_simplex();
    result.x = verts[order[0]];
    result.fx = fv[order[0]];
    return result;
}

} // namespace loopgrade
