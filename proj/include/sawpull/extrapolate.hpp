#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "sawpull/errors.hpp"

namespace sawpull {

struct LimitValue {
    double value = 0.0;
    double half_width = 0.0;
};

namespace extrap_detail {

// Least-squares fit of v = limit + b / n; returns the limit.
inline double fit_limit(const std::vector<std::pair<int, double>>& pts) {
    const double m = static_cast<double>(pts.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [n, v] : pts) {
        const double x = 1.0 / n;
        sx += x;
        sy += v;
        sxx += x * x;
        sxy += x * v;
    }
    const double det = m * sxx - sx * sx;
    const double b = (m * sxy - sx * sy) / det;
    return (sy - b * sx) / m;
}

}  // namespace extrap_detail

// 1/n extrapolation of a finite-size sequence. values[i] is the member at
// n = i + 1; non-finite entries are skipped. The fit uses the top half of the
// usable points (at least 4). The half-width is the worst distance between
// the fitted limit and the window data, plus the limit shift when the window
// drops its two smallest n: it must cover unmodeled corrections, not merely
// the in-window residual of the 1/n form.
inline LimitValue extrapolate(const std::vector<double>& values) {
    std::vector<std::pair<int, double>> usable;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (std::isfinite(values[i])) usable.emplace_back(static_cast<int>(i) + 1, values[i]);
    const int k = static_cast<int>(usable.size());
    if (k < 6)
        throw ExtrapolationError("extrapolation needs at least 6 usable values, got " +
                                 std::to_string(k));
    const int w = std::max((k + 1) / 2, 4);
    const std::vector<std::pair<int, double>> win(usable.end() - w, usable.end());
    const double limit = extrap_detail::fit_limit(win);
    double dist = 0.0;
    for (const auto& [n, v] : win) dist = std::max(dist, std::abs(limit - v));
    const std::vector<std::pair<int, double>> shrunk(win.begin() + 2, win.end());
    const double limit_shrunk = extrap_detail::fit_limit(shrunk);
    return {limit, dist + std::abs(limit - limit_shrunk)};
}

}  // namespace sawpull
