#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sawpull/counts.hpp"
#include "sawpull/errors.hpp"
#include "sawpull/partition.hpp"

namespace sawpull {

struct LegendreTable {
    std::vector<double> densities;          // alpha (or beta) grid in [0, 1]
    std::vector<double> values;             // transform value per density
    std::vector<char> boundary_flag;        // min attained only at a weight-grid edge
    std::vector<double> inverse_residuals;  // per weight-grid point
};

namespace legendre_detail {

inline void check_weight_grid(const std::vector<double>& log_weights,
                              const std::vector<double>& curve) {
    if (log_weights.size() != curve.size())
        throw DomainError("weight grid and curve values differ in length");
    if (log_weights.size() < 3) throw DomainError("legendre transform needs at least 3 points");
    for (std::size_t i = 0; i + 1 < log_weights.size(); ++i)
        if (!(log_weights[i] < log_weights[i + 1]))
            throw DomainError("weight grid must be strictly increasing");
    for (double v : curve)
        if (!std::isfinite(v)) throw DomainError("curve values must be finite");
}

}  // namespace legendre_detail

// Density grid used by the transform: uniform 0.01 spacing on [0,1] augmented
// with the curve's adjacent secant slopes. A convex sequence is supported at
// every grid point by one of its secants, so including them makes the inverse
// transform reconstruct the curve exactly there.
inline std::vector<double> default_density_grid(const std::vector<double>& log_weights,
                                                const std::vector<double>& curve) {
    legendre_detail::check_weight_grid(log_weights, curve);
    std::vector<double> g;
    for (int i = 0; i <= 100; ++i) g.push_back(i / 100.0);
    for (std::size_t i = 0; i + 1 < log_weights.size(); ++i) {
        const double s =
            (curve[i + 1] - curve[i]) / (log_weights[i + 1] - log_weights[i]);
        g.push_back(std::min(1.0, std::max(0.0, s)));
    }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end(),
                        [](double x, double z) { return std::abs(x - z) < 1e-12; }),
            g.end());
    return g;
}

// Discrete Legendre transform values[alpha] = min over the weight grid of
// (curve - alpha * log_weight). Minima attained only at a grid edge are
// flagged rather than silently trusted.
inline LegendreTable legendre_transform(const std::vector<double>& log_weights,
                                        const std::vector<double>& curve,
                                        const std::vector<double>& density_grid) {
    legendre_detail::check_weight_grid(log_weights, curve);
    if (density_grid.empty()) throw DomainError("density grid must be nonempty");
    for (double a : density_grid)
        if (!(a >= 0.0) || !(a <= 1.0)) throw DomainError("densities must lie in [0, 1]");
    const std::size_t m = log_weights.size();
    LegendreTable t;
    t.densities = density_grid;
    t.values.reserve(density_grid.size());
    t.boundary_flag.reserve(density_grid.size());
    for (double alpha : density_grid) {
        double best = curve[0] - alpha * log_weights[0];
        for (std::size_t g = 1; g < m; ++g)
            best = std::min(best, curve[g] - alpha * log_weights[g]);
        bool interior = false;
        const double tol = 1e-12 * std::max(1.0, std::abs(best));
        for (std::size_t g = 1; g + 1 < m; ++g)
            if (curve[g] - alpha * log_weights[g] <= best + tol) {
                interior = true;
                break;
            }
        t.values.push_back(best);
        t.boundary_flag.push_back(interior ? 0 : 1);
    }
    t.inverse_residuals.reserve(m);
    for (std::size_t g = 0; g < m; ++g) {
        double rec = kMinusInf;
        for (std::size_t k = 0; k < density_grid.size(); ++k)
            rec = std::max(rec, t.values[k] + density_grid[k] * log_weights[g]);
        t.inverse_residuals.push_back(std::abs(curve[g] - rec));
    }
    return t;
}

// Finite-n instantiation straight from a free-energy curve. The weight
// coordinate is log a, except for tail curves where it is log y.
inline LegendreTable legendre_transform(const FreeEnergyCurve& curve, int n,
                                        const std::vector<double>& density_grid) {
    if (n < 1 || n > curve.n_max) throw DomainError("length outside curve range");
    std::vector<double> u, v;
    u.reserve(curve.grid.size());
    v.reserve(curve.grid.size());
    for (std::size_t g = 0; g < curve.grid.size(); ++g) {
        const WeightPoint& w = curve.grid[g];
        u.push_back(curve.kind == PartitionKind::T ? std::log(w.y) : std::log(w.a));
        v.push_back(curve.value(g, n));
    }
    return legendre_transform(u, v, density_grid);
}

inline LegendreTable legendre_transform(const FreeEnergyCurve& curve, int n) {
    if (n < 1 || n > curve.n_max) throw DomainError("length outside curve range");
    std::vector<double> u, v;
    for (std::size_t g = 0; g < curve.grid.size(); ++g) {
        const WeightPoint& w = curve.grid[g];
        u.push_back(curve.kind == PartitionKind::T ? std::log(w.y) : std::log(w.a));
        v.push_back(curve.value(g, n));
    }
    return legendre_transform(u, v, default_density_grid(u, v));
}

struct DensityReport {
    int n = 0;
    double a = 1.0;
    double mean_density = 0.0;  // <v>_n / n in the loop ensemble
    double alpha_star = 0.0;    // density realising the finite-n inverse sup
    double gap = 0.0;
    double e_minus = 0.0;  // one-sided log-derivative densities of the loop curve
    double e_plus = 0.0;
    bool one_sided_ok = false;
};

// Report-only consistency check: the finite-n visit density against the
// density realising the inverse-Legendre sup of the extrapolated loop curve.
// The sup-achiever identifies the limit density, so the gap is expected to
// shrink as n grows.
inline DensityReport density_consistency(const CountTable& table, const WeightPoint& w, int n) {
    thermo_detail::check_weights(w);
    thermo_detail::check_length(table, n);
    if (n < 1) throw DomainError("density consistency needs n >= 1");
    DensityReport r;
    r.n = n;
    r.a = w.a;
    r.mean_density = moment(table, w, n, Observable::visits, 1, PartitionKind::L).mean / n;

    const std::vector<double> us = log_grid(-1.0, 0.1, 3.0);
    std::vector<double> curve;
    curve.reserve(us.size());
    std::vector<double> per_n(static_cast<std::size_t>(table.n_max()));
    for (double u : us) {
        for (int m = 1; m <= table.n_max(); ++m)
            per_n[static_cast<std::size_t>(m) - 1] =
                evaluate_partition(table, {std::exp(u), 1.0}, m, PartitionKind::L) / m;
        curve.push_back(extrapolate(per_n).value);
    }
    const std::vector<double> alphas = default_density_grid(us, curve);
    const LegendreTable lt = legendre_transform(us, curve, alphas);

    const double ua = std::log(w.a);
    double best = kMinusInf;
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        const double s = lt.values[k] + alphas[k] * ua;
        if (s > best) {
            best = s;
            r.alpha_star = alphas[k];
        }
    }
    r.gap = std::abs(r.mean_density - r.alpha_star);

    const double delta = 0.05;
    const double f0 = evaluate_partition(table, {w.a, 1.0}, n, PartitionKind::L) / n;
    const double fm =
        evaluate_partition(table, {std::exp(ua - delta), 1.0}, n, PartitionKind::L) / n;
    const double fp =
        evaluate_partition(table, {std::exp(ua + delta), 1.0}, n, PartitionKind::L) / n;
    r.e_minus = (f0 - fm) / delta;
    r.e_plus = (fp - f0) / delta;
    r.one_sided_ok = r.e_minus <= r.e_plus + 1e-10;
    return r;
}

}  // namespace sawpull
