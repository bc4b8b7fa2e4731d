#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sawpull/counts.hpp"
#include "sawpull/curves.hpp"
#include "sawpull/errors.hpp"
#include "sawpull/extrapolate.hpp"
#include "sawpull/partition.hpp"

namespace sawpull {

enum class PhaseLabel { free_phase, adsorbed, ballistic, boundary_indeterminate };

inline std::string to_string(PhaseLabel p) {
    switch (p) {
        case PhaseLabel::free_phase: return "free";
        case PhaseLabel::adsorbed: return "adsorbed";
        case PhaseLabel::ballistic: return "ballistic";
        default: return "boundary-indeterminate";
    }
}

// Phase call from the two extrapolated free energies: free when both sit at
// log mu_d within joint uncertainty, otherwise whichever dominates; ties
// inside the uncertainty band are flagged rather than forced.
inline PhaseLabel classify_phase(double a, double y, const ModelCurves& curves) {
    const LimitValue k = curves.kappa_at(a);
    const LimitValue l = curves.lambda_at(y);
    const LimitValue& mu = curves.log_mu_d;
    const bool k_free = std::abs(k.value - mu.value) <= k.half_width + mu.half_width;
    const bool l_free = std::abs(l.value - mu.value) <= l.half_width + mu.half_width;
    if (k_free && l_free) return PhaseLabel::free_phase;
    if (std::abs(k.value - l.value) <= k.half_width + l.half_width)
        return PhaseLabel::boundary_indeterminate;
    return k.value > l.value ? PhaseLabel::adsorbed : PhaseLabel::ballistic;
}

enum class CriticalAxis { a, y };

namespace phase_detail {

// Interior peak of one variance row with parabolic refinement; returns the
// refined log-weight or throws if the maximum sits on the grid edge.
inline double peak_location(const std::vector<double>& grid_log, const std::vector<double>& row,
                            int n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < row.size(); ++i)
        if (row[i] > row[best]) best = i;
    if (best == 0 || best + 1 == row.size())
        throw BracketError("variance peak for n=" + std::to_string(n) +
                           " sits on the grid edge at log-weight " +
                           std::to_string(grid_log[best]) + "; widen the grid");
    const double ym = row[best - 1], y0 = row[best], yp = row[best + 1];
    const double denom = ym - 2 * y0 + yp;
    double shift = 0.0;
    if (denom < 0) shift = 0.5 * (ym - yp) / denom;
    shift = std::min(1.0, std::max(-1.0, shift));
    const double h = grid_log[best + 1] - grid_log[best];
    return grid_log[best] + shift * h;
}

}  // namespace phase_detail

// Shared core: per-n variance rows over a log-weight grid -> extrapolated
// peak location. Returned in weight units; the half-width is the peak drift
// across the two largest n, mapped through exp.
inline LimitValue critical_from_variances(const std::vector<double>& grid_log,
                                          const std::vector<int>& ns,
                                          const std::vector<std::vector<double>>& rows) {
    if (ns.size() != rows.size() || ns.size() < 2)
        throw DomainError("need at least two variance rows with matching lengths");
    if (grid_log.size() < 3) throw DomainError("variance grid needs at least 3 points");
    for (std::size_t i = 0; i + 1 < ns.size(); ++i)
        if (!(ns[i] < ns[i + 1])) throw DomainError("variance ladder must be increasing in n");
    if (ns.front() < 1) throw DomainError("variance ladder must start at n >= 1");
    std::vector<double> peaks(static_cast<std::size_t>(ns.back()),
                              std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (rows[i].size() != grid_log.size())
            throw DomainError("variance row length does not match the grid");
        peaks[static_cast<std::size_t>(ns[i]) - 1] =
            phase_detail::peak_location(grid_log, rows[i], ns[i]);
    }
    double u_limit;
    try {
        u_limit = extrapolate(peaks).value;
    } catch (const ExtrapolationError&) {
        // short ladders fall back to the largest-n peak
        u_limit = peaks[static_cast<std::size_t>(ns.back()) - 1];
    }
    const double last = peaks[static_cast<std::size_t>(ns.back()) - 1];
    const double prev = peaks[static_cast<std::size_t>(ns[ns.size() - 2]) - 1];
    const double hw_log = std::abs(last - prev);
    const double value = std::exp(u_limit);
    return {value, value * hw_log};
}

// Critical-point estimate from the finite-n variance peaks (specific-heat
// analogue): visit fluctuations along a at y=1, or height fluctuations along
// y at a=1.
inline LimitValue estimate_critical(CriticalAxis axis, const CountTable& positive,
                                    const std::vector<double>& grid_log, int n_min = 4) {
    if (positive.walk_class() != WalkClass::positive)
        throw ClassMismatchError("critical estimation expects the positive table");
    if (positive.n_max() < n_min + 1)
        throw DomainError("table too short for a variance ladder");
    std::vector<int> ns;
    std::vector<std::vector<double>> rows;
    for (int n = n_min; n <= positive.n_max(); ++n) {
        std::vector<double> row;
        row.reserve(grid_log.size());
        for (double u : grid_log) {
            const WeightPoint w =
                axis == CriticalAxis::a ? WeightPoint{std::exp(u), 1.0}
                                        : WeightPoint{1.0, std::exp(u)};
            const Observable obs =
                axis == CriticalAxis::a ? Observable::visits : Observable::height;
            row.push_back(moment(positive, w, n, obs, 2).variance);
        }
        ns.push_back(n);
        rows.push_back(std::move(row));
    }
    return critical_from_variances(grid_log, ns, rows);
}

// Boundary point y_c(a): bisection on log y solving lambda(y) = kappa(a).
// The initial bracket comes from the free-energy window bounds, widened by
// the extrapolation half-widths, and is doubled a few times if the root
// escapes it.
inline LimitValue boundary_point(double a, const ModelCurves& curves, double tol_log = 1e-4) {
    if (!(a > 0) || !std::isfinite(a)) throw DomainError("boundary_point needs finite a > 0");
    if (!(tol_log > 0) || tol_log > 0.1) throw DomainError("bisection tolerance out of range");
    const LimitValue k = curves.kappa_at(a);
    const double mud = curves.log_mu_d.value;
    const double mud1 = curves.log_mu_dm1.value;
    const double slop =
        k.half_width + curves.log_mu_d.half_width + curves.log_mu_dm1.half_width + 0.1;
    const double u = std::log(a);
    double lo = std::max(0.0, u + mud1 - mud - slop);
    double hi = u + mud + slop;

    const double target = k.value;
    auto g = [&](double w) { return curves.lambda_at(std::exp(w)).value - target; };
    double glo = g(lo), ghi = g(hi);
    for (int tries = 0; (glo > 0 || ghi < 0) && tries < 4; ++tries) {
        const double span = std::max(hi - lo, 0.5);
        if (glo > 0) {
            lo = std::max(0.0, lo - span);
            glo = g(lo);
        }
        if (ghi < 0) {
            hi += span;
            ghi = g(hi);
        }
    }
    if (glo > 0)
        throw BracketError("lambda(y) exceeds kappa(a) across the bracket at a=" +
                           std::to_string(a) + "; the point is not in the adsorbed regime");
    if (ghi < 0)
        throw BracketError("no root of lambda(y) = kappa(a) below the widened bracket at a=" +
                           std::to_string(a));

    while (hi - lo > tol_log) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) < 0)
            lo = mid;
        else
            hi = mid;
    }
    const double w_star = 0.5 * (lo + hi);

    const double delta = 0.05;
    const double slope = (curves.lambda_at(std::exp(w_star + delta)).value -
                          curves.lambda_at(std::exp(w_star - delta)).value) /
                         (2 * delta);
    const double hw_l = curves.lambda_at(std::exp(w_star)).half_width;
    const double hw_log = (k.half_width + hw_l) / std::max(slope, 0.1) + tol_log;
    const double y = std::exp(w_star);
    return {y, y * hw_log};
}

struct BoundarySample {
    double a = 0.0;
    double y_c = 0.0;
    double half_width = 0.0;
};

struct PhaseDiagram {
    LimitValue a_c_estimate;
    LimitValue y_c0_estimate;
    std::vector<BoundarySample> boundary;
    bool monotonicity_pass = false;
    bool bounds_pass = false;
    bool asymptote_pass = false;
};

// Assemble the phase diagram: critical estimates from variance peaks, the
// boundary curve from bisection, and the lemma-suite flags.
inline PhaseDiagram phase_diagram(const CountTable& positive, const ModelCurves& curves,
                                  const std::vector<double>& a_values) {
    if (a_values.size() < 2) throw DomainError("phase diagram needs at least two a values");
    for (std::size_t i = 0; i + 1 < a_values.size(); ++i)
        if (!(a_values[i] < a_values[i + 1]))
            throw DomainError("a values must be strictly increasing");

    PhaseDiagram d;
    d.a_c_estimate = estimate_critical(CriticalAxis::a, positive, log_grid(-0.5, 0.1, 2.0));
    d.y_c0_estimate = estimate_critical(CriticalAxis::y, positive, log_grid(-0.5, 0.1, 2.0));

    const double mud = curves.log_mu_d.value;
    const double mud1 = curves.log_mu_dm1.value;
    const double hw_mu =
        curves.log_mu_d.half_width + curves.log_mu_dm1.half_width;

    d.monotonicity_pass = true;
    d.bounds_pass = true;
    for (double a : a_values) {
        const LimitValue p = boundary_point(a, curves);
        if (!d.boundary.empty() && !(p.value > d.boundary.back().y_c))
            d.monotonicity_pass = false;
        const double hw_log = p.half_width / p.value;
        const double lo = std::max(1.0, a * std::exp(mud1 - mud - hw_mu - hw_log));
        const double hi = a * std::exp(mud + hw_mu + hw_log);
        if (!(p.value >= lo && p.value <= hi)) d.bounds_pass = false;
        const LimitValue k = curves.kappa_at(a);
        if (!(std::log(p.value) <= k.value + k.half_width + hw_log)) d.bounds_pass = false;
        d.boundary.push_back({a, p.value, p.half_width});
    }

    const BoundarySample& last = d.boundary.back();
    const double den = std::log(last.a) + mud1;
    const double ratio = std::log(last.y_c) / den;
    d.asymptote_pass = den > 0 && ratio >= 0.8 && ratio <= 1.2;
    return d;
}

struct ForceSample {
    double T = 0.0;
    double a = 0.0;
    double f_c = 0.0;
    double half_width = 0.0;
};

struct ForceCurve {
    double epsilon = -1.0;
    std::vector<ForceSample> samples;
    std::vector<std::pair<double, std::string>> skipped;  // (T, reason)
    double slope_at_low_T = 0.0;
    double slope_half_width = 0.0;
};

// Critical force curve f_c(T) = T log y_c(exp(-epsilon/T)) with k = 1.
// Temperatures whose induced a falls outside the adsorbed regime are skipped
// with a reason instead of aborting the sweep.
inline ForceCurve force_curve(double epsilon, const std::vector<double>& t_grid,
                              const ModelCurves& curves) {
    if (!(epsilon < 0) || !std::isfinite(epsilon))
        throw DomainError("force curve needs a finite epsilon < 0");
    if (t_grid.size() < 2) throw DomainError("force curve needs at least two temperatures");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 0)) throw DomainError("temperatures must be positive");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
            throw DomainError("temperatures must be strictly increasing");
    }
    ForceCurve fc;
    fc.epsilon = epsilon;
    for (double T : t_grid) {
        const double a = std::exp(-epsilon / T);
        try {
            const LimitValue y = boundary_point(a, curves);
            const double hw_log = y.half_width / y.value;
            fc.samples.push_back({T, a, T * std::log(y.value), T * hw_log});
        } catch (const BracketError& e) {
            fc.skipped.emplace_back(T, e.what());
        }
    }
    if (fc.samples.size() >= 2) {
        const ForceSample& s0 = fc.samples[0];
        const ForceSample& s1 = fc.samples[1];
        fc.slope_at_low_T = (s1.f_c - s0.f_c) / (s1.T - s0.T);
        fc.slope_half_width = (s0.half_width + s1.half_width) / (s1.T - s0.T);
    }
    return fc;
}

}  // namespace sawpull
