#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sawpull/counts.hpp"
#include "sawpull/curves.hpp"
#include "sawpull/enumerate.hpp"
#include "sawpull/errors.hpp"
#include "sawpull/logsum.hpp"
#include "sawpull/partition.hpp"

namespace sawpull {

struct InequalityInstance {
    std::string where;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;  // rhs - lhs in the log domain
};

struct InequalityReport {
    std::string name;
    bool limit_level = false;
    std::vector<InequalityInstance> instances;
    bool pass = true;

    void add(std::string where, double lhs, double rhs) {
        const double slack = rhs - lhs;
        if (!(slack >= -1e-9)) pass = false;
        instances.push_back({std::move(where), lhs, rhs, slack});
    }
};

struct AnalysisTables {
    const CountTable* positive = nullptr;
    const CountTable* unfolded = nullptr;
    const CountTable* plane = nullptr;  // class plane, dimension d-1
    const CountTable* full = nullptr;   // optional; enables the limit-level checks
};

namespace ineq_detail {

inline std::string fmt(const char* format, double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, format, x);
    return buf;
}

inline std::string where_nay(int n, double a, double y) {
    return "n=" + std::to_string(n) + " a=" + fmt("%.6g", a) + " y=" + fmt("%.6g", y);
}

inline std::string where_na(int n, double a) {
    return "n=" + std::to_string(n) + " a=" + fmt("%.6g", a);
}

inline std::string where_ny(int n, double y) {
    return "n=" + std::to_string(n) + " y=" + fmt("%.6g", y);
}

inline void validate(const AnalysisTables& t) {
    if (!t.positive) throw DomainError("inequality report needs the positive table");
    if (!t.unfolded) throw DomainError("inequality report needs the positive-unfolded table");
    if (!t.plane) throw DomainError("inequality report needs the plane table");
    if (t.positive->walk_class() != WalkClass::positive)
        throw ClassMismatchError(std::string("positive slot holds class ") +
                                 to_string(t.positive->walk_class()));
    if (t.unfolded->walk_class() != WalkClass::positive_unfolded)
        throw ClassMismatchError(std::string("unfolded slot holds class ") +
                                 to_string(t.unfolded->walk_class()));
    if (t.plane->walk_class() != WalkClass::plane)
        throw ClassMismatchError(std::string("plane slot holds class ") +
                                 to_string(t.plane->walk_class()));
    if (t.unfolded->dimension() != t.positive->dimension())
        throw ClassMismatchError("unfolded table dimension differs from positive");
    if (t.plane->dimension() != t.positive->dimension() - 1)
        throw ClassMismatchError("plane table must live in dimension d-1");
    if (t.full) {
        if (t.full->walk_class() != WalkClass::full_lattice)
            throw ClassMismatchError(std::string("full slot holds class ") +
                                     to_string(t.full->walk_class()));
        if (t.full->dimension() != t.positive->dimension())
            throw ClassMismatchError("full-lattice table dimension differs from positive");
    }
}

// Strict x-spanning surface-walk counts used by the concatenation bound: the
// empty walk and the single +x step for lengths 0 and 1, the standard
// unfolded counts beyond (length >= 2 forces the endpoint strictly past every
// earlier vertex, so concatenation stays self-avoiding).
inline std::vector<double> strict_surface_logs(int surface_dim, int n_max) {
    const std::vector<Count> totals = enumerate_unfolded_totals(surface_dim, n_max);
    std::vector<double> logs(totals.size());
    for (std::size_t m = 0; m < totals.size(); ++m)
        logs[m] = m <= 1 ? 0.0 : log_count(totals[m]);
    return logs;
}

// Unfolded one-visit loop counts: the strict length-1 piece is the single +x
// step; length >= 2 comes straight off the unfolded table's (v=1, h=0) cells.
inline std::vector<double> one_visit_loop_logs(const CountTable& unfolded, int n_max) {
    std::vector<double> logs(static_cast<std::size_t>(n_max) + 1, kMinusInf);
    if (n_max >= 1) logs[1] = 0.0;
    for (int m = 2; m <= n_max; ++m) logs[m] = log_count(unfolded.at(m, 1, 0));
    return logs;
}

}  // namespace ineq_detail

// Exact finite-n inequality suite over the weight grid, plus limit-level
// window checks on the extrapolated free energies when a full-lattice table
// is supplied. Exact checks must hold with log-slack >= -1e-9 at every n;
// limit-level checks are widened by the extrapolation half-widths.
inline std::vector<InequalityReport> inequality_report(const AnalysisTables& tabs,
                                                       const std::vector<WeightPoint>& grid) {
    ineq_detail::validate(tabs);
    if (grid.empty()) throw DomainError("inequality report needs a nonempty weight grid");
    for (const WeightPoint& w : grid) thermo_detail::check_weights(w);
    const CountTable& pos = *tabs.positive;
    const CountTable& unf = *tabs.unfolded;
    const CountTable& pla = *tabs.plane;
    const int N = std::min({pos.n_max(), unf.n_max(), pla.n_max()});
    if (N < 1) throw DomainError("tables too short for inequality checks");

    std::map<double, char> as, ys;
    for (const WeightPoint& w : grid) {
        as.emplace(w.a, 0);
        ys.emplace(w.y, 0);
    }

    // per-weight prefix data
    struct ACols {
        std::vector<double> L, Ldag;
        std::vector<int> vstar;
    };
    struct YCols {
        std::vector<double> T, Tdag;
    };
    std::map<double, ACols> acols;
    std::map<double, YCols> ycols;
    for (auto& [a, unused] : as) {
        (void)unused;
        ACols c;
        c.L.resize(N + 1);
        c.Ldag.resize(N + 1);
        c.vstar.resize(N + 1, 0);
        for (int m = 0; m <= N; ++m) {
            c.L[m] = evaluate_partition(pos, {a, 1.0}, m, PartitionKind::L);
            c.Ldag[m] = evaluate_partition(unf, {a, 1.0}, m, PartitionKind::L);
            if (m >= 1)
                c.vstar[m] = static_cast<int>(std::floor(
                    moment(pos, {a, 1.0}, m, Observable::visits, 1, PartitionKind::L).mean));
        }
        acols.emplace(a, std::move(c));
    }
    for (auto& [y, unused] : ys) {
        (void)unused;
        YCols c;
        c.T.resize(N + 1);
        c.Tdag.resize(N + 1);
        for (int m = 0; m <= N; ++m) {
            c.T[m] = evaluate_partition(pos, {1.0, y}, m, PartitionKind::T);
            c.Tdag[m] = evaluate_partition(unf, {1.0, y}, m, PartitionKind::T);
        }
        ycols.emplace(y, std::move(c));
    }

    const std::vector<double> surf =
        ineq_detail::strict_surface_logs(pos.dimension() - 1, N);
    const std::vector<double> loop1 = ineq_detail::one_visit_loop_logs(unf, N);
    std::vector<double> plane_logs(N + 1);
    for (int m = 0; m <= N; ++m) plane_logs[m] = log_count(pla.level_total(m));

    InequalityReport pieces{"unfolded-pieces-lower"};
    InequalityReport convolution{"loop-tail-convolution-upper"};
    InequalityReport plane_lower{"plane-walks-lower"};
    InequalityReport rod_lower{"straight-rod-lower"};
    InequalityReport concat{"loop-concatenation-lower"};

    std::vector<double> conv_terms;
    for (const WeightPoint& w : grid) {
        const ACols& ac = acols.at(w.a);
        const YCols& yc = ycols.at(w.y);
        for (int n = 1; n <= N; ++n) {
            const double c = evaluate_partition(pos, w, n, PartitionKind::C);
            pieces.add(ineq_detail::where_nay(n, w.a, w.y), std::max(ac.Ldag[n], yc.Tdag[n]), c);
            conv_terms.clear();
            for (int m = 0; m <= n; ++m) conv_terms.push_back(ac.L[m] + yc.T[n - m]);
            convolution.add(ineq_detail::where_nay(n, w.a, w.y), c, log_sum_exp(conv_terms));
        }
    }
    for (auto& [a, ac] : acols) {
        const double u = std::log(a);
        for (int n = 1; n <= N; ++n) {
            plane_lower.add(ineq_detail::where_na(n, a), plane_logs[n] + n * u, ac.L[n]);
            const int vs = ac.vstar[n];
            const double lhs = vs >= n ? kMinusInf
                                       : surf[vs] + loop1[n - vs] + (vs + 1) * u;
            concat.add(ineq_detail::where_na(n, a) + " v*=" + std::to_string(vs), lhs, ac.L[n]);
        }
    }
    for (auto& [y, yc] : ycols) {
        const double lw = std::log(y);
        for (int n = 1; n <= N; ++n)
            rod_lower.add(ineq_detail::where_ny(n, y), n * lw, yc.T[n]);
    }

    std::vector<InequalityReport> out;
    out.push_back(std::move(pieces));
    out.push_back(std::move(convolution));
    out.push_back(std::move(plane_lower));
    out.push_back(std::move(rod_lower));
    out.push_back(std::move(concat));

    if (tabs.full) {
        const TableSource src(pos);
        const ModelCurves curves = build_model_curves(src, *tabs.full, pla);
        const double mud = curves.log_mu_d.value, hmud = curves.log_mu_d.half_width;
        const double mud1 = curves.log_mu_dm1.value, hmud1 = curves.log_mu_dm1.half_width;

        InequalityReport klo{"kappa-lower-window", true};
        InequalityReport khi{"kappa-upper-window", true};
        InequalityReport ksurf{"kappa-surface-asymptote-lower", true};
        for (auto& [a, unused] : as) {
            (void)unused;
            const double u = std::log(a);
            const LimitValue k = curves.kappa_at(a);
            const std::string w = "a=" + ineq_detail::fmt("%.6g", a);
            klo.add(w, std::max(mud - hmud, mud1 - hmud1 + u), k.value + k.half_width);
            if (u >= 0) khi.add(w, k.value - k.half_width, mud + hmud + u);
            ksurf.add(w, mud1 - hmud1 + u, k.value + k.half_width);
        }
        InequalityReport llo{"lambda-lower-window", true};
        InequalityReport lhi{"lambda-upper-window", true};
        InequalityReport lforce{"lambda-force-asymptote-lower", true};
        for (auto& [y, unused] : ys) {
            (void)unused;
            const double lw = std::log(y);
            const LimitValue l = curves.lambda_at(y);
            const std::string w = "y=" + ineq_detail::fmt("%.6g", y);
            llo.add(w, std::max(mud - hmud, lw), l.value + l.half_width);
            if (lw >= 0) lhi.add(w, l.value - l.half_width, mud + hmud + lw);
            lforce.add(w, lw, l.value + l.half_width);
        }
        out.push_back(std::move(klo));
        out.push_back(std::move(khi));
        out.push_back(std::move(ksurf));
        out.push_back(std::move(llo));
        out.push_back(std::move(lhi));
        out.push_back(std::move(lforce));
    }
    return out;
}

// Large-weight asymptote ratios and the integrated ratio monotonicity checks,
// all widened by extrapolation half-widths plus a fixed 0.1 allowance.
inline std::vector<InequalityReport> asymptote_check(const ModelCurves& curves,
                                                     const std::vector<double>& log_a_grid,
                                                     const std::vector<double>& log_y_grid) {
    if (log_a_grid.size() < 2 || log_y_grid.size() < 2)
        throw DomainError("asymptote check needs at least two grid points per axis");
    const double mud = curves.log_mu_d.value, hmud = curves.log_mu_d.half_width;
    const double mud1 = curves.log_mu_dm1.value, hmud1 = curves.log_mu_dm1.half_width;

    std::vector<InequalityReport> out;
    {
        InequalityReport r{"kappa-asymptote-ratio", true};
        const double u = log_a_grid.back();
        if (!(u > 0)) throw DomainError("kappa asymptote needs a grid reaching a > 1");
        const LimitValue k = curves.kappa_at(std::exp(u));
        const double ratio = (k.value - mud1) / u;
        const double tol = (k.half_width + hmud1) / u + 0.1;
        r.add("a=" + ineq_detail::fmt("%.6g", std::exp(u)) +
                  " ratio=" + ineq_detail::fmt("%.4f", ratio),
              std::abs(ratio - 1.0), tol);
        out.push_back(std::move(r));
    }
    {
        InequalityReport r{"lambda-asymptote-ratio", true};
        const double lw = log_y_grid.back();
        if (!(lw > 0)) throw DomainError("lambda asymptote needs a grid reaching y > 1");
        const LimitValue l = curves.lambda_at(std::exp(lw));
        const double ratio = l.value / lw;
        const double tol = l.half_width / lw + 0.1;
        r.add("y=" + ineq_detail::fmt("%.6g", std::exp(lw)) +
                  " ratio=" + ineq_detail::fmt("%.4f", ratio),
              std::abs(ratio - 1.0), tol);
        out.push_back(std::move(r));
    }
    {
        // (kappa(a) - log mu_d) / (log a - log(mu_d/mu_dm1)) non-increasing
        InequalityReport r{"kappa-ratio-monotone", true};
        const double shift = mud - mud1;
        double prev = 0.0, prev_tol = 0.0;
        bool have_prev = false;
        for (double u : log_a_grid) {
            const double den = u - shift;
            if (den < 0.3) continue;  // stay clear of the singular denominator
            const LimitValue k = curves.kappa_at(std::exp(u));
            const double ratio = (k.value - mud) / den;
            const double tol = (k.half_width + hmud + hmud1) / den;
            if (have_prev)
                r.add("a=" + ineq_detail::fmt("%.6g", std::exp(u)), ratio,
                      prev + prev_tol + tol);
            prev = ratio;
            prev_tol = tol;
            have_prev = true;
        }
        out.push_back(std::move(r));
    }
    {
        // (lambda(y) - log mu_d) / (log y - log mu_d) non-increasing
        InequalityReport r{"lambda-ratio-monotone", true};
        double prev = 0.0, prev_tol = 0.0;
        bool have_prev = false;
        for (double lw : log_y_grid) {
            const double den = lw - mud;
            if (den < 0.3) continue;
            const LimitValue l = curves.lambda_at(std::exp(lw));
            const double ratio = (l.value - mud) / den;
            const double tol = (l.half_width + 2 * hmud) / den;
            if (have_prev)
                r.add("y=" + ineq_detail::fmt("%.6g", std::exp(lw)), ratio,
                      prev + prev_tol + tol);
            prev = ratio;
            prev_tol = tol;
            have_prev = true;
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace sawpull
