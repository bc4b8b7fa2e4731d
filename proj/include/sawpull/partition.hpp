#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "sawpull/counts.hpp"
#include "sawpull/errors.hpp"
#include "sawpull/extrapolate.hpp"
#include "sawpull/logsum.hpp"

namespace sawpull {

struct WeightPoint {
    double a = 1.0;
    double y = 1.0;
};

enum class PartitionKind { C, L, T };

inline std::string to_string(PartitionKind k) {
    switch (k) {
        case PartitionKind::C: return "C";
        case PartitionKind::L: return "L";
        default: return "T";
    }
}

enum class Observable { visits, height };

inline std::string to_string(Observable o) {
    return o == Observable::visits ? "visits" : "height";
}

struct MomentReport {
    Observable which = Observable::visits;
    double mean = 0.0;
    double variance = 0.0;
};

namespace thermo_detail {

inline void check_weights(const WeightPoint& w) {
    if (!(w.a > 0.0) || !std::isfinite(w.a) || !(w.y > 0.0) || !std::isfinite(w.y))
        throw DomainError("weight point must have finite a > 0 and y > 0");
}

inline void check_length(const CountTable& t, int n) {
    if (n < 0 || n > t.n_max())
        throw DomainError("length " + std::to_string(n) + " outside table range [0, " +
                          std::to_string(t.n_max()) + "]");
}

// Log-weighted terms of one level, restricted by kind, together with the
// observable value per term when requested.
template <typename F>
inline void for_level_terms(const CountTable& t, const WeightPoint& w, int n, PartitionKind kind,
                            F&& f) {
    const double u = std::log(w.a);
    const double lw = std::log(w.y);
    for (auto it = t.level_begin(n); it != t.level_end(n); ++it) {
        const CellKey& k = it->first;
        if (kind == PartitionKind::L && k.h != 0) continue;
        if (kind == PartitionKind::T && k.v != 0) continue;
        double term = log_count(it->second);
        if (kind != PartitionKind::T) term += k.v * u;
        if (kind != PartitionKind::L) term += k.h * lw;
        f(k, term);
    }
}

}  // namespace thermo_detail

// log Σ counts · a^v · y^h over the level-n slice selected by kind.
// An empty restricted slice yields the minus-infinity sentinel.
inline double evaluate_partition(const CountTable& table, const WeightPoint& w, int n,
                                 PartitionKind kind) {
    thermo_detail::check_weights(w);
    thermo_detail::check_length(table, n);
    std::vector<double> terms;
    thermo_detail::for_level_terms(table, w, n, kind,
                                   [&](const CellKey&, double t) { terms.push_back(t); });
    return log_sum_exp(terms);
}

// Mean (and for order 2 the variance) of v or h under the Boltzmann
// distribution proportional to counts · a^v · y^h on the restricted slice.
inline MomentReport moment(const CountTable& table, const WeightPoint& w, int n, Observable which,
                           int order = 2, PartitionKind kind = PartitionKind::C) {
    if (order < 1 || order > 2) throw DomainError("moment order must be 1 or 2");
    thermo_detail::check_weights(w);
    thermo_detail::check_length(table, n);
    std::vector<double> terms;
    std::vector<double> xs;
    thermo_detail::for_level_terms(table, w, n, kind, [&](const CellKey& k, double t) {
        terms.push_back(t);
        xs.push_back(which == Observable::visits ? k.v : k.h);
    });
    const double lz = log_sum_exp(terms);
    if (!std::isfinite(lz)) throw DomainError("moment over an empty restricted slice");
    MomentReport r;
    r.which = which;
    long double mean = 0.0L;
    for (std::size_t i = 0; i < terms.size(); ++i)
        mean += std::exp(static_cast<long double>(terms[i] - lz)) * xs[i];
    r.mean = static_cast<double>(mean);
    if (order == 2) {
        long double var = 0.0L;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const long double d = xs[i] - mean;
            var += std::exp(static_cast<long double>(terms[i] - lz)) * d * d;
        }
        r.variance = std::max(static_cast<double>(var), 0.0);
    }
    return r;
}

struct FreeEnergyCurve {
    PartitionKind kind = PartitionKind::C;
    std::vector<WeightPoint> grid;
    int n_max = 0;
    // values[g][n-1] = (1/n) log of the level-n partition sum at grid[g]
    std::vector<std::vector<double>> values;
    std::vector<std::optional<LimitValue>> limits;

    double value(std::size_t g, int n) const {
        if (g >= grid.size() || n < 1 || n > n_max) throw DomainError("curve index out of range");
        return values[g][static_cast<std::size_t>(n) - 1];
    }
    const LimitValue& limit(std::size_t g) const {
        if (g >= limits.size() || !limits[g])
            throw ExtrapolationError("no limit estimate at grid index " + std::to_string(g));
        return *limits[g];
    }
};

inline FreeEnergyCurve free_energy_curve(const CountTable& table,
                                         const std::vector<WeightPoint>& grid,
                                         PartitionKind kind) {
    if (table.n_max() < 4) throw DomainError("free_energy_curve needs table.n_max >= 4");
    if (grid.empty()) throw DomainError("free_energy_curve needs a nonempty grid");
    FreeEnergyCurve c;
    c.kind = kind;
    c.grid = grid;
    c.n_max = table.n_max();
    c.values.reserve(grid.size());
    c.limits.reserve(grid.size());
    for (const WeightPoint& w : grid) {
        std::vector<double> vs;
        vs.reserve(static_cast<std::size_t>(c.n_max));
        int usable = 0;
        for (int n = 1; n <= c.n_max; ++n) {
            const double v = evaluate_partition(table, w, n, kind) / n;
            if (std::isfinite(v)) ++usable;
            vs.push_back(v);
        }
        if (usable >= 6)
            c.limits.emplace_back(extrapolate(vs));
        else
            c.limits.emplace_back(std::nullopt);
        c.values.push_back(std::move(vs));
    }
    return c;
}

// Inclusive arithmetic grid lo, lo+step, ..., hi in the log domain. The span
// must be an integral number of steps.
inline std::vector<double> log_grid(double lo, double step, double hi) {
    if (!(step > 0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo)
        throw DomainError("log_grid requires finite lo <= hi and step > 0");
    const double span = (hi - lo) / step;
    const long long count = std::llround(span);
    if (std::abs(span - count) > 1e-9 * std::max(1.0, std::abs(span)))
        throw DomainError("log_grid span is not an integral number of steps");
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(count) + 1);
    for (long long i = 0; i <= count; ++i) g.push_back(lo + static_cast<double>(i) * step);
    g.back() = hi;
    return g;
}

inline std::vector<WeightPoint> weights_along_a(const std::vector<double>& log_as, double y = 1.0) {
    std::vector<WeightPoint> g;
    g.reserve(log_as.size());
    for (double u : log_as) g.push_back({std::exp(u), y});
    return g;
}

inline std::vector<WeightPoint> weights_along_y(const std::vector<double>& log_ys, double a = 1.0) {
    std::vector<WeightPoint> g;
    g.reserve(log_ys.size());
    for (double w : log_ys) g.push_back({a, std::exp(w)});
    return g;
}

// Anything that can supply finite-n log partition sums. Exact tables are the
// usual source; stochastic estimates plug in through the same interface.
class PartitionSource {
public:
    virtual ~PartitionSource() = default;
    virtual int dim() const = 0;
    virtual int n_max() const = 0;
    virtual double log_partition(const WeightPoint& w, int n, PartitionKind kind) const = 0;
};

class TableSource final : public PartitionSource {
public:
    explicit TableSource(const CountTable& t) : t_(&t) {}
    int dim() const override { return t_->dimension(); }
    int n_max() const override { return t_->n_max(); }
    double log_partition(const WeightPoint& w, int n, PartitionKind kind) const override {
        return evaluate_partition(*t_, w, n, kind);
    }

private:
    const CountTable* t_;
};

}  // namespace sawpull
