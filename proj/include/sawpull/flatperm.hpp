#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "sawpull/counts.hpp"
#include "sawpull/errors.hpp"
#include "sawpull/logsum.hpp"
#include "sawpull/partition.hpp"
#include "sawpull/rng.hpp"

namespace sawpull {

// Stochastic density-of-states estimate of the positive-walk counts
// c_n^+(v,h). Cells never visited by the sampler are absent, not zero; the
// accessors keep that distinction sharp.
class DoSEstimate {
public:
    DoSEstimate(int dim, int n_max, std::uint64_t tours, std::uint64_t seed)
        : dim_(dim), n_max_(n_max), tours_(tours), seed_(seed) {
        if (dim < 1 || dim > kMaxDim) throw DomainError("dimension out of range");
        if (n_max < 0) throw DomainError("n_max must be >= 0");
        est_.resize(static_cast<std::size_t>(n_max) + 1);
        cnt_.resize(static_cast<std::size_t>(n_max) + 1);
        for (int n = 0; n <= n_max; ++n) {
            const std::size_t cells = static_cast<std::size_t>(n + 1) * (n + 1);
            est_[static_cast<std::size_t>(n)].assign(cells, 0.0);
            cnt_[static_cast<std::size_t>(n)].assign(cells, 0);
        }
    }

    int dimension() const { return dim_; }
    int n_max() const { return n_max_; }
    std::uint64_t tours() const { return tours_; }
    std::uint64_t seed() const { return seed_; }

    bool has(int n, int v, int h) const {
        if (n < 0 || n > n_max_ || v < 0 || v > n || h < 0 || h > n) return false;
        return cnt_[static_cast<std::size_t>(n)][index(n, v, h)] > 0;
    }

    // estimate of c_n^+(v,h); a never-visited cell is absent, not zero
    double at(int n, int v, int h) const {
        if (!has(n, v, h))
            throw DomainError("cell (" + std::to_string(n) + "," + std::to_string(v) + "," +
                              std::to_string(h) + ") absent from the estimate");
        return est_[static_cast<std::size_t>(n)][index(n, v, h)];
    }

    std::uint64_t samples(int n, int v, int h) const {
        if (!has(n, v, h)) return 0;
        return cnt_[static_cast<std::size_t>(n)][index(n, v, h)];
    }

    double level_total(int n) const {
        check_level(n);
        double t = 0.0;
        const auto& cs = cnt_[static_cast<std::size_t>(n)];
        const auto& es = est_[static_cast<std::size_t>(n)];
        for (std::size_t i = 0; i < cs.size(); ++i)
            if (cs[i] > 0) t += es[i];
        return t;
    }

    // f(v, h, estimate) over the visited cells of one level, (v, h) ascending
    template <class F>
    void for_level(int n, F&& f) const {
        check_level(n);
        for (int v = 0; v <= n; ++v)
            for (int h = 0; h <= n; ++h) {
                const std::size_t i = index(n, v, h);
                if (cnt_[static_cast<std::size_t>(n)][i] > 0)
                    f(v, h, est_[static_cast<std::size_t>(n)][i]);
            }
    }

    void set_cell(int n, int v, int h, double estimate, std::uint64_t samples) {
        check_level(n);
        if (v < 0 || v > n || h < 0 || h > n) throw DomainError("cell outside the (v,h) range");
        if (!(estimate > 0.0) || !std::isfinite(estimate))
            throw DomainError("cell estimates must be finite and positive");
        if (samples < 1) throw DomainError("a visited cell needs samples >= 1");
        est_[static_cast<std::size_t>(n)][index(n, v, h)] = estimate;
        cnt_[static_cast<std::size_t>(n)][index(n, v, h)] = samples;
    }

private:
    void check_level(int n) const {
        if (n < 0 || n > n_max_) throw DomainError("length outside the estimate range");
    }
    std::size_t index(int n, int v, int h) const {
        return static_cast<std::size_t>(v) * (n + 1) + static_cast<std::size_t>(h);
    }

    int dim_;
    int n_max_;
    std::uint64_t tours_;
    std::uint64_t seed_;
    std::vector<std::vector<double>> est_;
    std::vector<std::vector<std::uint64_t>> cnt_;
};

struct FlatPermOptions {
    int workers = 1;
    int tour_batch = 1024;  // tours per independent RNG stream
};

namespace flatperm_detail {

constexpr int kEnrichCap = 4;
constexpr double kMinSurvival = 0.25;

// Per-cell weight accumulator: extended precision with Neumaier compensation,
// so the represented total is sum + comp and merges stay exact enough to be
// order-insensitive in practice while remaining bitwise deterministic.
struct LevelAcc {
    std::vector<long double> sum;
    std::vector<long double> comp;
    std::vector<std::uint64_t> cnt;

    void init(int n) {
        const std::size_t cells = static_cast<std::size_t>(n + 1) * (n + 1);
        sum.assign(cells, 0.0L);
        comp.assign(cells, 0.0L);
        cnt.assign(cells, 0);
    }

    void kadd(std::size_t i, long double x) {
        const long double t = sum[i] + x;
        if (std::abs(sum[i]) >= std::abs(x))
            comp[i] += (sum[i] - t) + x;
        else
            comp[i] += (x - t) + sum[i];
        sum[i] = t;
    }

    void deposit(std::size_t i, long double w) {
        kadd(i, w);
        ++cnt[i];
    }

    long double total(std::size_t i) const { return sum[i] + comp[i]; }
};

struct BatchAcc {
    std::vector<LevelAcc> levels;

    void init(int n_max) {
        levels.resize(static_cast<std::size_t>(n_max) + 1);
        for (int n = 0; n <= n_max; ++n) levels[static_cast<std::size_t>(n)].init(n);
    }

    void merge(const BatchAcc& b) {
        for (std::size_t n = 0; n < levels.size(); ++n) {
            LevelAcc& g = levels[n];
            const LevelAcc& x = b.levels[n];
            for (std::size_t i = 0; i < g.sum.size(); ++i) {
                g.kadd(i, x.sum[i]);
                g.kadd(i, x.comp[i]);
                g.cnt[i] += x.cnt[i];
            }
        }
    }
};

// Depth-first tour grower over a dense occupancy board. The board spans
// [-n_max, n_max] on every free axis and [0, n_max] on the height axis, which
// is exactly the reachable box, so no bounds checks are needed beyond the
// half-space clip.
struct Grower {
    int d = 2;
    int nmax = 0;
    int zc = 1;
    std::array<int, kMaxDim> stride{};
    int origin_idx = 0;
    std::vector<std::uint8_t> occ;
    BatchAcc* acc = nullptr;
    SplitMix64 rng{0};
    std::uint64_t tour_in_batch = 0;

    void init(int dim, int n_max) {
        d = dim;
        nmax = n_max;
        zc = dim - 1;
        int size = 1;
        for (int a = 0; a < d; ++a) {
            stride[static_cast<std::size_t>(a)] = size;
            size *= a == zc ? n_max + 1 : 2 * n_max + 1;
        }
        occ.assign(static_cast<std::size_t>(size), 0);
        origin_idx = 0;
        for (int a = 0; a < zc; ++a) origin_idx += n_max * stride[static_cast<std::size_t>(a)];
        occ[static_cast<std::size_t>(origin_idx)] = 1;
    }

    void grow(int idx, int z, int n, int v, long double w) {
        LevelAcc& lvl = acc->levels[static_cast<std::size_t>(n)];
        const std::size_t cell = static_cast<std::size_t>(v) * (n + 1) + static_cast<std::size_t>(z);
        lvl.deposit(cell, w);
        if (n == nmax) return;

        // deposit-then-ratio steering toward a flat (n, v, h) histogram
        const double r = static_cast<double>(
            w * static_cast<long double>(tour_in_batch) / lvl.total(cell));
        int copies = 1;
        long double wc = w;
        if (r >= 1.0) {
            copies = r >= kEnrichCap ? kEnrichCap : static_cast<int>(r);
            wc = w / copies;
        } else {
            const double p = r > kMinSurvival ? r : kMinSurvival;
            if (rng.next_double() >= p) return;
            wc = w / p;
        }

        int moves[2 * kMaxDim];
        int move_z[2 * kMaxDim];
        int atmosphere = 0;
        for (int axis = 0; axis < d; ++axis) {
            const int s = stride[static_cast<std::size_t>(axis)];
            for (int dir = +1; dir >= -1; dir -= 2) {
                const int nz = axis == zc ? z + dir : z;
                if (nz < 0) continue;
                const int nidx = idx + dir * s;
                if (occ[static_cast<std::size_t>(nidx)]) continue;
                moves[atmosphere] = nidx;
                move_z[atmosphere] = nz;
                ++atmosphere;
            }
        }
        if (atmosphere == 0) return;  // trapped: weight stays at the achieved length

        const long double wn = wc * atmosphere;
        for (int c = 0; c < copies; ++c) {
            const int k = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(atmosphere)));
            const int nidx = moves[k];
            const int nz = move_z[k];
            occ[static_cast<std::size_t>(nidx)] = 1;
            grow(nidx, nz, n + 1, v + (nz == 0 ? 1 : 0), wn);
            occ[static_cast<std::size_t>(nidx)] = 0;
        }
    }

    // One tour: the empty walk, then deterministic branching over the 2d-1
    // admissible first steps with unit weight each, so level 1 is exact.
    void tour() {
        ++tour_in_batch;
        acc->levels[0].deposit(0, 1.0L);
        if (nmax == 0) return;
        for (int axis = 0; axis < d; ++axis) {
            const int s = stride[static_cast<std::size_t>(axis)];
            for (int dir = +1; dir >= -1; dir -= 2) {
                if (axis == zc && dir < 0) continue;
                const int nz = axis == zc ? 1 : 0;
                const int nidx = origin_idx + dir * s;
                occ[static_cast<std::size_t>(nidx)] = 1;
                grow(nidx, nz, 1, nz == 0 ? 1 : 0, 1.0L);
                occ[static_cast<std::size_t>(nidx)] = 0;
            }
        }
    }

    void run_batch(std::uint64_t seed, std::uint64_t batch_index, std::uint64_t batch_tours,
                   BatchAcc& out) {
        out.init(nmax);
        acc = &out;
        rng = stream_rng(seed, batch_index);
        tour_in_batch = 0;
        for (std::uint64_t t = 0; t < batch_tours; ++t) tour();
    }
};

}  // namespace flatperm_detail

// Flat-histogram pruned-enriched Rosenbluth sampling of positive walks.
// Tours are processed in fixed-size batches; each batch has its own
// counter-based RNG stream derived from (seed, batch index) and its own
// steering histogram, so the result is bitwise identical for any worker
// count: scheduling only decides who computes a batch, never what it is.
inline DoSEstimate run_flatperm(int d, int n_max, std::uint64_t tours, std::uint64_t seed,
                                const FlatPermOptions& opt = {}) {
    if (d < 1 || d > kMaxDim) throw DomainError("dimension out of range");
    if (n_max < 1) throw DomainError("run_flatperm needs n_max >= 1");
    if (tours < 1) throw DomainError("run_flatperm needs tours >= 1");
    if (opt.workers < 1) throw DomainError("worker count must be >= 1");
    if (opt.tour_batch < 1) throw DomainError("tour batch must be >= 1");

    const std::uint64_t batch = static_cast<std::uint64_t>(opt.tour_batch);
    const std::uint64_t num_batches = (tours + batch - 1) / batch;
    const auto tours_of = [&](std::uint64_t b) {
        return b + 1 == num_batches ? tours - b * batch : batch;
    };

    flatperm_detail::BatchAcc global;
    global.init(n_max);

    if (opt.workers == 1 || num_batches == 1) {
        flatperm_detail::Grower g;
        g.init(d, n_max);
        flatperm_detail::BatchAcc scratch;
        for (std::uint64_t b = 0; b < num_batches; ++b) {
            g.run_batch(seed, b, tours_of(b), scratch);
            global.merge(scratch);
        }
    } else {
        std::vector<flatperm_detail::BatchAcc> results(num_batches);
        std::atomic<std::uint64_t> next{0};
        const std::uint64_t pool_size =
            std::min<std::uint64_t>(static_cast<std::uint64_t>(opt.workers), num_batches);
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(pool_size));
        for (std::uint64_t i = 0; i < pool_size; ++i)
            pool.emplace_back([&] {
                flatperm_detail::Grower g;
                g.init(d, n_max);
                for (;;) {
                    const std::uint64_t b = next.fetch_add(1);
                    if (b >= num_batches) break;
                    g.run_batch(seed, b, tours_of(b), results[b]);
                }
            });
        for (std::thread& t : pool) t.join();
        // merge in batch-index order regardless of completion order
        for (const flatperm_detail::BatchAcc& r : results) global.merge(r);
    }

    DoSEstimate est(d, n_max, tours, seed);
    const long double norm = static_cast<long double>(tours);
    for (int n = 0; n <= n_max; ++n) {
        const flatperm_detail::LevelAcc& lvl = global.levels[static_cast<std::size_t>(n)];
        for (int v = 0; v <= n; ++v)
            for (int h = 0; h <= n; ++h) {
                const std::size_t i =
                    static_cast<std::size_t>(v) * (n + 1) + static_cast<std::size_t>(h);
                if (lvl.cnt[i] > 0)
                    est.set_cell(n, v, h, static_cast<double>(lvl.total(i) / norm), lvl.cnt[i]);
            }
    }
    return est;
}

// Exact table recast as a degenerate estimate (tours = 1, one sample per
// cell): useful as a comparison fixture and for splicing tests.
inline DoSEstimate estimate_from_table(const CountTable& exact) {
    if (exact.walk_class() != WalkClass::positive)
        throw ClassMismatchError(std::string("estimate_from_table expects positive, got ") +
                                 to_string(exact.walk_class()));
    DoSEstimate est(exact.dimension(), exact.n_max(), 1, 0);
    for (const auto& [key, count] : exact.cells())
        est.set_cell(key.n, key.v, key.h, count.convert_to<double>(), 1);
    return est;
}

struct CompareRow {
    int n = 0;
    int cells = 0;       // heavy cells compared at this length
    double max_rel = 0.0;
    double mean_rel = 0.0;
};

struct CompareReport {
    double threshold = 0.05;
    double mass_floor = 1e-4;  // minimum cell share of its level total
    std::vector<CompareRow> rows;
    bool pass = true;
};

// Per-length relative-error report of an estimate against the exact table,
// restricted to cells holding at least mass_floor of their level total. An
// absent heavy cell counts as full error, never as a silent zero.
inline CompareReport compare(const DoSEstimate& est, const CountTable& exact,
                             double threshold = 0.05, double mass_floor = 1e-4) {
    if (exact.walk_class() != WalkClass::positive)
        throw ClassMismatchError(std::string("compare expects the positive table, got ") +
                                 to_string(exact.walk_class()));
    if (exact.dimension() != est.dimension())
        throw ClassMismatchError("estimate and table dimensions differ");
    if (!(threshold > 0) || !(mass_floor >= 0))
        throw DomainError("compare needs threshold > 0 and mass_floor >= 0");
    const int N = std::min(est.n_max(), exact.n_max());
    if (N < 1) throw DomainError("no overlapping lengths to compare");

    CompareReport rep;
    rep.threshold = threshold;
    rep.mass_floor = mass_floor;
    for (int n = 1; n <= N; ++n) {
        const long double level = exact.level_total(n).convert_to<long double>();
        CompareRow row;
        row.n = n;
        long double rel_sum = 0.0L;
        for (auto it = exact.level_begin(n); it != exact.level_end(n); ++it) {
            const long double c = it->second.convert_to<long double>();
            if (c < mass_floor * level) continue;
            const CellKey& k = it->first;
            const long double e =
                est.has(k.n, k.v, k.h) ? static_cast<long double>(est.at(k.n, k.v, k.h)) : 0.0L;
            const double rel = static_cast<double>(std::abs(e - c) / c);
            row.max_rel = std::max(row.max_rel, rel);
            rel_sum += rel;
            ++row.cells;
        }
        if (row.cells > 0) row.mean_rel = static_cast<double>(rel_sum / row.cells);
        if (row.max_rel > threshold) rep.pass = false;
        rep.rows.push_back(row);
    }
    return rep;
}

// PartitionSource over a stochastic estimate: same weighted-sum semantics as
// the exact tables, in the log domain.
class EstimateSource final : public PartitionSource {
public:
    explicit EstimateSource(const DoSEstimate& e) : e_(&e) {}
    int dim() const override { return e_->dimension(); }
    int n_max() const override { return e_->n_max(); }
    double log_partition(const WeightPoint& w, int n, PartitionKind kind) const override {
        thermo_detail::check_weights(w);
        if (n < 0 || n > e_->n_max()) throw DomainError("length outside the estimate range");
        const double la = std::log(w.a), ly = std::log(w.y);
        std::vector<double> terms;
        e_->for_level(n, [&](int v, int h, double est) {
            if (kind == PartitionKind::L && h != 0) return;
            if (kind == PartitionKind::T && v != 0) return;
            terms.push_back(std::log(est) + v * la + h * ly);
        });
        return log_sum_exp(terms);
    }

private:
    const DoSEstimate* e_;
};

// Exact table up to its horizon, stochastic estimate beyond: the source used
// to push free-energy ladders past exact-enumeration lengths.
class SplicedSource final : public PartitionSource {
public:
    SplicedSource(const CountTable& exact, const DoSEstimate& mc)
        : exact_(exact), mc_(mc), cut_(exact.n_max()) {
        if (exact.walk_class() != WalkClass::positive)
            throw ClassMismatchError("spliced source expects the positive table");
        if (exact.dimension() != mc.dimension())
            throw ClassMismatchError("spliced sources must share a dimension");
        if (mc.n_max() < exact.n_max())
            throw DomainError("the estimate must extend past the exact table");
    }
    int dim() const override { return mc_.dim(); }
    int n_max() const override { return mc_.n_max(); }
    double log_partition(const WeightPoint& w, int n, PartitionKind kind) const override {
        return n <= cut_ ? exact_.log_partition(w, n, kind) : mc_.log_partition(w, n, kind);
    }

private:
    TableSource exact_;
    EstimateSource mc_;
    int cut_;
};

}  // namespace sawpull
