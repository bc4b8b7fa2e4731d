#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <thread>
#include <type_traits>
#include <vector>

#include "sawpull/counts.hpp"
#include "sawpull/errors.hpp"
#include "sawpull/geometry.hpp"

namespace sawpull {

struct EnumerateOptions {
    int workers = 0;              // 0: SAWPULL_WORKERS env var, else hardware count
    bool symmetry = false;        // canonicalize the first horizontal step, multiply by orbit
    std::uint64_t max_nodes = 0;  // 0 = unbounded; exceeding raises ResourceLimitError
    int split_depth = 4;          // prefix depth of the parallel forest split
    int arithmetic = 0;           // 0 auto, 1 force 64-bit, 2 force big integers
};

inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SAWPULL_WORKERS")) {
        char* end = nullptr;
        const long w = std::strtol(env, &end, 10);
        if (end != nullptr && *end == '\0' && w >= 1 && w <= 4096) return static_cast<int>(w);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

namespace enum_detail {

enum class Variant { pos, pos_unf, full, full_unf };

template <Variant V>
inline constexpr bool kTracksVisits = (V == Variant::pos || V == Variant::pos_unf);
template <Variant V>
inline constexpr bool kUnfolded = (V == Variant::pos_unf || V == Variant::full_unf);

// Dense occupancy board. Valid coordinates per axis are [lo, hi]; one extra
// cell on each side is pre-marked occupied, so a walk confined to the valid
// box never needs bounds checks: stepping outside lands on an occupied cell.
struct Board {
    int dim;
    std::array<std::int64_t, kMaxDim> stride{};
    std::array<int, kMaxDim> lo{}, hi{};
    std::int64_t origin = 0;
    std::vector<std::uint8_t> occ;

    Board(int dim_, int n_max, bool z_nonneg, bool x_nonneg) : dim(dim_) {
        std::array<std::int64_t, kMaxDim> extent{};
        for (int a = 0; a < dim; ++a) {
            lo[a] = -n_max;
            hi[a] = n_max;
        }
        if (x_nonneg) lo[0] = 0;
        if (z_nonneg) lo[dim - 1] = 0;
        std::int64_t total = 1;
        for (int a = dim - 1; a >= 0; --a) {
            extent[a] = hi[a] - lo[a] + 3;
            stride[a] = total;
            total *= extent[a];
        }
        occ.assign(static_cast<std::size_t>(total), 0);
        for (std::int64_t idx = 0; idx < total; ++idx) {
            std::int64_t rest = idx;
            for (int a = 0; a < dim; ++a) {
                const std::int64_t c = rest / stride[a] + lo[a] - 1;
                rest %= stride[a];
                if (c < lo[a] || c > hi[a]) {
                    occ[static_cast<std::size_t>(idx)] = 1;
                    break;
                }
            }
        }
        origin = index(origin_point());
    }

    std::int64_t index(const Point& p) const {
        std::int64_t idx = 0;
        for (int a = 0; a < dim; ++a) idx += (p[static_cast<std::size_t>(a)] - lo[a] + 1) * stride[a];
        return idx;
    }
};

// Per-length dense count arrays. vstride > 0 selects the positive layout
// (cell = v*vstride + z); otherwise the full-lattice layout (cell = h + n_max).
template <class T>
struct Accum {
    int n_max = 0;
    int vstride = 0;
    std::vector<std::vector<T>> lvl;

    static Accum positive_layout(int n_max) {
        Accum a;
        a.n_max = n_max;
        a.vstride = n_max + 1;
        a.lvl.resize(static_cast<std::size_t>(n_max) + 1);
        for (int n = 0; n <= n_max; ++n)
            a.lvl[static_cast<std::size_t>(n)].assign(
                static_cast<std::size_t>(n + 1) * static_cast<std::size_t>(a.vstride), T(0));
        return a;
    }

    static Accum full_layout(int n_max) {
        Accum a;
        a.n_max = n_max;
        a.vstride = 0;
        a.lvl.resize(static_cast<std::size_t>(n_max) + 1);
        for (int n = 0; n <= n_max; ++n)
            a.lvl[static_cast<std::size_t>(n)].assign(2 * static_cast<std::size_t>(n_max) + 1, T(0));
        return a;
    }

    [[noreturn]] void throw_overflow(int n, std::size_t cell) const {
        if (vstride > 0)
            throw OverflowError(n, static_cast<int>(cell) / vstride,
                                static_cast<int>(cell) % vstride);
        throw OverflowError(n, 0, static_cast<int>(cell) - n_max);
    }

    void add(int n, std::size_t cell, std::uint64_t amount) {
        T& c = lvl[static_cast<std::size_t>(n)][cell];
        if constexpr (std::is_same_v<T, std::uint64_t>) {
            if (__builtin_add_overflow(c, amount, &c)) throw_overflow(n, cell);
        } else {
            c += amount;
        }
    }

    void merge(const Accum& o) {
        for (int n = 0; n <= n_max; ++n) {
            auto& dst = lvl[static_cast<std::size_t>(n)];
            const auto& src = o.lvl[static_cast<std::size_t>(n)];
            for (std::size_t cell = 0; cell < dst.size(); ++cell) {
                if constexpr (std::is_same_v<T, std::uint64_t>) {
                    if (__builtin_add_overflow(dst[cell], src[cell], &dst[cell]))
                        throw_overflow(n, cell);
                } else {
                    dst[cell] += src[cell];
                }
            }
        }
    }
};

// Shared node budget with chunked consumption; 0 initial budget means unbounded.
struct NodeBudget {
    std::atomic<std::int64_t> remaining{0};
    std::atomic<bool> exhausted{false};
    bool bounded = false;

    explicit NodeBudget(std::uint64_t max_nodes) {
        bounded = max_nodes > 0;
        remaining.store(static_cast<std::int64_t>(max_nodes));
    }
};

inline constexpr std::int64_t kBudgetChunk = 8192;

struct PrefixTask {
    std::vector<Point> vertices;
    int v = 0, z = 0, x = 0, rmax = 0;
    bool rod = false;
    std::uint64_t mult = 1;
};

template <Variant V, class T>
struct Dfs {
    Board& board;
    Accum<T>& acc;
    int dim;
    int n_max;
    int ndirs;
    std::int64_t off[2 * kMaxDim] = {};
    int dz[2 * kMaxDim] = {};
    int dx[2 * kMaxDim] = {};
    bool horiz[2 * kMaxDim] = {};
    int plus_x = -1;
    bool symmetry = false;
    std::uint64_t sym_mult = 1;
    NodeBudget* budget = nullptr;
    std::int64_t local_budget = 0;

    Dfs(Board& b, Accum<T>& a, bool symmetry_, NodeBudget* budget_)
        : board(b), acc(a), dim(b.dim), n_max(a.n_max), symmetry(symmetry_), budget(budget_) {
        const auto steps = step_set(dim);
        ndirs = static_cast<int>(steps.size());
        for (int k = 0; k < ndirs; ++k) {
            const Step s = steps[static_cast<std::size_t>(k)];
            off[k] = s.dir * board.stride[s.axis];
            dz[k] = s.axis == dim - 1 ? s.dir : 0;
            dx[k] = s.axis == 0 ? s.dir : 0;
            horiz[k] = s.axis != dim - 1;
            if (s.axis == 0 && s.dir == 1) plus_x = k;
        }
        sym_mult = static_cast<std::uint64_t>(2 * (dim - 1));
    }

    bool consume_node() {
        if (budget == nullptr || !budget->bounded) return true;
        if (budget->exhausted.load(std::memory_order_relaxed)) return false;
        if (local_budget == 0) {
            if (budget->remaining.fetch_sub(kBudgetChunk, std::memory_order_relaxed) <= 0) {
                budget->exhausted.store(true, std::memory_order_relaxed);
                return false;
            }
            local_budget = kBudgetChunk;
        }
        --local_budget;
        return true;
    }

    void record(int depth, int v, int z, int x, int rmax, std::uint64_t mult) {
        if constexpr (kUnfolded<V>) {
            if (depth > 1 && x <= rmax) return;
        }
        (void)x;
        (void)rmax;
        if constexpr (kTracksVisits<V>) {
            acc.add(depth, static_cast<std::size_t>(v) * static_cast<std::size_t>(acc.vstride) +
                               static_cast<std::size_t>(z),
                    mult);
        } else {
            acc.add(depth, static_cast<std::size_t>(z + n_max), mult);
        }
    }

    // Full depth-first search from the given state; records depths >= depth.
    // Returns false iff the node budget ran out.
    bool run(std::int64_t idx, int depth, int v, int z, int x, int rmax, bool rod,
             std::uint64_t mult) {
        if (!consume_node()) return false;
        record(depth, v, z, x, rmax, mult);
        if (depth == n_max) return true;
        const int child_rmax = kUnfolded<V> ? std::max(rmax, x) : 0;
        for (int k = 0; k < ndirs; ++k) {
            if (rod && horiz[k] && k != plus_x) continue;
            const std::int64_t nidx = idx + off[k];
            if (board.occ[static_cast<std::size_t>(nidx)]) continue;
            const int nz = z + dz[k];
            int nv = v;
            if constexpr (kTracksVisits<V>) nv += nz == 0 ? 1 : 0;
            const bool enter_spread = rod && horiz[k];
            board.occ[static_cast<std::size_t>(nidx)] = 1;
            const bool ok = run(nidx, depth + 1, nv, nz, x + dx[k], child_rmax, rod && !horiz[k],
                                enter_spread ? sym_mult : mult);
            board.occ[static_cast<std::size_t>(nidx)] = 0;
            if (!ok) return false;
        }
        return true;
    }

    // Prefix pass: records depths < split and emits one task per reachable
    // depth-`split` state. Runs single-threaded on a fresh board.
    bool generate(std::vector<Point>& prefix, std::int64_t idx, int depth, int v, int z, int x,
                  int rmax, bool rod, std::uint64_t mult, int split,
                  std::vector<PrefixTask>& tasks) {
        if (depth == split) {
            tasks.push_back(PrefixTask{prefix, v, z, x, rmax, rod, mult});
            return true;
        }
        if (!consume_node()) return false;
        record(depth, v, z, x, rmax, mult);
        const int child_rmax = kUnfolded<V> ? std::max(rmax, x) : 0;
        for (int k = 0; k < ndirs; ++k) {
            if (rod && horiz[k] && k != plus_x) continue;
            const std::int64_t nidx = idx + off[k];
            if (board.occ[static_cast<std::size_t>(nidx)]) continue;
            const int nz = z + dz[k];
            int nv = v;
            if constexpr (kTracksVisits<V>) nv += nz == 0 ? 1 : 0;
            const bool enter_spread = rod && horiz[k];
            board.occ[static_cast<std::size_t>(nidx)] = 1;
            Point p = prefix.back();
            p[static_cast<std::size_t>(step_axis(k))] += step_dir(k);
            prefix.push_back(p);
            const bool ok =
                generate(prefix, nidx, depth + 1, nv, nz, x + dx[k], child_rmax,
                         rod && !horiz[k], enter_spread ? sym_mult : mult, split, tasks);
            prefix.pop_back();
            board.occ[static_cast<std::size_t>(nidx)] = 0;
            if (!ok) return false;
        }
        return true;
    }

    int step_axis(int k) const { return k / 2; }
    int step_dir(int k) const { return k % 2 == 0 ? +1 : -1; }
};

template <Variant V, class T>
Accum<T> run_engine(int dim, int n_max, const EnumerateOptions& opt) {
    constexpr bool z_nonneg = kTracksVisits<V>;
    constexpr bool x_nonneg = kUnfolded<V>;
    const int split = std::clamp(opt.split_depth, 0, n_max);

    NodeBudget budget(opt.max_nodes);
    auto fresh_accum = [&] {
        return kTracksVisits<V> ? Accum<T>::positive_layout(n_max) : Accum<T>::full_layout(n_max);
    };

    Accum<T> base = fresh_accum();
    std::vector<PrefixTask> tasks;
    {
        Board board(dim, n_max, z_nonneg, x_nonneg);
        Dfs<V, T> dfs(board, base, opt.symmetry, &budget);
        std::vector<Point> prefix{origin_point()};
        board.occ[static_cast<std::size_t>(board.origin)] = 1;
        dfs.generate(prefix, board.origin, 0, 0, 0, 0, 0, opt.symmetry, 1, split, tasks);
    }

    if (!budget.exhausted.load() && !tasks.empty()) {
        const int workers =
            std::max(1, std::min<int>(resolve_workers(opt.workers), static_cast<int>(tasks.size())));
        std::vector<Accum<T>> parts;
        parts.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) parts.push_back(fresh_accum());

        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
        std::atomic<bool> failed{false};

        auto work = [&](int wi) {
            try {
                Board board(dim, n_max, z_nonneg, x_nonneg);
                Dfs<V, T> dfs(board, parts[static_cast<std::size_t>(wi)], opt.symmetry, &budget);
                for (;;) {
                    if (failed.load(std::memory_order_relaxed)) break;
                    const std::size_t t = next.fetch_add(1, std::memory_order_relaxed);
                    if (t >= tasks.size()) break;
                    const PrefixTask& task = tasks[t];
                    for (const Point& p : task.vertices)
                        board.occ[static_cast<std::size_t>(board.index(p))] = 1;
                    const bool ok = dfs.run(board.index(task.vertices.back()), split, task.v,
                                            task.z, task.x, task.rmax, task.rod, task.mult);
                    for (const Point& p : task.vertices)
                        board.occ[static_cast<std::size_t>(board.index(p))] = 0;
                    if (!ok) break;
                }
            } catch (...) {
                errors[static_cast<std::size_t>(wi)] = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
            }
        };

        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);

        // Deterministic result: per-cell integer sums are independent of how
        // tasks were scheduled across workers.
        for (const auto& part : parts) base.merge(part);
    }

    if (budget.exhausted.load())
        throw ResourceLimitError("node budget of " + std::to_string(opt.max_nodes) +
                                 " exhausted; partial results rejected");
    return base;
}

inline bool predict_overflow(int dim, int n_max) {
    // mu-ratio bound: the atmosphere ratio c_{n+1}/c_n is at most 2d-1, so
    // c_n <= 2d * (2d-1)^(n-1); 64-bit accumulation is safe iff that bound
    // (which also caps every cell and every partial sum) fits.
    if (n_max < 1) return false;
    Count bound = 2 * dim;
    for (int i = 1; i < n_max; ++i) bound *= 2 * dim - 1;
    return bound > Count(std::numeric_limits<std::uint64_t>::max());
}

template <class T>
CountTable table_from_accum(const Accum<T>& acc, int dim, WalkClass cls, int n_max) {
    CountTable out(dim, cls, n_max);
    for (int n = 0; n <= n_max; ++n) {
        const auto& row = acc.lvl[static_cast<std::size_t>(n)];
        if (acc.vstride > 0) {
            for (std::size_t cell = 0; cell < row.size(); ++cell)
                if (row[cell] != 0)
                    out.add(n, static_cast<int>(cell) / acc.vstride,
                            static_cast<int>(cell) % acc.vstride, Count(row[cell]));
        } else {
            for (std::size_t cell = 0; cell < row.size(); ++cell)
                if (row[cell] != 0) out.add(n, 0, static_cast<int>(cell) - n_max, Count(row[cell]));
        }
    }
    return out;
}

template <Variant V>
CountTable run_variant(int dim, int n_max, WalkClass cls, const EnumerateOptions& opt) {
    bool bignum;
    switch (opt.arithmetic) {
        case 1: bignum = false; break;
        case 2: bignum = true; break;
        default: bignum = predict_overflow(dim, n_max); break;
    }
    if (bignum) return table_from_accum(run_engine<V, Count>(dim, n_max, opt), dim, cls, n_max);
    return table_from_accum(run_engine<V, std::uint64_t>(dim, n_max, opt), dim, cls, n_max);
}

}  // namespace enum_detail

// Exact joint count table for the class. For class plane, `d` is the plane's
// own dimension (the table holds c_n^{(d)} at cells (n, n, 0)).
inline CountTable enumerate(int d, int n_max, WalkClass cls, const EnumerateOptions& opt = {}) {
    using enum_detail::Variant;
    const int min_d = cls == WalkClass::plane ? 1 : 2;
    if (d < min_d || d > kMaxDim) throw DomainError("enumerate: dimension out of range");
    if (n_max < 0) throw DomainError("enumerate: n_max must be >= 0");
    if (opt.split_depth < 0) throw DomainError("enumerate: split_depth must be >= 0");
    if (opt.symmetry) {
        if (cls == WalkClass::positive_unfolded)
            throw DomainError("enumerate: symmetry reduction is invalid for unfolded classes");
        if (d < 2) throw DomainError("enumerate: symmetry reduction needs d >= 2");
    }

    switch (cls) {
        case WalkClass::positive:
            return enum_detail::run_variant<Variant::pos>(d, n_max, cls, opt);
        case WalkClass::positive_unfolded: {
            CountTable t = enum_detail::run_variant<Variant::pos_unf>(d, n_max, cls, opt);
            // The -x single step lives off the x >= 0 board but is unfolded by
            // the vacuous n <= 1 convention.
            if (n_max >= 1) t.add(1, 1, 0, 1);
            return t;
        }
        case WalkClass::full_lattice:
            return enum_detail::run_variant<Variant::full>(d, n_max, cls, opt);
        case WalkClass::plane: {
            const CountTable full = enum_detail::run_variant<Variant::full>(d, n_max, cls, opt);
            CountTable t(d, WalkClass::plane, n_max);
            for (int n = 0; n <= n_max; ++n) t.add(n, n, 0, full.level_total(n));
            return t;
        }
    }
    throw DomainError("enumerate: unknown class");
}

// x-unfolded walks of the full d-dimensional lattice, totals per length
// (used by the concatenation inequality; not a public walk class). The n=1
// total includes the vacuously unfolded -x step.
inline std::vector<Count> enumerate_unfolded_totals(int d, int n_max,
                                                    const EnumerateOptions& opt = {}) {
    if (d < 1 || d > kMaxDim) throw DomainError("dimension out of range");
    if (n_max < 0) throw DomainError("n_max must be >= 0");
    EnumerateOptions o = opt;
    o.symmetry = false;
    const CountTable t =
        enum_detail::run_variant<enum_detail::Variant::full_unf>(d, n_max, WalkClass::full_lattice, o);
    std::vector<Count> totals(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) totals[static_cast<std::size_t>(n)] = t.level_total(n);
    if (n_max >= 1) totals[1] += 1;
    return totals;
}

}  // namespace sawpull
