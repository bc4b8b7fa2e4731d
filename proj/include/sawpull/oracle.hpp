#pragma once

#include <string>
#include <vector>

#include "sawpull/counts.hpp"
#include "sawpull/errors.hpp"
#include "sawpull/geometry.hpp"

namespace sawpull {

// Naive reference enumerator. Deliberately shares nothing with the main
// engine beyond the step set: plain vertex vectors, a fresh linear
// self-avoidance scan per extension, feature computation by rescanning the
// whole prefix, no occupancy structures, no pruning beyond self-avoidance
// itself, no parallelism. Slow and obviously correct.
namespace oracle_detail {

inline bool extendable(const std::vector<Point>& prefix, const Point& cand) {
    for (const Point& p : prefix)
        if (p == cand) return false;
    return true;
}

struct Features {
    bool positive;
    int visits;
    int height;
    bool unfolded;
};

inline Features scan(const std::vector<Point>& prefix, int dim) {
    const int n = static_cast<int>(prefix.size()) - 1;
    const int zc = dim - 1;
    Features f{true, 0, prefix.back()[static_cast<std::size_t>(zc)], true};
    for (int i = 0; i <= n; ++i) {
        const int z = prefix[static_cast<std::size_t>(i)][static_cast<std::size_t>(zc)];
        if (z < 0) f.positive = false;
        if (i >= 1 && z == 0) ++f.visits;
    }
    if (n >= 2) {
        const int xn = prefix.back()[0];
        for (int i = 1; i < n; ++i) {
            const int xi = prefix[static_cast<std::size_t>(i)][0];
            if (!(0 <= xi && xi < xn)) {
                f.unfolded = false;
                break;
            }
        }
    }
    return f;
}

inline void record(const std::vector<Point>& prefix, int dim, WalkClass cls, CountTable& out) {
    const int n = static_cast<int>(prefix.size()) - 1;
    const Features f = scan(prefix, dim);
    switch (cls) {
        case WalkClass::positive:
            if (f.positive) out.add(n, f.visits, f.height, 1);
            break;
        case WalkClass::positive_unfolded:
            if (f.positive && f.unfolded) out.add(n, f.visits, f.height, 1);
            break;
        case WalkClass::full_lattice:
            out.add(n, 0, f.height, 1);
            break;
        case WalkClass::plane:
            out.add(n, n, 0, 1);
            break;
    }
}

inline void recurse(std::vector<Point>& prefix, int dim, int n_max, WalkClass cls,
                    const std::vector<Step>& steps, CountTable& out) {
    record(prefix, dim, cls, out);
    if (static_cast<int>(prefix.size()) - 1 == n_max) return;
    for (const Step& s : steps) {
        Point cand = prefix.back();
        cand[static_cast<std::size_t>(s.axis)] += s.dir;
        if (!extendable(prefix, cand)) continue;
        prefix.push_back(cand);
        recurse(prefix, dim, n_max, cls, steps, out);
        prefix.pop_back();
    }
}

}  // namespace oracle_detail

// For class plane, `d` is the plane's own dimension (counts c_n^{(d)}).
inline CountTable oracle(int d, int n_max, WalkClass cls) {
    const int min_d = cls == WalkClass::plane ? 1 : 2;
    if (d < min_d || d > kMaxDim) throw DomainError("oracle: dimension out of range");
    if (n_max < 0) throw DomainError("oracle: n_max must be >= 0");
    CountTable out(d, cls, n_max);
    std::vector<Point> prefix{origin_point()};
    oracle_detail::recurse(prefix, d, n_max, cls, step_set(d), out);
    return out;
}

struct VerifyResult {
    bool ok = true;
    std::string first_mismatch;  // "(n,v,h): oracle=A table=B" for the smallest differing key
};

// Compares the oracle's counts at every length <= n against the table.
inline VerifyResult verify_oracle(int d, int n, WalkClass cls, const CountTable& table) {
    if (n > table.n_max()) throw DomainError("verify_oracle: n exceeds table n_max");
    const CountTable ref = oracle(d, n, cls);
    auto it = ref.cells().begin();
    auto jt = table.cells().begin();
    const auto iend = ref.cells().end();
    const auto jend = table.level_end(n);
    while (it != iend || jt != jend) {
        CellKey key{};
        Count a = 0, b = 0;
        bool adv_i = false, adv_j = false;
        if (jt == jend || (it != iend && it->first < jt->first)) {
            key = it->first;
            a = it->second;
            adv_i = true;
        } else if (it == iend || jt->first < it->first) {
            key = jt->first;
            b = jt->second;
            adv_j = true;
        } else {
            key = it->first;
            a = it->second;
            b = jt->second;
            adv_i = adv_j = true;
        }
        if (a != b) {
            VerifyResult r;
            r.ok = false;
            r.first_mismatch = "(" + std::to_string(key.n) + "," + std::to_string(key.v) + "," +
                               std::to_string(key.h) + "): oracle=" + a.str() +
                               " table=" + b.str();
            return r;
        }
        if (adv_i) ++it;
        if (adv_j) ++jt;
    }
    return {};
}

}  // namespace sawpull
