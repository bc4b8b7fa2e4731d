#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <climits>
#include <compare>
#include <map>
#include <string>
#include <vector>

#include "sawpull/errors.hpp"
#include "sawpull/geometry.hpp"

namespace sawpull {

// Exact count; tables store arbitrary precision regardless of which engine
// accumulated them.
using Count = boost::multiprecision::cpp_int;

struct CellKey {
    int n;
    int v;
    int h;
    friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

// Joint (v, h) count table for every length 0..n_max of one walk class.
// Conventions: n=0 holds {(0,0): 1}; full-lattice records cells (0, z_n);
// plane records (n, 0). Immutable in practice once an enumeration returns it.
class CountTable {
public:
    CountTable(int dim, WalkClass cls, int n_max) : dim_(dim), cls_(cls), n_max_(n_max) {
        if (n_max < 0) throw DomainError("n_max must be >= 0");
    }

    int dimension() const { return dim_; }
    WalkClass walk_class() const { return cls_; }
    int n_max() const { return n_max_; }

    const std::map<CellKey, Count>& cells() const { return cells_; }

    Count at(int n, int v, int h) const {
        auto it = cells_.find(CellKey{n, v, h});
        return it == cells_.end() ? Count(0) : it->second;
    }

    void add(int n, int v, int h, const Count& c) {
        if (n < 0 || n > n_max_) throw DomainError("cell length outside table range");
        if (c < 0) throw DomainError("negative count");
        if (c == 0) return;
        cells_[CellKey{n, v, h}] += c;
    }

    // Iterator range over the cells of one length (map order is (n, v, h)).
    auto level_begin(int n) const { return cells_.lower_bound(CellKey{n, INT_MIN, INT_MIN}); }
    auto level_end(int n) const { return cells_.lower_bound(CellKey{n + 1, INT_MIN, INT_MIN}); }

    Count level_total(int n) const {
        Count t = 0;
        for (auto it = level_begin(n); it != level_end(n); ++it) t += it->second;
        return t;
    }

    friend bool operator==(const CountTable&, const CountTable&) = default;

private:
    int dim_;
    WalkClass cls_;
    int n_max_;
    std::map<CellKey, Count> cells_;
};

// h=0 slice per length: l_n(v). Only meaningful for the positive classes.
inline std::vector<std::map<int, Count>> derive_loops(const CountTable& t) {
    if (t.walk_class() != WalkClass::positive && t.walk_class() != WalkClass::positive_unfolded)
        throw ClassMismatchError(std::string("derive_loops expects a positive class, got ") +
                                 to_string(t.walk_class()));
    std::vector<std::map<int, Count>> loops(static_cast<std::size_t>(t.n_max()) + 1);
    for (const auto& [key, c] : t.cells())
        if (key.h == 0) loops[static_cast<std::size_t>(key.n)][key.v] = c;
    return loops;
}

}  // namespace sawpull
