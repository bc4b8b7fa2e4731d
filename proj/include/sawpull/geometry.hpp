#pragma once

#include <array>
#include <cstdlib>
#include <string>
#include <vector>

#include "sawpull/errors.hpp"

namespace sawpull {

inline constexpr int kMaxDim = 6;

// Lattice point; unused trailing coordinates stay zero so Point compares
// independently of the configured dimension. Coordinate 0 is the unfolding
// coordinate x, coordinate dim-1 is the height coordinate z.
using Point = std::array<int, kMaxDim>;

inline constexpr Point origin_point() { return Point{}; }

struct Walk {
    int dim = 2;
    std::vector<Point> vertices;  // vertices[0] is the origin

    int length() const { return static_cast<int>(vertices.size()) - 1; }
};

enum class WalkClass { positive, positive_unfolded, full_lattice, plane };

inline const char* to_string(WalkClass c) {
    switch (c) {
        case WalkClass::positive: return "positive";
        case WalkClass::positive_unfolded: return "positive-unfolded";
        case WalkClass::full_lattice: return "full-lattice";
        case WalkClass::plane: return "plane";
    }
    return "?";
}

inline WalkClass walk_class_from_string(const std::string& s) {
    if (s == "positive") return WalkClass::positive;
    if (s == "positive-unfolded") return WalkClass::positive_unfolded;
    if (s == "full-lattice") return WalkClass::full_lattice;
    if (s == "plane") return WalkClass::plane;
    throw DomainError("unknown walk class '" + s + "'");
}

struct WalkFeatures {
    bool positive = false;
    int visits = 0;   // non-origin vertices with z = 0
    int height = 0;   // z of the last vertex, signed
    bool loop = false;
    bool tail = false;
    bool unfolded_x = false;
};

// The step set shared by the enumeration engine and the oracle: 2*dim unit
// steps, axis-major with + before -.
struct Step {
    int axis;
    int dir;  // +1 or -1
};

inline std::vector<Step> step_set(int dim) {
    if (dim < 1 || dim > kMaxDim) throw DomainError("dimension out of range");
    std::vector<Step> s;
    s.reserve(2 * static_cast<std::size_t>(dim));
    for (int axis = 0; axis < dim; ++axis) {
        s.push_back({axis, +1});
        s.push_back({axis, -1});
    }
    return s;
}

// True iff all points are pairwise distinct. Steps must be unit steps;
// anything else is a malformed walk, not a value of this predicate.
inline bool is_self_avoiding(const std::vector<Point>& vertices) {
    if (vertices.empty()) throw MalformedWalkError("empty vertex sequence");
    for (std::size_t i = 1; i < vertices.size(); ++i) {
        int l1 = 0;
        for (int c = 0; c < kMaxDim; ++c) l1 += std::abs(vertices[i][c] - vertices[i - 1][c]);
        if (l1 != 1) throw MalformedWalkError("non-unit step at index " + std::to_string(i));
    }
    for (std::size_t i = 0; i < vertices.size(); ++i)
        for (std::size_t j = i + 1; j < vertices.size(); ++j)
            if (vertices[i] == vertices[j]) return false;
    return true;
}

// Classifies a walk. The walk must satisfy the Walk invariants (origin start,
// unit steps, self-avoiding); violations raise MalformedWalkError.
inline WalkFeatures classify(const Walk& w) {
    if (w.dim < 2 || w.dim > kMaxDim) throw DomainError("walk dimension out of range");
    if (w.vertices.empty() || w.vertices.front() != origin_point())
        throw MalformedWalkError("walk must start at the origin");
    if (!is_self_avoiding(w.vertices)) throw MalformedWalkError("walk is not self-avoiding");

    const int n = w.length();
    const int zc = w.dim - 1;
    WalkFeatures f;
    f.positive = true;
    for (int i = 0; i <= n; ++i) {
        const int z = w.vertices[static_cast<std::size_t>(i)][zc];
        if (z < 0) f.positive = false;
        if (i >= 1 && z == 0) ++f.visits;
    }
    f.height = w.vertices.back()[zc];
    f.loop = f.positive && f.height == 0;
    f.tail = f.positive && f.visits == 0;

    // Hammersley-Welsh condition 0 <= x_i < x_n on interior vertices; vacuous
    // for n <= 1 by convention.
    f.unfolded_x = true;
    if (n >= 2) {
        const int xn = w.vertices.back()[0];
        for (int i = 1; i < n && f.unfolded_x; ++i) {
            const int xi = w.vertices[static_cast<std::size_t>(i)][0];
            if (!(0 <= xi && xi < xn)) f.unfolded_x = false;
        }
    }
    return f;
}

inline Walk walk_from_steps(int dim, const std::vector<Step>& steps) {
    Walk w;
    w.dim = dim;
    w.vertices.push_back(origin_point());
    for (const Step& s : steps) {
        if (s.axis < 0 || s.axis >= dim || (s.dir != 1 && s.dir != -1))
            throw MalformedWalkError("bad step");
        Point p = w.vertices.back();
        p[static_cast<std::size_t>(s.axis)] += s.dir;
        w.vertices.push_back(p);
    }
    return w;
}

// d=2 helper for tests: E/W move along x, N/S along z.
inline Walk walk_from_string(const std::string& s) {
    std::vector<Step> steps;
    for (char c : s) {
        switch (c) {
            case 'E': steps.push_back({0, +1}); break;
            case 'W': steps.push_back({0, -1}); break;
            case 'N': steps.push_back({1, +1}); break;
            case 'S': steps.push_back({1, -1}); break;
            default: throw MalformedWalkError(std::string("bad step letter '") + c + "'");
        }
    }
    return walk_from_steps(2, steps);
}

}  // namespace sawpull
