#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <functional>
#include <vector>

#include "sawpull/geometry.hpp"

using namespace sawpull;

namespace {

// Local exhaustive walk generator for property tests (kept independent of the
// enumeration engine on purpose).
void all_walks(int dim, int n_max, const std::function<void(const Walk&)>& visit) {
    Walk w;
    w.dim = dim;
    w.vertices.push_back(origin_point());
    const auto steps = step_set(dim);
    std::function<void()> rec = [&] {
        visit(w);
        if (w.length() == n_max) return;
        for (const Step& s : steps) {
            Point cand = w.vertices.back();
            cand[static_cast<std::size_t>(s.axis)] += s.dir;
            if (std::find(w.vertices.begin(), w.vertices.end(), cand) != w.vertices.end())
                continue;
            w.vertices.push_back(cand);
            rec();
            w.vertices.pop_back();
        }
    };
    rec();
}

Point pt2(int x, int z) {
    Point p{};
    p[0] = x;
    p[1] = z;
    return p;
}

}  // namespace

TEST_CASE("is_self_avoiding on hand examples") {
    CHECK(is_self_avoiding({pt2(0, 0), pt2(1, 0)}));
    CHECK_FALSE(is_self_avoiding({pt2(0, 0), pt2(0, 1), pt2(0, 0)}));
    CHECK(is_self_avoiding({pt2(0, 0), pt2(1, 0), pt2(1, 1), pt2(0, 1)}));
    CHECK_THROWS_AS(is_self_avoiding({pt2(0, 0), pt2(2, 0)}), MalformedWalkError);
    CHECK_THROWS_AS(is_self_avoiding({pt2(0, 0), pt2(1, 1)}), MalformedWalkError);
    CHECK_THROWS_AS(is_self_avoiding({}), MalformedWalkError);
}

TEST_CASE("classify hand examples") {
    {
        const WalkFeatures f = classify(walk_from_string("E"));
        CHECK(f.positive);
        CHECK(f.visits == 1);
        CHECK(f.height == 0);
        CHECK(f.loop);
        CHECK_FALSE(f.tail);
        CHECK(f.unfolded_x);
    }
    {
        const WalkFeatures f = classify(walk_from_string("NE"));
        CHECK(f.positive);
        CHECK(f.visits == 0);
        CHECK(f.height == 1);
        CHECK(f.tail);
        CHECK_FALSE(f.loop);
    }
    {
        const WalkFeatures f = classify(walk_from_string("S"));
        CHECK_FALSE(f.positive);
        CHECK(f.height == -1);
        CHECK_FALSE(f.loop);
        CHECK_FALSE(f.tail);
    }
    {
        // Vertical rod: interior test 0 <= x_i < x_n fails (x_n = 0).
        const WalkFeatures f = classify(walk_from_string("NN"));
        CHECK_FALSE(f.unfolded_x);
        CHECK(f.tail);
    }
    {
        // n <= 1 is vacuously unfolded, including the -x step.
        CHECK(classify(walk_from_string("W")).unfolded_x);
        CHECK(classify(walk_from_string("N")).unfolded_x);
    }
    {
        const Walk w = walk_from_string("SEN");
        const WalkFeatures f = classify(w);
        CHECK_FALSE(f.positive);
        CHECK(f.visits == 1);  // counted regardless of positivity
        CHECK(f.height == 0);
        CHECK_FALSE(f.loop);  // loop requires positivity
    }
    CHECK_THROWS_AS(classify(Walk{2, {pt2(1, 0), pt2(0, 0)}}), MalformedWalkError);
}

TEST_CASE("empty walk is loop and tail") {
    const Walk w{2, {pt2(0, 0)}};
    const WalkFeatures f = classify(w);
    CHECK(f.positive);
    CHECK(f.visits == 0);
    CHECK(f.height == 0);
    CHECK(f.loop);
    CHECK(f.tail);
    CHECK(f.unfolded_x);
}

TEST_CASE("classify invariant under signed permutations of non-z axes") {
    // d=3: exchange/negate axes 0 and 1; z (axis 2) untouched.
    const std::vector<std::array<std::pair<int, int>, 2>> maps = {
        {{{1, +1}, {0, +1}}},   // swap x,y
        {{{0, -1}, {1, +1}}},   // negate x
        {{{1, -1}, {0, -1}}},   // swap and negate both
    };
    all_walks(3, 4, [&](const Walk& w) {
        const WalkFeatures base = classify(w);
        for (const auto& m : maps) {
            Walk t = w;
            for (auto& p : t.vertices) {
                const Point q = p;
                Point r{};
                r[2] = q[2];
                for (int a = 0; a < 2; ++a)
                    r[static_cast<std::size_t>(m[static_cast<std::size_t>(a)].first)] =
                        m[static_cast<std::size_t>(a)].second * q[static_cast<std::size_t>(a)];
                p = r;
            }
            const WalkFeatures f = classify(t);
            CHECK(f.positive == base.positive);
            CHECK(f.visits == base.visits);
            CHECK(f.height == base.height);
            CHECK(f.loop == base.loop);
            CHECK(f.tail == base.tail);
        }
    });
}

TEST_CASE("tail implies first step is +z") {
    all_walks(2, 6, [&](const Walk& w) {
        if (w.length() < 1) return;
        const WalkFeatures f = classify(w);
        if (!f.positive || !f.tail) return;
        CHECK(w.vertices[1] == pt2(0, 1));
    });
}

TEST_CASE("loop reversal preserves loop status and visits") {
    all_walks(2, 6, [&](const Walk& w) {
        const WalkFeatures f = classify(w);
        if (!f.positive || !f.loop || w.length() == 0) return;
        Walk r;
        r.dim = w.dim;
        const Point last = w.vertices.back();
        for (auto it = w.vertices.rbegin(); it != w.vertices.rend(); ++it) {
            Point p = *it;
            for (int a = 0; a < w.dim; ++a)
                p[static_cast<std::size_t>(a)] -= last[static_cast<std::size_t>(a)];
            r.vertices.push_back(p);
        }
        const WalkFeatures g = classify(r);
        CHECK(g.loop);
        CHECK(g.visits == f.visits);
    });
}

TEST_CASE("walk class names round-trip") {
    for (WalkClass c : {WalkClass::positive, WalkClass::positive_unfolded,
                        WalkClass::full_lattice, WalkClass::plane})
        CHECK(walk_class_from_string(to_string(c)) == c);
    CHECK_THROWS_AS(walk_class_from_string("bogus"), DomainError);
}
