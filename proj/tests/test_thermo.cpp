#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "sawpull/enumerate.hpp"
#include "sawpull/extrapolate.hpp"
#include "sawpull/logsum.hpp"
#include "sawpull/partition.hpp"

#include <boost/multiprecision/cpp_int.hpp>

using namespace sawpull;
using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;
using Catch::Approx;

namespace {

const CountTable& pos2_16() {
    static const CountTable t = enumerate(2, 16, WalkClass::positive);
    return t;
}

const CountTable& full2_16() {
    static const CountTable t = enumerate(2, 16, WalkClass::full_lattice);
    return t;
}

const CountTable& plane1_12() {
    static const CountTable t = enumerate(1, 12, WalkClass::plane);
    return t;
}

const CountTable& plane2_6() {
    static const CountTable t = enumerate(2, 6, WalkClass::plane);
    return t;
}

}  // namespace

TEST_CASE("log_count handles small, large, and degenerate counts") {
    REQUIRE(log_count(Count(1)) == 0.0);
    REQUIRE(log_count(Count(7)) == Approx(std::log(7.0)).epsilon(1e-14));
    REQUIRE(std::isinf(log_count(Count(0))));
    REQUIRE(log_count(Count(0)) < 0);
    const Count big = Count(1) << 200;
    REQUIRE(log_count(big) == Approx(200.0 * std::log(2.0)).epsilon(1e-12));
    const Count big2 = (Count(1) << 200) + (Count(1) << 199);
    REQUIRE(log_count(big2) == Approx(200.0 * std::log(2.0) + std::log(1.5)).epsilon(1e-12));
    REQUIRE_THROWS_AS(log_count(Count(-3)), DomainError);
}

TEST_CASE("log_sum_exp is stable and honours the empty sentinel") {
    REQUIRE(std::isinf(log_sum_exp({})));
    REQUIRE(std::isinf(log_sum_exp({kMinusInf, kMinusInf})));
    REQUIRE(log_sum_exp({0.0, kMinusInf}) == Approx(0.0).margin(1e-15));
    REQUIRE(log_sum_exp({std::log(2.0), std::log(3.0)}) == Approx(std::log(5.0)).epsilon(1e-14));
    // enormous shifts must not overflow
    REQUIRE(log_sum_exp({1000.0, 1000.0}) == Approx(1000.0 + std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("evaluate_partition reproduces the length-2 sums") {
    const CountTable& t = pos2_16();
    REQUIRE(evaluate_partition(t, {1.0, 1.0}, 2, PartitionKind::C) ==
            Approx(std::log(7.0)).epsilon(1e-13));
    REQUIRE(evaluate_partition(t, {1.0, 2.0}, 2, PartitionKind::T) ==
            Approx(std::log(8.0)).epsilon(1e-13));
    REQUIRE(evaluate_partition(t, {3.0, 1.0}, 2, PartitionKind::L) ==
            Approx(std::log(18.0)).epsilon(1e-13));
    // n = 0: the empty walk contributes a single weight-1 term in every kind
    REQUIRE(evaluate_partition(t, {5.0, 9.0}, 0, PartitionKind::C) == Approx(0.0).margin(1e-15));
    REQUIRE(evaluate_partition(t, {5.0, 9.0}, 0, PartitionKind::L) == Approx(0.0).margin(1e-15));
    REQUIRE(evaluate_partition(t, {5.0, 9.0}, 0, PartitionKind::T) == Approx(0.0).margin(1e-15));
}

TEST_CASE("evaluate_partition matches an exact rational evaluation at n=12") {
    const CountTable& t = pos2_16();
    const int n = 12;
    // a = 3/2, y = 2: every term is count * 3^v * 2^h / 2^v
    cpp_rational q = 0;
    for (auto it = t.level_begin(n); it != t.level_end(n); ++it) {
        const CellKey& k = it->first;
        const cpp_int num = it->second * boost::multiprecision::pow(cpp_int(3), k.v) *
                            boost::multiprecision::pow(cpp_int(2), k.h);
        q += cpp_rational(num, boost::multiprecision::pow(cpp_int(2), k.v));
    }
    const double exact = q.convert_to<double>();
    const double lz = evaluate_partition(t, {1.5, 2.0}, n, PartitionKind::C);
    REQUIRE(std::exp(lz) == Approx(exact).epsilon(1e-10));
}

TEST_CASE("empty restricted slices give the minus-infinity sentinel") {
    const CountTable& t = plane2_6();
    // plane walks of length n have v = n, so the T slice is empty for n >= 1
    const double lz = evaluate_partition(t, {1.0, 1.0}, 2, PartitionKind::T);
    REQUIRE(std::isinf(lz));
    REQUIRE(lz < 0);
    REQUIRE_THROWS_AS(moment(t, {1.0, 1.0}, 2, Observable::visits, 2, PartitionKind::T),
                      DomainError);
}

TEST_CASE("evaluate_partition validates its arguments") {
    const CountTable& t = pos2_16();
    REQUIRE_THROWS_AS(evaluate_partition(t, {1.0, 1.0}, 17, PartitionKind::C), DomainError);
    REQUIRE_THROWS_AS(evaluate_partition(t, {1.0, 1.0}, -1, PartitionKind::C), DomainError);
    REQUIRE_THROWS_AS(evaluate_partition(t, {0.0, 1.0}, 2, PartitionKind::C), DomainError);
    REQUIRE_THROWS_AS(evaluate_partition(t, {-2.0, 1.0}, 2, PartitionKind::C), DomainError);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(evaluate_partition(t, {1.0, nan}, 2, PartitionKind::C), DomainError);
    REQUIRE_THROWS_AS(moment(t, {1.0, 1.0}, 2, Observable::visits, 3), DomainError);
}

TEST_CASE("moments at n=2 match the exact distribution") {
    const CountTable& t = pos2_16();
    const MomentReport mv = moment(t, {1.0, 1.0}, 2, Observable::visits);
    REQUIRE(mv.mean == Approx(6.0 / 7.0).epsilon(1e-13));
    REQUIRE(mv.variance == Approx(34.0 / 49.0).epsilon(1e-12));
    // height distribution at n=2: (0*2 + 1*2 + 1*2 + 2*1)/7
    const MomentReport mh = moment(t, {1.0, 1.0}, 2, Observable::height);
    REQUIRE(mh.mean == Approx(6.0 / 7.0).epsilon(1e-13));
    REQUIRE(mh.variance == Approx(20.0 / 49.0).epsilon(1e-12));
}

TEST_CASE("visits mean saturates at the maximal visit count for huge a") {
    const CountTable& t = pos2_16();
    const int n = 8;
    int vmax = 0;
    for (auto it = t.level_begin(n); it != t.level_end(n); ++it)
        vmax = std::max(vmax, it->first.v);
    REQUIRE(vmax == n);
    const MomentReport m = moment(t, {1e6, 1.0}, n, Observable::visits, 1);
    REQUIRE(m.mean <= vmax + 1e-12);
    REQUIRE(m.mean == Approx(static_cast<double>(vmax)).margin(1e-4));
}

TEST_CASE("finite-difference derivatives of log C match the moments") {
    const CountTable& t = pos2_16();
    const double a = 1.3, y = 1.7, step = 1e-4;
    for (int n : {4, 7, 10}) {
        const double u = std::log(a), w = std::log(y);
        const double fdu = (evaluate_partition(t, {std::exp(u + step), y}, n, PartitionKind::C) -
                            evaluate_partition(t, {std::exp(u - step), y}, n, PartitionKind::C)) /
                           (2 * step);
        const double fdw = (evaluate_partition(t, {a, std::exp(w + step)}, n, PartitionKind::C) -
                            evaluate_partition(t, {a, std::exp(w - step)}, n, PartitionKind::C)) /
                           (2 * step);
        const double mv = moment(t, {a, y}, n, Observable::visits, 1).mean;
        const double mh = moment(t, {a, y}, n, Observable::height, 1).mean;
        REQUIRE(std::abs(fdu - mv) <= 1e-6 * std::max(1.0, std::abs(mv)));
        REQUIRE(std::abs(fdw - mh) <= 1e-6 * std::max(1.0, std::abs(mh)));
    }
}

TEST_CASE("log C_n is convex and monotone in (log a, log y)") {
    const CountTable& t = pos2_16();
    const std::vector<double> g = log_grid(-1.0, 0.5, 1.5);
    auto f = [&](int n, double u, double w) {
        return evaluate_partition(t, {std::exp(u), std::exp(w)}, n, PartitionKind::C);
    };
    for (int n = 1; n <= 10; ++n) {
        for (std::size_t i = 0; i + 2 < g.size(); ++i) {
            for (std::size_t j = 0; j < g.size(); ++j) {
                // along u, along w, and along the diagonal
                REQUIRE(f(n, g[i + 1], g[j]) <= (f(n, g[i], g[j]) + f(n, g[i + 2], g[j])) / 2 +
                                                    1e-10);
                REQUIRE(f(n, g[j], g[i + 1]) <= (f(n, g[j], g[i]) + f(n, g[j], g[i + 2])) / 2 +
                                                    1e-10);
            }
            if (i + 2 < g.size())
                REQUIRE(f(n, g[i + 1], g[i + 1]) <=
                        (f(n, g[i], g[i]) + f(n, g[i + 2], g[i + 2])) / 2 + 1e-10);
        }
        for (std::size_t i = 0; i + 1 < g.size(); ++i) {
            REQUIRE(f(n, g[i], 0.0) <= f(n, g[i + 1], 0.0) + 1e-12);
            REQUIRE(f(n, 0.0, g[i]) <= f(n, 0.0, g[i + 1]) + 1e-12);
        }
    }
}

TEST_CASE("structural bounds: loops dominate plane walks, tails dominate rods") {
    const CountTable& t = pos2_16();
    const CountTable& p = plane1_12();
    for (double u : {-1.0, 0.0, 1.0, 2.0, 3.0}) {
        for (int n = 1; n <= 12; ++n) {
            const double lhs = log_count(p.level_total(n)) + n * u;
            const double rhs = evaluate_partition(t, {std::exp(u), 1.0}, n, PartitionKind::L);
            REQUIRE(rhs >= lhs - 1e-9);
            const double tn = evaluate_partition(t, {1.0, std::exp(u)}, n, PartitionKind::T);
            REQUIRE(tn >= n * u - 1e-9);
        }
        // d=2 equality at n=2: both sides are 2a^2
        const double lhs2 = log_count(p.level_total(2)) + 2 * u;
        const double rhs2 = evaluate_partition(t, {std::exp(u), 1.0}, 2, PartitionKind::L);
        REQUIRE(rhs2 == Approx(lhs2).margin(1e-12));
    }
}

TEST_CASE("extrapolate recovers exact models") {
    std::vector<double> constant(12, 2.5);
    const LimitValue c = extrapolate(constant);
    REQUIRE(c.value == Approx(2.5).epsilon(1e-13));
    REQUIRE(c.half_width <= 1e-9);

    // 1 + 1/n given only for n = 10..20; earlier entries are unusable
    std::vector<double> vs(20, std::numeric_limits<double>::quiet_NaN());
    for (int n = 10; n <= 20; ++n) vs[n - 1] = 1.0 + 1.0 / n;
    const LimitValue m = extrapolate(vs);
    REQUIRE(m.value == Approx(1.0).margin(1e-9));
    // the exact limit is recovered, but the half-width stays honest: it is the
    // worst distance between the limit and the window data (window is n=15..20)
    REQUIRE(m.half_width == Approx(1.0 / 15.0).epsilon(1e-9));

    std::vector<double> few(5, 1.0);
    REQUIRE_THROWS_AS(extrapolate(few), ExtrapolationError);
    std::vector<double> none(10, std::numeric_limits<double>::quiet_NaN());
    REQUIRE_THROWS_AS(extrapolate(none), ExtrapolationError);
}

TEST_CASE("free_energy_curve exposes values and limit estimates") {
    const CountTable& t = pos2_16();
    const FreeEnergyCurve c =
        free_energy_curve(t, {{1.0, 1.0}, {0.8, 1.0}}, PartitionKind::C);
    REQUIRE(c.n_max == 16);
    REQUIRE(c.value(0, 2) == Approx(0.5 * std::log(7.0)).epsilon(1e-13));
    const LimitValue kappa = c.limit(0);
    REQUIRE(kappa.half_width >= 0.0);
    REQUIRE(kappa.value > std::log(2.0));
    REQUIRE(kappa.value < std::log(3.0));
    REQUIRE_THROWS_AS(c.value(0, 17), DomainError);
    REQUIRE_THROWS_AS(c.limit(2), ExtrapolationError);
    REQUIRE_THROWS_AS(free_energy_curve(enumerate(2, 3, WalkClass::positive), {{1.0, 1.0}},
                                        PartitionKind::C),
                      DomainError);
}

TEST_CASE("loop and tail free energies agree with kappa where theory says so") {
    const CountTable& t = pos2_16();
    // at a <= 1 the loop free energy and kappa(a, 1) share the same limit
    const FreeEnergyCurve lc = free_energy_curve(t, {{0.8, 1.0}}, PartitionKind::L);
    const FreeEnergyCurve cc = free_energy_curve(t, {{0.8, 1.0}}, PartitionKind::C);
    const LimitValue ll = lc.limit(0), lcfull = cc.limit(0);
    REQUIRE(std::abs(ll.value - lcfull.value) <= ll.half_width + lcfull.half_width);

    // tails at y=1 and full-lattice counts both estimate log mu_2
    const FreeEnergyCurve tc = free_energy_curve(t, {{1.0, 1.0}}, PartitionKind::T);
    const FreeEnergyCurve fc = free_energy_curve(full2_16(), {{1.0, 1.0}}, PartitionKind::C);
    const LimitValue lt = tc.limit(0), lf = fc.limit(0);
    REQUIRE(std::abs(lt.value - lf.value) <= lt.half_width + lf.half_width);
}

TEST_CASE("log_grid builds inclusive arithmetic grids") {
    const std::vector<double> g = log_grid(-1.0, 0.1, 3.0);
    REQUIRE(g.size() == 41);
    REQUIRE(g.front() == Approx(-1.0).margin(1e-15));
    REQUIRE(g.back() == 3.0);
    for (std::size_t i = 0; i + 1 < g.size(); ++i)
        REQUIRE(g[i + 1] - g[i] == Approx(0.1).margin(1e-9));
    REQUIRE(log_grid(2.0, 0.5, 2.0).size() == 1);
    REQUIRE_THROWS_AS(log_grid(0.0, 0.3, 1.0), DomainError);
    REQUIRE_THROWS_AS(log_grid(0.0, -0.1, 1.0), DomainError);
    REQUIRE_THROWS_AS(log_grid(1.0, 0.1, 0.0), DomainError);
}
