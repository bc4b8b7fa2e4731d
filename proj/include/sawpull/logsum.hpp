#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "sawpull/counts.hpp"
#include "sawpull/errors.hpp"

namespace sawpull {

inline constexpr double kMinusInf = -std::numeric_limits<double>::infinity();

// log of an exact count. Counts can exceed the double range; the top 63 bits
// carry all the precision a double can hold anyway.
inline double log_count(const Count& c) {
    if (c < 0) throw DomainError("log of a negative count");
    if (c == 0) return kMinusInf;
    static const Count u64_max(std::numeric_limits<std::uint64_t>::max());
    if (c <= u64_max) return std::log(c.convert_to<double>());
    const unsigned bits = boost::multiprecision::msb(c);
    const unsigned shift = bits - 62;
    const Count top = c >> shift;
    return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

// Max-shift log(sum of exp(term)). Empty input or all minus-infinity terms
// give the minus-infinity sentinel.
inline double log_sum_exp(const std::vector<double>& terms) {
    double m = kMinusInf;
    for (double t : terms) m = std::max(m, t);
    if (!(m > kMinusInf)) return kMinusInf;
    long double s = 0.0L;
    for (double t : terms)
        if (t > kMinusInf) s += std::exp(static_cast<long double>(t) - m);
    return m + static_cast<double>(std::log(s));
}

}  // namespace sawpull
