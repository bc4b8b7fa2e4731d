#pragma once

#include <cmath>
#include <vector>

#include "sawpull/counts.hpp"
#include "sawpull/errors.hpp"
#include "sawpull/extrapolate.hpp"
#include "sawpull/logsum.hpp"
#include "sawpull/partition.hpp"

namespace sawpull {

// Extrapolated model inputs for phase analysis: a positive-walk partition
// source for kappa/lambda evaluation plus in-run growth-constant estimates.
struct ModelCurves {
    const PartitionSource* positive = nullptr;
    int dim = 0;
    LimitValue log_mu_d;
    LimitValue log_mu_dm1;

    // kappa-hat(a): extrapolated (1/n) log C_n(a, 1)
    LimitValue kappa_at(double a) const {
        if (!positive) throw DomainError("model curves missing the positive source");
        if (!(a > 0) || !std::isfinite(a)) throw DomainError("kappa_at needs finite a > 0");
        std::vector<double> vs;
        vs.reserve(static_cast<std::size_t>(positive->n_max()));
        for (int n = 1; n <= positive->n_max(); ++n)
            vs.push_back(positive->log_partition({a, 1.0}, n, PartitionKind::C) / n);
        return extrapolate(vs);
    }

    // lambda-hat(y): extrapolated (1/n) log C_n(1, y); equals the tail free
    // energy in the limit since kappa(1, y) = max[log mu_d, lambda(y)]
    LimitValue lambda_at(double y) const {
        if (!positive) throw DomainError("model curves missing the positive source");
        if (!(y > 0) || !std::isfinite(y)) throw DomainError("lambda_at needs finite y > 0");
        std::vector<double> vs;
        vs.reserve(static_cast<std::size_t>(positive->n_max()));
        for (int n = 1; n <= positive->n_max(); ++n)
            vs.push_back(positive->log_partition({1.0, y}, n, PartitionKind::C) / n);
        return extrapolate(vs);
    }
};

// Growth-constant estimate from a table's level totals.
inline LimitValue growth_constant(const CountTable& table) {
    std::vector<double> vs;
    vs.reserve(static_cast<std::size_t>(table.n_max()));
    for (int n = 1; n <= table.n_max(); ++n) vs.push_back(log_count(table.level_total(n)) / n);
    return extrapolate(vs);
}

// Assemble curves from a positive source plus full-lattice and plane tables
// enumerated in the same run. The plane table lives in dimension d-1.
inline ModelCurves build_model_curves(const PartitionSource& positive, const CountTable& full,
                                      const CountTable& plane) {
    if (full.walk_class() != WalkClass::full_lattice)
        throw ClassMismatchError("build_model_curves expects a full-lattice table");
    if (plane.walk_class() != WalkClass::plane)
        throw ClassMismatchError("build_model_curves expects a plane table");
    if (full.dimension() != positive.dim())
        throw ClassMismatchError("full-lattice table dimension differs from the positive source");
    if (plane.dimension() != positive.dim() - 1)
        throw ClassMismatchError("plane table must live in dimension d-1");
    ModelCurves c;
    c.positive = &positive;
    c.dim = positive.dim();
    c.log_mu_d = growth_constant(full);
    c.log_mu_dm1 = growth_constant(plane);
    return c;
}

}  // namespace sawpull
