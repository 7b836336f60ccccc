#include "pirsense/gridopt.hpp"

#include <algorithm>
#include <limits>
#include <cmath>

#include "pirsense/errors.hpp"
#include "pirsense/parallel.hpp"
#include "pirsense/r2calc.hpp"

namespace pirsense {

using r2calc::f_of_r;
using r2calc::r_of_f;

namespace {

const double kNaN = std::nan("");

double lerp(double lo, double hi, int i, int n) {
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

void validate_grid(const GridParams& grid) {
    if (grid.n_a < 2 || grid.n_b < 2 || grid.n_g < 2)
        throw PreconditionViolated("grid sizes must be at least 2");
}

}  // namespace

double b_given_d(double a, double d, double c1) {
    const double denom = std::sqrt(1.0 - c1 * c1) * std::sqrt(1.0 - a * a);
    if (denom < 1e-12) throw DegenerateDenominator("recursion denominator vanishes");
    return (d - c1 * a) / denom;
}

double d_given_e(double a, double e, double c2, double c3, double c4) {
    const double denom = std::sqrt(1.0 - c4 * c4);
    if (denom < 1e-12) throw DegenerateDenominator("transfer denominator vanishes");
    const double inner = std::sqrt(1.0 - a * a * (1.0 - c3 * c3));
    return (c2 * a * std::sqrt(1.0 - c3 * c3) + e * std::sqrt(1.0 - c2 * c2) * inner) / denom;
}

double f_g_given_m(double a, double f_m, double c5) {
    const double denom = std::sqrt(1.0 - a * a);
    if (denom < 1e-12) throw DegenerateDenominator("|a| too close to 1");
    return (std::sqrt(1.0 - c5 * c5) * f_m - c5 * a) / denom;
}

double f_o_given_g(double b, double g, double f_c6) {
    return (std::sqrt(1.0 - g * g) * f_c6 - b * g) / std::sqrt(1.0 - b * b);
}

double f_q_given_ab(double a, double b, double c7, double r_dj) {
    const double num = f_of_r(c7) * std::sqrt(1.0 - a * a) + b * r_dj * a;
    const double denom =
        std::sqrt(1.0 - b * b) * std::sqrt(1.0 - a * a * (1.0 - r_dj * r_dj));
    return num / denom;
}

int BoundaryVectors::n_valid() const {
    int count = 0;
    for (double value : a_values)
        if (!is_missing(value)) ++count;
    return count;
}

namespace {

// Smallest |o| budget allowed by the Z->Y comparative bounds at (a, b),
// intersected with the direct o-interval.
Interval o_interval_at(const CompiledConstraints& cc, double a, double b) {
    Interval out = cc.o;
    for (const ZYBound& zy : cc.zy) {
        const double f_q = f_q_given_ab(a, b, zy.c7, zy.r_dj);
        double q2;
        if (std::isinf(f_q))
            q2 = 1.0;
        else
            q2 = f_q * f_q / (1.0 + f_q * f_q);
        const double cap = std::min(std::sqrt(zy.factor * q2), 1.0);
        out = out.intersect({-cap, cap});
    }
    return out;
}

struct SliceContext {
    const CompiledConstraints& cc;
    double f_c6 = 0.0;
    double g_lo = 0.0, g_hi = 0.0;
};

// Feasibility of a b-candidate: some g in [g_lo, g_hi] must map to an o
// inside the admissible interval (membership tolerance 1e-8).
bool b_feasible(const SliceContext& ctx, const GridParams& grid, double a, double b) {
    const Interval o_bounds = o_interval_at(ctx.cc, a, b);
    if (o_bounds.empty()) return false;
    for (int k = 0; k < grid.n_g; ++k) {
        const double g = lerp(ctx.g_lo, ctx.g_hi, k, grid.n_g);
        const double o = r_of_f(f_o_given_g(b, g, ctx.f_c6));
        if (o_bounds.contains(o, 1e-8)) return true;
    }
    return false;
}

}  // namespace

BoundaryVectors boundary(const CompiledConstraints& cc, const EstimableParams& theta,
                         const GridParams& grid, int threads) {
    validate_grid(grid);
    if (cc.iv_link && (!theta.c5 || !theta.c6))
        throw InstrumentMissing("instrument constraints need c5 and c6");

    BoundaryVectors out;
    out.a_values.assign(grid.n_a, kNaN);
    out.b_min.assign(grid.n_a, kNaN);
    out.b_max.assign(grid.n_a, kNaN);

    const double f_c6 = cc.iv_link ? f_of_r(*theta.c6) : 0.0;
    const double c5 = cc.iv_link ? *theta.c5 : 0.0;

    parallel_for(grid.n_a, threads, [&](int i) {
        const double a = lerp(cc.a.lower, cc.a.upper, i, grid.n_a);

        Interval d_range = cc.d;
        for (const ConditionalYBound& eb : cc.e) {
            const Interval pushed{d_given_e(a, -eb.e_abs, eb.c2, eb.c3, eb.c4),
                                  d_given_e(a, +eb.e_abs, eb.c2, eb.c3, eb.c4)};
            d_range = d_range.intersect(pushed);
        }

        Interval b_range = cc.b;
        if (cc.d_link) {
            if (d_range.empty()) return;
            const Interval pushed{b_given_d(a, d_range.lower, theta.c1),
                                  b_given_d(a, d_range.upper, theta.c1)};
            b_range = b_range.intersect(pushed).intersect({-1.0, 1.0});
        }
        if (b_range.empty()) return;

        if (!cc.iv_link) {
            out.a_values[i] = a;
            out.b_min[i] = b_range.lower;
            out.b_max[i] = b_range.upper;
            return;
        }

        SliceContext ctx{cc, f_c6, 0.0, 0.0};
        ctx.g_lo = r_of_f(f_g_given_m(a, f_of_r(cc.m.lower), c5));
        ctx.g_hi = r_of_f(f_g_given_m(a, f_of_r(cc.m.upper), c5));

        double b_lo = kNaN, b_hi = kNaN;
        for (int j = 0; j < grid.n_b; ++j) {
            const double b = lerp(b_range.lower, b_range.upper, j, grid.n_b);
            if (b_feasible(ctx, grid, a, b)) {
                b_lo = b;
                break;
            }
        }
        if (is_missing(b_lo)) return;
        for (int j = grid.n_b - 1; j >= 0; --j) {
            const double b = lerp(b_range.lower, b_range.upper, j, grid.n_b);
            if (b_feasible(ctx, grid, a, b)) {
                b_hi = b;
                break;
            }
        }
        out.a_values[i] = a;
        out.b_min[i] = b_lo;
        out.b_max[i] = b_hi;
    });
    return out;
}

std::vector<double> feasible_b_candidates(const CompiledConstraints& cc,
                                          const EstimableParams& theta,
                                          const GridParams& grid, double a, double b_lo,
                                          double b_hi) {
    if (!cc.iv_link) return {b_lo, b_hi};
    SliceContext ctx{cc, f_of_r(*theta.c6), 0.0, 0.0};
    ctx.g_lo = r_of_f(f_g_given_m(a, f_of_r(cc.m.lower), *theta.c5));
    ctx.g_hi = r_of_f(f_g_given_m(a, f_of_r(cc.m.upper), *theta.c5));
    std::vector<double> out;
    for (int j = 0; j < grid.n_b; ++j) {
        const double b = lerp(b_lo, b_hi, j, grid.n_b);
        if (b_feasible(ctx, grid, a, b)) out.push_back(b);
    }
    return out;
}

PirEstimate solve_pir(const EstimableParams& theta, const CompiledConstraints& cc,
                      const GridParams& grid, int threads) {
    PirEstimate est;
    est.boundary = boundary(cc, theta, grid, threads);

    auto psi_at = [&](double a, double b) {
        SensitivityPoint psi;
        psi.a = a;
        psi.b = b;
        if (cc.d_link)
            psi.d = b * std::sqrt(1.0 - theta.c1 * theta.c1) * std::sqrt(1.0 - a * a) +
                    theta.c1 * a;
        return psi;
    };

    double lower = std::numeric_limits<double>::infinity();
    double upper = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < est.boundary.a_values.size(); ++i) {
        const double a = est.boundary.a_values[i];
        if (is_missing(a)) continue;
        for (const double b : {est.boundary.b_min[i], est.boundary.b_max[i]}) {
            const double value = causal_beta(theta, psi_at(a, b));
            if (value < lower) {
                lower = value;
                est.argmin = psi_at(a, b);
            }
            if (value > upper) {
                upper = value;
                est.argmax = psi_at(a, b);
            }
        }
    }
    if (std::isfinite(lower)) {
        est.feasible = true;
        est.lower = lower;
        est.upper = upper;
    }
    return est;
}

}  // namespace pirsense
