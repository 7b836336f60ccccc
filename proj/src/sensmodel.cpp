#include "pirsense/sensmodel.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pirsense/errors.hpp"
#include "pirsense/r2calc.hpp"

namespace pirsense {

using r2calc::f_of_r;

const char* to_string(BoundKind kind) {
    switch (kind) {
        case BoundKind::direct_ud: return "direct_ud";
        case BoundKind::comp_ud: return "comp_ud";
        case BoundKind::direct_uy: return "direct_uy";
        case BoundKind::comp_uy_uncond_d: return "comp_uy_uncond_d";
        case BoundKind::comp_uy_cond_d: return "comp_uy_cond_d";
        case BoundKind::direct_uz: return "direct_uz";
        case BoundKind::comp_uz: return "comp_uz";
        case BoundKind::direct_zy: return "direct_zy";
        case BoundKind::comp_zy: return "comp_zy";
    }
    return "?";
}

std::optional<BoundKind> bound_kind_from_string(std::string_view name) {
    for (BoundKind kind :
         {BoundKind::direct_ud, BoundKind::comp_ud, BoundKind::direct_uy,
          BoundKind::comp_uy_uncond_d, BoundKind::comp_uy_cond_d, BoundKind::direct_uz,
          BoundKind::comp_uz, BoundKind::direct_zy, BoundKind::comp_zy})
        if (name == to_string(kind)) return kind;
    return std::nullopt;
}

SensitivityBound SensitivityBound::direct(BoundKind kind, double lower, double upper) {
    SensitivityBound bound;
    bound.kind = kind;
    bound.lower = lower;
    bound.upper = upper;
    return bound;
}

SensitivityBound SensitivityBound::comparative(BoundKind kind, std::vector<int> compare,
                                               double factor, std::vector<int> given_extra) {
    SensitivityBound bound;
    bound.kind = kind;
    bound.factor = factor;
    bound.compare = std::move(compare);
    bound.given_extra = std::move(given_extra);
    return bound;
}

namespace {

bool is_direct(BoundKind kind) {
    return kind == BoundKind::direct_ud || kind == BoundKind::direct_uy ||
           kind == BoundKind::direct_uz || kind == BoundKind::direct_zy;
}

bool needs_instrument(BoundKind kind) {
    return kind == BoundKind::direct_uz || kind == BoundKind::comp_uz ||
           kind == BoundKind::direct_zy || kind == BoundKind::comp_zy;
}

void validate_bound(const SensitivityBound& bound, const CovarianceModel& cov) {
    const int p_dot = static_cast<int>(cov.roles().xdot.size());
    if (needs_instrument(bound.kind) && !cov.has_instrument())
        throw RoleMismatch(std::string(to_string(bound.kind)) +
                           " requires an instrument role");
    if (is_direct(bound.kind)) {
        if (!(bound.lower <= bound.upper))
            throw PreconditionViolated("direct bound has lower > upper");
        if (bound.lower <= -1.0 || bound.upper >= 1.0)
            throw PreconditionViolated("direct bounds must lie strictly inside (-1, 1)");
        return;
    }
    if (bound.factor < 0.0) throw PreconditionViolated("comparative b-factor must be >= 0");
    if (bound.compare.empty()) throw RoleMismatch("comparative bound needs a comparison set");
    std::set<int> in_i(bound.given_extra.begin(), bound.given_extra.end());
    for (int pos : bound.compare) {
        if (pos < 0 || pos >= p_dot)
            throw RoleMismatch("comparison position outside the xdot covariates");
        if (in_i.count(pos)) throw RoleMismatch("comparison set must avoid the extra set");
    }
    for (int pos : bound.given_extra)
        if (pos < 0 || pos >= p_dot)
            throw RoleMismatch("extra conditioning position outside the xdot covariates");
    if ((bound.kind == BoundKind::comp_uz || bound.kind == BoundKind::comp_zy) &&
        bound.compare.size() != 1)
        throw RoleMismatch(std::string(to_string(bound.kind)) +
                           " compares against a single covariate");
}

Interval fold_symmetric(Interval interval, double rhs_r2) {
    const double limit = std::sqrt(std::clamp(rhs_r2, 0.0, 1.0));
    return interval.intersect({-limit, limit});
}

void check_nonempty(const Interval& interval, const char* name) {
    if (interval.empty())
        throw InfeasibleAtCompile(std::string("compiled ") + name + "-interval is empty");
}

}  // namespace

std::pair<EstimableParams, CompiledConstraints> compile(const SensitivityModel& model,
                                                        const CovarianceModel& cov) {
    if (model.bounds.empty()) throw EmptyModel("sensitivity model declares no bounds");
    for (const SensitivityBound& bound : model.bounds) validate_bound(bound, cov);

    EstimableParams theta = estimate_theta(cov, model);

    CompiledConstraints cc;
    cc.a = {-1.0, 1.0};
    std::size_t cond_y_seen = 0;
    std::size_t zy_seen = 0;
    for (std::size_t bi = 0; bi < model.bounds.size(); ++bi) {
        const SensitivityBound& bound = model.bounds[bi];
        const std::string key = std::to_string(bi) + ":" + to_string(bound.kind);
        switch (bound.kind) {
            case BoundKind::direct_ud:
                cc.a = cc.a.intersect({bound.lower, bound.upper});
                break;
            case BoundKind::comp_ud:
                cc.a = fold_symmetric(cc.a, theta.comparative_rhs.at(key));
                break;
            case BoundKind::direct_uy:
                cc.b = cc.b.intersect({bound.lower, bound.upper});
                break;
            case BoundKind::comp_uy_uncond_d:
                cc.d = fold_symmetric(cc.d, theta.comparative_rhs.at(key));
                cc.d_link = true;
                break;
            case BoundKind::comp_uy_cond_d: {
                const double e_abs =
                    std::sqrt(std::clamp(theta.comparative_rhs.at(key), 0.0, 1.0));
                cc.e.push_back({e_abs, theta.c2.at(cond_y_seen), theta.c3.at(cond_y_seen),
                                theta.c4.at(cond_y_seen)});
                ++cond_y_seen;
                cc.d_link = true;
                break;
            }
            case BoundKind::direct_uz:
                cc.m = cc.m.intersect({bound.lower, bound.upper});
                cc.iv_link = true;
                break;
            case BoundKind::comp_uz:
                cc.m = fold_symmetric(cc.m, theta.comparative_rhs.at(key));
                cc.iv_link = true;
                break;
            case BoundKind::direct_zy:
                cc.o = cc.o.intersect({bound.lower, bound.upper});
                cc.iv_link = true;
                break;
            case BoundKind::comp_zy:
                cc.zy.push_back({bound.factor, theta.c7.at(zy_seen), theta.r_dj.at(zy_seen)});
                ++zy_seen;
                cc.iv_link = true;
                break;
        }
    }

    cc.a = cc.a.intersect({model.default_a_lower, model.default_a_upper});
    check_nonempty(cc.a, "a");
    check_nonempty(cc.b, "b");
    check_nonempty(cc.d, "d");
    check_nonempty(cc.m, "m");
    check_nonempty(cc.o, "o");
    return {std::move(theta), std::move(cc)};
}

std::pair<double, double> eq5_residual(const EstimableParams& theta,
                                       const SensitivityPoint& psi) {
    if (!theta.c5 || !theta.c6) throw InstrumentMissing("instrument quantities unavailable");
    if (!psi.g || !psi.m || !psi.o)
        throw PreconditionViolated("psi must carry g, m and o for the instrument equalities");
    const double a = psi.a, b = psi.b, g = *psi.g, m = *psi.m, o = *psi.o;
    for (double r : {a, b, g, m, o})
        if (std::abs(r) >= 1.0 - 1e-12)
            throw DegenerateDenominator("partial correlation too close to +-1");

    const double res1 = f_of_r(o) * std::sqrt(1.0 - b * b) -
                        (std::sqrt(1.0 - g * g) * f_of_r(*theta.c6) - b * g);
    const double res2 = f_of_r(g) * std::sqrt(1.0 - a * a) -
                        (std::sqrt(1.0 - *theta.c5 * *theta.c5) * f_of_r(m) - *theta.c5 * a);
    return {res1, res2};
}

}  // namespace pirsense
