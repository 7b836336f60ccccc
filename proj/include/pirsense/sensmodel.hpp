#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pirsense/covariance.hpp"
#include "pirsense/estimands.hpp"

namespace pirsense {

/// The nine user-facing bound shapes, one per edge and flavour.
enum class BoundKind {
    direct_ud,          ///< R_{D~U|X,Z} in [lower, upper]
    comp_ud,            ///< R2_{D~U|...} <= b * R2_{D~xdot_J|...}
    direct_uy,          ///< R_{Y~U|X,Z,D} in [lower, upper]
    comp_uy_uncond_d,   ///< R2_{Y~U|...} <= b * R2_{Y~xdot_J|...}
    comp_uy_cond_d,     ///< same with D also regressed out
    direct_uz,          ///< R_{Z~U|X} in [lower, upper]
    comp_uz,            ///< R2_{Z~U|...} <= b * R2_{Z~xdot_j|...}
    direct_zy,          ///< R_{Y~Z|X,U,D} in [lower, upper]
    comp_zy,            ///< R2_{Y~Z|X,U,D} <= b * R2_{Y~xdot_j|...,Z,U,D}
};

const char* to_string(BoundKind kind);
std::optional<BoundKind> bound_kind_from_string(std::string_view name);

/// One declared sensitivity bound. Direct bounds use [lower, upper];
/// comparative bounds use the nonnegative factor plus the comparison set
/// `compare` (J) and, for the U->D / U->Y kinds, the extra conditioning set
/// `given_extra` (I). Both sets hold positions within the xdot role list.
struct SensitivityBound {
    BoundKind kind;
    double lower = 0.0;
    double upper = 0.0;
    double factor = 0.0;
    std::vector<int> compare;
    std::vector<int> given_extra;

    static SensitivityBound direct(BoundKind kind, double lower, double upper);
    static SensitivityBound comparative(BoundKind kind, std::vector<int> compare,
                                        double factor, std::vector<int> given_extra = {});
};

/// A set of bounds plus the catch-all interval applied to R_{D~U|X,Z}. The
/// catch-all keeps |a| away from 1 so the identified region stays finite.
struct SensitivityModel {
    std::vector<SensitivityBound> bounds;
    double default_a_lower = -0.999;
    double default_a_upper = 0.999;
};

/// Closed interval; empty when lower > upper.
struct Interval {
    double lower;
    double upper;

    bool empty() const { return !(lower <= upper); }
    bool contains(double x, double tol = 0.0) const {
        return x >= lower - tol && x <= upper + tol;
    }
    Interval intersect(const Interval& other) const {
        return {std::max(lower, other.lower), std::min(upper, other.upper)};
    }
};

/// Compiled form of one conditional U->Y comparative bound: |e_i| <= e_abs
/// plus the constants of the equality that ties d to (a, e_i).
struct ConditionalYBound {
    double e_abs;
    double c2, c3, c4;
};

/// Compiled form of one Z->Y comparative bound: the b-factor plus the
/// constants of the equality that determines q from (a, b).
struct ZYBound {
    double factor;
    double c7;
    double r_dj;
};

/// Numeric compilation of a sensitivity model against a covariance model.
/// Intervals already intersect every applicable bound; flags say which
/// equality links the optimizer must honor.
struct CompiledConstraints {
    Interval a{-0.999, 0.999};
    Interval b{-1.0, 1.0};
    Interval d{-1.0, 1.0};
    Interval m{-1.0, 1.0};
    Interval o{-1.0, 1.0};
    std::vector<ConditionalYBound> e;
    std::vector<ZYBound> zy;
    bool d_link = false;   ///< b = (d - c1 a)/(sqrt(1-c1^2) sqrt(1-a^2)) active
    bool iv_link = false;  ///< instrument equalities active
};

/// Translate the model's bounds into numeric constraints. Raises
/// RoleMismatch / EmptyModel on invalid declarations and InfeasibleAtCompile
/// when a static interval is already empty.
std::pair<EstimableParams, CompiledConstraints> compile(const SensitivityModel& model,
                                                        const CovarianceModel& cov);

/// Residuals of the two instrument equalities at psi (lhs - rhs); a feasible
/// point drives both below 1e-9 in magnitude.
std::pair<double, double> eq5_residual(const EstimableParams& theta,
                                       const SensitivityPoint& psi);

}  // namespace pirsense
