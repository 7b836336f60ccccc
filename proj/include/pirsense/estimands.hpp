#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pirsense/covariance.hpp"

namespace pirsense {

struct SensitivityModel;  // sensmodel.hpp

/// Everything the objective and constraints need that is estimable from the
/// observed covariance. The c-lists carry one entry per comparative bound of
/// the matching kind, in model declaration order.
struct EstimableParams {
    double beta_ols = 0.0;                 ///< regression estimand of D on Y given X (and Z)
    std::optional<double> beta_tsls;       ///< instrument-ratio estimand, when Z is assigned
    double sigma_ratio = 0.0;              ///< sd(Y | X,Z,D) / sd(D | X,Z)
    double c1 = 0.0;                       ///< R_{Y~D|X,Z}

    std::vector<double> c2;                ///< R_{Y~D|xtilde,xdot_I,Z} per conditional U->Y bound
    std::vector<double> c3;                ///< R_{D~xdot_{I^c}|xtilde,xdot_I,Z}, magnitude
    std::vector<double> c4;                ///< R_{Y~xdot_{I^c}|xtilde,xdot_I,Z}, magnitude

    std::optional<double> c5;              ///< R_{D~Z|X}
    std::optional<double> c6;              ///< R_{Y~Z|X,D}

    std::vector<double> c7;                ///< R_{Y~xdot_j|xtilde,xdot_{-j},Z,D} per Z->Y bound
    std::vector<double> r_dj;              ///< companion R_{D~xdot_j|xtilde,xdot_{-j},Z}

    /// Observable right-hand-side constant of each comparative bound, keyed
    /// by "<bound index>:<kind>".
    std::map<std::string, double> comparative_rhs;
};

/// One point of the unestimable sensitivity parameters. Every field is a
/// partial correlation; `a` and `b` are always meaningful, the rest only for
/// the constraint links that use them.
struct SensitivityPoint {
    double a = 0.0;               ///< R_{D~U|X,Z}
    double b = 0.0;               ///< R_{Y~U|X,Z,D}
    std::optional<double> d;      ///< R_{Y~U|X,Z}
    std::vector<double> e;        ///< R_{Y~U|xtilde,xdot_I,Z,D} per conditional U->Y bound
    std::optional<double> g;      ///< R_{Z~U|X,D}
    std::optional<double> m;      ///< R_{Z~U|X}
    std::optional<double> o;      ///< R_{Y~Z|X,U,D}
    std::vector<double> q;        ///< R_{Y~xdot_j|xtilde,xdot_{-j},Z,U,D} per Z->Y bound
};

/// Estimate every theta component the model's bounds require.
EstimableParams estimate_theta(const CovarianceModel& cov, const SensitivityModel& model);

/// The causal effect implied by (theta, psi):
/// beta_ols - b * f(a) * sigma_ratio.
double causal_beta(const EstimableParams& theta, const SensitivityPoint& psi);

/// The same effect written against the instrument-ratio estimand; agrees
/// with causal_beta wherever both are defined.
double tsls_gap(const EstimableParams& theta, const SensitivityPoint& psi);

/// Upper bound on |beta_ols - beta| for a (possibly vector) confounder with
/// given explanatory strengths.
double multi_confounder_bound(const EstimableParams& theta, double r2_yu, double f2_du);

/// Bias of the adjusted regression estimand when several confounders are
/// pairwise partially uncorrelated given (X, Z): the sum over confounders of
/// the product of their outcome and treatment coefficients. Raises
/// PreconditionViolated when the uncorrelatedness check fails (1e-9).
double bias_uncorrelated_confounders(const Matrix& sigma, int y, int d,
                                     const VariableSet& xz, const VariableSet& u);

/// Closed form of the same bias for exactly two confounders; used to
/// cross-check the generic sum.
double two_confounder_bias(const Matrix& sigma, int y, int d, const VariableSet& xz,
                           const VariableSet& u);

}  // namespace pirsense
