#pragma once

#include "pirsense/covariance.hpp"

namespace pirsense {
namespace r2calc {

/// Residual covariance Var(target | given), computed as the Schur complement
/// Sigma_tt - Sigma_tg Sigma_gg^{-1} Sigma_gt. For an empty conditioning set
/// this is the plain covariance block.
///
/// Throws SingularConditioningSet when a factorization pivot of Sigma_gg
/// falls below tolerance.
Matrix residual_variance(const CovarianceModel& cov, const VariableSet& target,
                         const VariableSet& given);

/// Partial R^2 of variable y on the set x given the set z, in [0, 1].
double partial_r2(const CovarianceModel& cov, int y, const VariableSet& x,
                  const VariableSet& z);

/// Partial correlation of y and x given z, in [-1, 1].
double partial_r(const CovarianceModel& cov, int y, int x, const VariableSet& z);

/// Signed partial f-value of y on x given z; +-inf when R^2 reaches 1.
double f_value(const CovarianceModel& cov, int y, int x, const VariableSet& z);

/// Partial f^2-value of y on the set x given z, in [0, +inf].
double f2_value(const CovarianceModel& cov, int y, const VariableSet& x,
                const VariableSet& z);

/// r -> r / sqrt(1 - r^2). Maps r = +-1 (within 1e-12) to +-inf rather than
/// raising; infinities must flow through downstream arithmetic.
double f_of_r(double r);

/// r2 -> r2 / (1 - r2), with the same infinity convention.
double f2_of_r2(double r2);

/// Inverse transform f -> f / sqrt(1 + f^2); maps +-inf to +-1.
double r_of_f(double f);

}  // namespace r2calc
}  // namespace pirsense
