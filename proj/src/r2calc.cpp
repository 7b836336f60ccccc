#include "pirsense/r2calc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "pirsense/errors.hpp"

namespace pirsense {
namespace r2calc {

namespace {

constexpr double kUnitTol = 1e-12;
const double kInf = std::numeric_limits<double>::infinity();

Matrix submatrix(const Matrix& sigma, const VariableSet& rows, const VariableSet& cols) {
    Matrix out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = sigma(rows[i], cols[j]);
    return out;
}

void check_sets(const CovarianceModel& cov, std::initializer_list<const VariableSet*> sets) {
    std::set<int> seen;
    for (const VariableSet* s : sets)
        for (int idx : *s) {
            if (idx < 0 || idx >= cov.dim())
                throw PreconditionViolated("variable index out of range");
            if (!seen.insert(idx).second)
                throw PreconditionViolated("variable sets must be disjoint");
        }
}

// Schur complement against the `given` block of an arbitrary covariance.
Matrix residual_block(const Matrix& sigma, const VariableSet& target, const VariableSet& given) {
    const Matrix tt = submatrix(sigma, target, target);
    if (given.empty()) return tt;
    const Matrix gg = submatrix(sigma, given, given);
    const Matrix gt = submatrix(sigma, given, target);
    Eigen::LDLT<Matrix> ldlt(gg);
    const double max_diag = gg.diagonal().maxCoeff();
    if (ldlt.info() != Eigen::Success ||
        ldlt.vectorD().minCoeff() <= CovarianceModel::pivot_tolerance * max_diag)
        throw SingularConditioningSet("conditioning-set covariance is numerically singular");
    return tt - gt.transpose() * ldlt.solve(gt);
}

}  // namespace

Matrix residual_variance(const CovarianceModel& cov, const VariableSet& target,
                         const VariableSet& given) {
    check_sets(cov, {&target, &given});
    return residual_block(cov.sigma(), target, given);
}

double partial_r2(const CovarianceModel& cov, int y, const VariableSet& x,
                  const VariableSet& z) {
    const VariableSet ys{y};
    check_sets(cov, {&ys, &x, &z});
    if (x.empty()) return 0.0;

    const double var_y = cov.sigma()(y, y);
    const double var_y_z = residual_block(cov.sigma(), ys, z)(0, 0);
    if (var_y_z < kUnitTol * var_y)
        throw DegenerateDenominator("conditioning set already explains the response");

    VariableSet xz = x;
    xz.insert(xz.end(), z.begin(), z.end());
    const double var_y_xz = residual_block(cov.sigma(), ys, xz)(0, 0);
    return std::clamp(1.0 - var_y_xz / var_y_z, 0.0, 1.0);
}

double partial_r(const CovarianceModel& cov, int y, int x, const VariableSet& z) {
    const VariableSet ys{y}, xs{x};
    check_sets(cov, {&ys, &xs, &z});

    const VariableSet pair{y, x};
    const Matrix res = residual_block(cov.sigma(), pair, z);
    if (res(0, 0) < kUnitTol || res(1, 1) < kUnitTol)
        throw DegenerateDenominator("residual variance vanishes");
    return std::clamp(res(0, 1) / std::sqrt(res(0, 0) * res(1, 1)), -1.0, 1.0);
}

double f_value(const CovarianceModel& cov, int y, int x, const VariableSet& z) {
    return f_of_r(partial_r(cov, y, x, z));
}

double f2_value(const CovarianceModel& cov, int y, const VariableSet& x,
                const VariableSet& z) {
    return f2_of_r2(partial_r2(cov, y, x, z));
}

double f_of_r(double r) {
    const double one_minus = 1.0 - r * r;
    if (one_minus < kUnitTol) return r > 0 ? kInf : -kInf;
    return r / std::sqrt(one_minus);
}

double f2_of_r2(double r2) {
    const double one_minus = 1.0 - r2;
    if (one_minus < kUnitTol) return kInf;
    return r2 / one_minus;
}

double r_of_f(double f) {
    if (std::isinf(f)) return f > 0 ? 1.0 : -1.0;
    return f / std::sqrt(1.0 + f * f);
}

}  // namespace r2calc
}  // namespace pirsense
