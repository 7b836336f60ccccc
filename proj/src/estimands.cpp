#include "pirsense/estimands.hpp"

#include <algorithm>
#include <cmath>

#include "pirsense/errors.hpp"
#include "pirsense/r2calc.hpp"
#include "pirsense/sensmodel.hpp"

namespace pirsense {

namespace {

using r2calc::f_of_r;

Matrix submatrix(const Matrix& sigma, const VariableSet& rows, const VariableSet& cols) {
    Matrix out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = sigma(rows[i], cols[j]);
    return out;
}

Matrix residual_block(const Matrix& sigma, const VariableSet& target, const VariableSet& given) {
    const Matrix tt = submatrix(sigma, target, target);
    if (given.empty()) return tt;
    const Matrix gg = submatrix(sigma, given, given);
    const Matrix gt = submatrix(sigma, given, target);
    Eigen::LDLT<Matrix> ldlt(gg);
    if (ldlt.info() != Eigen::Success ||
        ldlt.vectorD().minCoeff() <= CovarianceModel::pivot_tolerance * gg.diagonal().maxCoeff())
        throw SingularConditioningSet("conditioning-set covariance is numerically singular");
    return tt - gt.transpose() * ldlt.solve(gt);
}

double partial_corr(const Matrix& sigma, int y, int x, const VariableSet& given) {
    const Matrix res = residual_block(sigma, {y, x}, given);
    if (res(0, 0) < 1e-12 || res(1, 1) < 1e-12)
        throw DegenerateDenominator("residual variance vanishes");
    return std::clamp(res(0, 1) / std::sqrt(res(0, 0) * res(1, 1)), -1.0, 1.0);
}

VariableSet join(VariableSet base, const VariableSet& extra) {
    base.insert(base.end(), extra.begin(), extra.end());
    return base;
}

VariableSet join(VariableSet base, int extra) {
    base.push_back(extra);
    return base;
}

}  // namespace

EstimableParams estimate_theta(const CovarianceModel& cov, const SensitivityModel& model) {
    const Roles& roles = cov.roles();
    const int y = roles.outcome;
    const int d = roles.treatment;
    const VariableSet x = cov.covariates();
    const VariableSet xz = cov.covariates_and_instrument();

    EstimableParams theta;
    {
        const Matrix res = residual_block(cov.sigma(), {y, d}, xz);
        theta.beta_ols = res(0, 1) / res(1, 1);
        const double var_y_all = res(0, 0) - res(0, 1) * res(0, 1) / res(1, 1);
        theta.sigma_ratio = std::sqrt(var_y_all / res(1, 1));
        theta.c1 = std::clamp(res(0, 1) / std::sqrt(res(0, 0) * res(1, 1)), -1.0, 1.0);
    }

    if (cov.has_instrument()) {
        const int z = roles.instrument;
        const Matrix res = residual_block(cov.sigma(), {y, d, z}, x);
        theta.beta_tsls = res(0, 2) / res(1, 2);
        theta.c5 = std::clamp(res(1, 2) / std::sqrt(res(1, 1) * res(2, 2)), -1.0, 1.0);
        theta.c6 = partial_corr(cov.sigma(), y, z, join(x, d));
    }

    for (std::size_t bi = 0; bi < model.bounds.size(); ++bi) {
        const SensitivityBound& bound = model.bounds[bi];
        const bool needs_z = bound.kind == BoundKind::direct_uz || bound.kind == BoundKind::comp_uz ||
                             bound.kind == BoundKind::direct_zy || bound.kind == BoundKind::comp_zy;
        if (needs_z && !cov.has_instrument())
            throw InstrumentMissing("bound requires an instrument role");

        VariableSet xdot_i, xdot_ic, xdot_j;
        if (bound.kind == BoundKind::comp_ud || bound.kind == BoundKind::comp_uy_uncond_d ||
            bound.kind == BoundKind::comp_uy_cond_d) {
            for (int pos : bound.given_extra) xdot_i.push_back(roles.xdot.at(pos));
            for (int pos = 0; pos < static_cast<int>(roles.xdot.size()); ++pos)
                if (std::find(bound.given_extra.begin(), bound.given_extra.end(), pos) ==
                    bound.given_extra.end())
                    xdot_ic.push_back(roles.xdot[pos]);
            for (int pos : bound.compare) xdot_j.push_back(roles.xdot.at(pos));
        } else if (bound.kind == BoundKind::comp_uz || bound.kind == BoundKind::comp_zy) {
            const int j = bound.compare.at(0);
            xdot_j.push_back(roles.xdot.at(j));
            for (int pos = 0; pos < static_cast<int>(roles.xdot.size()); ++pos)
                if (pos != j) xdot_i.push_back(roles.xdot[pos]);
        }

        // conditioning set (xtilde, xdot_I) plus the instrument when present
        VariableSet w = join(roles.xtilde, xdot_i);
        VariableSet wz = w;
        if (cov.has_instrument()) wz.push_back(roles.instrument);

        const std::string key = std::to_string(bi) + ":" + to_string(bound.kind);
        switch (bound.kind) {
            case BoundKind::comp_ud: {
                const double r2_j = r2calc::partial_r2(cov, d, xdot_j, wz);
                const double r2_ic = r2calc::partial_r2(cov, d, xdot_ic, wz);
                theta.comparative_rhs[key] = bound.factor * r2_j / (1.0 - r2_ic);
                break;
            }
            case BoundKind::comp_uy_uncond_d: {
                const double r2_j = r2calc::partial_r2(cov, y, xdot_j, wz);
                const double r2_ic = r2calc::partial_r2(cov, y, xdot_ic, wz);
                theta.comparative_rhs[key] = bound.factor * r2_j / (1.0 - r2_ic);
                break;
            }
            case BoundKind::comp_uy_cond_d: {
                const double r2_j = r2calc::partial_r2(cov, y, xdot_j, join(wz, d));
                theta.comparative_rhs[key] = bound.factor * r2_j;
                theta.c2.push_back(partial_corr(cov.sigma(), y, d, wz));
                theta.c3.push_back(std::sqrt(r2calc::partial_r2(cov, d, xdot_ic, wz)));
                theta.c4.push_back(std::sqrt(r2calc::partial_r2(cov, y, xdot_ic, wz)));
                break;
            }
            case BoundKind::comp_uz: {
                const double r2 = r2calc::partial_r2(cov, roles.instrument, xdot_j, w);
                const double denom = 1.0 - bound.factor * r2 * r2;
                theta.comparative_rhs[key] =
                    denom > 0 ? bound.factor * r2 * (1.0 - r2) / denom : 1.0;
                break;
            }
            case BoundKind::comp_zy: {
                theta.comparative_rhs[key] = bound.factor;
                theta.c7.push_back(partial_corr(cov.sigma(), y, roles.xdot.at(bound.compare.at(0)),
                                                join(wz, d)));
                theta.r_dj.push_back(
                    partial_corr(cov.sigma(), d, roles.xdot.at(bound.compare.at(0)), wz));
                break;
            }
            default:
                break;
        }
    }
    return theta;
}

double causal_beta(const EstimableParams& theta, const SensitivityPoint& psi) {
    if (std::abs(psi.a) >= 1.0 - 1e-12)
        throw DegenerateDenominator("|a| too close to 1");
    return theta.beta_ols - psi.b * f_of_r(psi.a) * theta.sigma_ratio;
}

double tsls_gap(const EstimableParams& theta, const SensitivityPoint& psi) {
    if (!theta.beta_tsls || !theta.c5 || !theta.c6)
        throw InstrumentMissing("no instrument quantities available");
    if (std::abs(*theta.c5) < 1e-8) throw WeakInstrument("R_{D~Z|X} is numerically zero");
    if (std::abs(psi.a) >= 1.0 - 1e-12)
        throw DegenerateDenominator("|a| too close to 1");
    const double correction = f_of_r(*theta.c6) / *theta.c5 + psi.b * f_of_r(psi.a);
    return *theta.beta_tsls - correction * theta.sigma_ratio;
}

double multi_confounder_bound(const EstimableParams& theta, double r2_yu, double f2_du) {
    if (!(r2_yu >= 0.0 && r2_yu < 1.0)) throw PreconditionViolated("r2_yu must lie in [0,1)");
    if (!(f2_du >= 0.0)) throw PreconditionViolated("f2_du must be nonnegative");
    return std::sqrt(r2_yu * f2_du) * theta.sigma_ratio;
}

double bias_uncorrelated_confounders(const Matrix& sigma, int y, int d,
                                     const VariableSet& xz, const VariableSet& u) {
    if (u.empty()) throw PreconditionViolated("need at least one confounder");
    const Matrix u_res = residual_block(sigma, u, xz);
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = i + 1; j < u.size(); ++j)
            if (std::abs(u_res(i, j)) / std::sqrt(u_res(i, i) * u_res(j, j)) > 1e-9)
                throw PreconditionViolated("confounders are not partially uncorrelated");

    double bias = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        VariableSet rest = xz;
        rest.push_back(d);
        for (std::size_t k = 0; k < u.size(); ++k)
            if (k != j) rest.push_back(u[k]);
        const Matrix yu = residual_block(sigma, {y, u[j]}, rest);
        const double coef_y = yu(0, 1) / yu(1, 1);
        const Matrix ud = residual_block(sigma, {u[j], d}, xz);
        const double coef_d = ud(0, 1) / ud(1, 1);
        bias += coef_y * coef_d;
    }
    return bias;
}

double two_confounder_bias(const Matrix& sigma, int y, int d, const VariableSet& xz,
                           const VariableSet& u) {
    if (u.size() != 2) throw PreconditionViolated("closed form needs exactly two confounders");

    double r[2], f[2];
    for (int j = 0; j < 2; ++j) {
        VariableSet rest = join(xz, d);
        rest.push_back(u[1 - j]);
        r[j] = partial_corr(sigma, y, u[j], rest);
        f[j] = f_of_r(partial_corr(sigma, d, u[j], xz));
    }

    const Matrix res = residual_block(sigma, {y, d}, xz);
    const double var_y_all = res(0, 0) - res(0, 1) * res(0, 1) / res(1, 1);
    const double sigma_ratio = std::sqrt(var_y_all / res(1, 1));

    double bias = 0.0;
    for (int j = 0; j < 2; ++j) {
        const int k = 1 - j;
        const double cross = r[k] * std::sqrt((1.0 - r[j] * r[j]) / (1.0 - r[k] * r[k])) -
                             r[j] * f[j] * f[k];
        const double denom = std::sqrt(1.0 - f[j] * f[j] * f[k] * f[k] + cross * cross);
        bias += r[j] * f[j] / denom;
    }
    return bias * sigma_ratio;
}

}  // namespace pirsense
