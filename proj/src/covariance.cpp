#include "pirsense/covariance.hpp"

#include <algorithm>
#include <set>

#include "pirsense/errors.hpp"

namespace pirsense {

namespace {

void check_index(int idx, int dim, const char* role) {
    if (idx < 0 || idx >= dim)
        throw PreconditionViolated(std::string(role) + " index out of range");
}

}  // namespace

CovarianceModel::CovarianceModel(std::vector<std::string> names, Matrix sigma, Roles roles)
    : names_(std::move(names)), sigma_(std::move(sigma)), roles_(std::move(roles)) {
    const auto n = sigma_.rows();
    if (sigma_.cols() != n) throw PreconditionViolated("covariance matrix must be square");
    if (static_cast<long>(names_.size()) != n)
        throw PreconditionViolated("variable names must match matrix dimension");

    const double scale = std::max(1e-300, sigma_.cwiseAbs().maxCoeff());
    for (long i = 0; i < n; ++i)
        for (long j = i + 1; j < n; ++j)
            if (std::abs(sigma_(i, j) - sigma_(j, i)) > 1e-12 * scale)
                throw PreconditionViolated("covariance matrix is not symmetric");
    sigma_ = ((sigma_ + sigma_.transpose()) / 2.0).eval();

    Eigen::LDLT<Matrix> ldlt(sigma_);
    const double max_diag = sigma_.diagonal().maxCoeff();
    if (ldlt.info() != Eigen::Success ||
        ldlt.vectorD().minCoeff() <= pivot_tolerance * max_diag)
        throw SingularConditioningSet("covariance matrix is not positive definite");

    check_index(roles_.outcome, static_cast<int>(n), "outcome");
    check_index(roles_.treatment, static_cast<int>(n), "treatment");
    if (roles_.instrument >= 0) check_index(roles_.instrument, static_cast<int>(n), "instrument");

    std::set<int> seen{roles_.outcome, roles_.treatment};
    if (roles_.outcome == roles_.treatment)
        throw PreconditionViolated("outcome and treatment must be distinct");
    if (roles_.instrument >= 0 && !seen.insert(roles_.instrument).second)
        throw PreconditionViolated("instrument collides with another role");
    for (int idx : roles_.xdot) {
        check_index(idx, static_cast<int>(n), "xdot");
        if (!seen.insert(idx).second) throw PreconditionViolated("duplicate role assignment");
    }
    for (int idx : roles_.xtilde) {
        check_index(idx, static_cast<int>(n), "xtilde");
        if (!seen.insert(idx).second) throw PreconditionViolated("duplicate role assignment");
    }
}

VariableSet CovarianceModel::covariates() const {
    VariableSet out = roles_.xdot;
    out.insert(out.end(), roles_.xtilde.begin(), roles_.xtilde.end());
    return out;
}

VariableSet CovarianceModel::covariates_and_instrument() const {
    VariableSet out = covariates();
    if (has_instrument()) out.push_back(roles_.instrument);
    return out;
}

int CovarianceModel::index_of(const std::string& name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw MissingColumn("unknown variable: " + name);
    return static_cast<int>(it - names_.begin());
}

}  // namespace pirsense
