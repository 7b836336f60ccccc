#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace pirsense {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Ordered set of variable positions within a covariance model. May be
/// empty (the empty conditioning set).
using VariableSet = std::vector<int>;

/// Assignment of matrix columns to analysis roles. Columns assigned no role
/// are carried along but ignored by role-derived quantities; this is how an
/// unobserved variable can sit in a matrix for oracle-style checks.
struct Roles {
    int outcome = -1;
    int treatment = -1;
    int instrument = -1;      ///< -1 when no instrument is assigned
    VariableSet xdot;         ///< covariates eligible as comparison benchmarks
    VariableSet xtilde;       ///< remaining adjustment covariates
};

/// Centered covariance matrix over named variables plus role assignments.
///
/// Construction validates that the matrix is symmetric (1e-12 relative),
/// positive definite (all factorization pivots above 1e-10 times the largest
/// diagonal entry) and that the roles are consistent: exactly one outcome,
/// exactly one treatment, at most one instrument, xdot and xtilde disjoint.
class CovarianceModel {
public:
    CovarianceModel(std::vector<std::string> names, Matrix sigma, Roles roles);

    const Matrix& sigma() const { return sigma_; }
    const std::vector<std::string>& names() const { return names_; }
    const Roles& roles() const { return roles_; }

    int dim() const { return static_cast<int>(sigma_.rows()); }
    bool has_instrument() const { return roles_.instrument >= 0; }

    /// All adjustment covariates, xdot entries first.
    VariableSet covariates() const;
    /// Covariates plus the instrument, when present.
    VariableSet covariates_and_instrument() const;

    /// Position of a named variable; throws MissingColumn when absent.
    int index_of(const std::string& name) const;

    /// Relative pivot tolerance of the positive-definiteness check.
    static constexpr double pivot_tolerance = 1e-10;

private:
    std::vector<std::string> names_;
    Matrix sigma_;
    Roles roles_;
};

}  // namespace pirsense
