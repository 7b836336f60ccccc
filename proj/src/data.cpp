#include "pirsense/data.hpp"

#include <algorithm>

#include "pirsense/errors.hpp"

namespace pirsense {

int Dataset::index_of(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw MissingColumn("unknown column: " + name);
    return static_cast<int>(it - names.begin());
}

Dataset Dataset::without_column(const std::string& name) const {
    const int drop = index_of(name);
    Dataset out;
    out.rows.resize(rows.rows(), rows.cols() - 1);
    int to = 0;
    for (int j = 0; j < p(); ++j) {
        if (j == drop) continue;
        out.names.push_back(names[j]);
        out.rows.col(to++) = rows.col(j);
    }
    return out;
}

Matrix covariance_of(const Matrix& rows) {
    const long n = rows.rows();
    if (n < 2) throw PreconditionViolated("need at least two rows");
    const Eigen::RowVectorXd mean = rows.colwise().mean();
    const Matrix centered = rows.rowwise() - mean;
    return (centered.transpose() * centered) / static_cast<double>(n);
}

CovarianceModel covariance_from_rows(const Dataset& data, const Roles& roles) {
    return CovarianceModel(data.names, covariance_of(data.rows), roles);
}

Matrix resampled_covariance(const Matrix& rows, SplitMix64& rng) {
    const long n = rows.rows();
    const int p = static_cast<int>(rows.cols());
    Vector sum = Vector::Zero(p);
    Matrix cross = Matrix::Zero(p, p);
    for (long i = 0; i < n; ++i) {
        const long pick = static_cast<long>(rng.next_below(static_cast<std::uint64_t>(n)));
        const auto row = rows.row(pick);
        sum += row.transpose();
        cross.selfadjointView<Eigen::Lower>().rankUpdate(row.transpose());
    }
    const Vector mean = sum / static_cast<double>(n);
    Matrix cov = Matrix(cross.selfadjointView<Eigen::Lower>()) / static_cast<double>(n) -
                 mean * mean.transpose();
    return cov;
}

Matrix leave_one_out_covariance(const Matrix& rows, long leave_out) {
    const long n = rows.rows();
    if (n < 2) throw PreconditionViolated("need at least two rows");
    const int p = static_cast<int>(rows.cols());
    Vector sum = Vector::Zero(p);
    Matrix cross = Matrix::Zero(p, p);
    for (long i = 0; i < n; ++i) {
        if (i == leave_out) continue;
        const auto row = rows.row(i);
        sum += row.transpose();
        cross.selfadjointView<Eigen::Lower>().rankUpdate(row.transpose());
    }
    const double m = static_cast<double>(n - 1);
    const Vector mean = sum / m;
    return Matrix(cross.selfadjointView<Eigen::Lower>()) / m - mean * mean.transpose();
}

Roles resolve_roles(const Dataset& data, const std::string& outcome,
                    const std::string& treatment, const std::string& instrument,
                    const std::vector<std::string>& xdot,
                    const std::vector<std::string>& xtilde) {
    Roles roles;
    roles.outcome = data.index_of(outcome);
    roles.treatment = data.index_of(treatment);
    if (!instrument.empty()) roles.instrument = data.index_of(instrument);
    for (const auto& name : xdot) roles.xdot.push_back(data.index_of(name));
    for (const auto& name : xtilde) roles.xtilde.push_back(data.index_of(name));
    return roles;
}

}  // namespace pirsense
