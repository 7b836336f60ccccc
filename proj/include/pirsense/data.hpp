#pragma once

#include <string>
#include <vector>

#include "pirsense/covariance.hpp"
#include "pirsense/rng.hpp"

namespace pirsense {

/// A rectangular numeric dataset: one row per observation, one named column
/// per variable.
struct Dataset {
    std::vector<std::string> names;
    Matrix rows;

    long n() const { return rows.rows(); }
    int p() const { return static_cast<int>(rows.cols()); }
    int index_of(const std::string& name) const;
    /// Copy with the given column removed.
    Dataset without_column(const std::string& name) const;
};

/// Centered covariance with 1/n scaling over all columns.
Matrix covariance_of(const Matrix& rows);

/// Centered 1/n covariance of the dataset, wrapped with the given roles.
CovarianceModel covariance_from_rows(const Dataset& data, const Roles& roles);

/// Covariance of a with-replacement resample of the rows, one uniform draw
/// per resampled row.
Matrix resampled_covariance(const Matrix& rows, SplitMix64& rng);

/// Covariance of the sample with row `leave_out` removed.
Matrix leave_one_out_covariance(const Matrix& rows, long leave_out);

/// Resolve role labels against dataset columns.
Roles resolve_roles(const Dataset& data, const std::string& outcome,
                    const std::string& treatment, const std::string& instrument,
                    const std::vector<std::string>& xdot,
                    const std::vector<std::string>& xtilde);

}  // namespace pirsense
