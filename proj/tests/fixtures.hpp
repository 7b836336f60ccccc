#pragma once

// Shared fixtures: the two simulation designs' population covariances with
// the confounder kept as an unassigned column, so oracle checks can reach it.

#include "pirsense/covariance.hpp"
#include "pirsense/sensmodel.hpp"

namespace fixtures {

using pirsense::CovarianceModel;
using pirsense::Matrix;
using pirsense::Roles;

// columns U, X, D, Y
inline Matrix regression_sigma() {
    Matrix sigma(4, 4);
    sigma << 1, 0, 1, 2,
             0, 1, 1, 3,
             1, 1, 3, 6,
             2, 3, 6, 15;
    return sigma;
}

inline CovarianceModel regression_cov() {
    Roles roles;
    roles.outcome = 3;
    roles.treatment = 2;
    roles.xdot = {1};
    return CovarianceModel({"U", "X", "D", "Y"}, regression_sigma(), roles);
}

// columns U, Z, D, Y
inline Matrix iv_sigma() {
    Matrix sigma(4, 4);
    sigma << 1, 0, 1, 2,
             0, 1, 1, 1,
             1, 1, 3, 4,
             2, 1, 4, 7;
    return sigma;
}

inline CovarianceModel iv_cov() {
    Roles roles;
    roles.outcome = 3;
    roles.treatment = 2;
    roles.instrument = 1;
    return CovarianceModel({"U", "Z", "D", "Y"}, iv_sigma(), roles);
}

inline pirsense::SensitivityModel regression_model() {
    pirsense::SensitivityModel model;
    model.bounds.push_back(pirsense::SensitivityBound::comparative(
        pirsense::BoundKind::comp_ud, {0}, 1.0));
    model.bounds.push_back(pirsense::SensitivityBound::comparative(
        pirsense::BoundKind::comp_uy_uncond_d, {0}, 4.0 / 9.0));
    return model;
}

inline pirsense::SensitivityModel iv_model() {
    pirsense::SensitivityModel model;
    model.bounds.push_back(pirsense::SensitivityBound::direct(
        pirsense::BoundKind::direct_uz, -0.002, 0.002));
    model.bounds.push_back(pirsense::SensitivityBound::direct(
        pirsense::BoundKind::direct_zy, -0.002, 0.002));
    return model;
}

}  // namespace fixtures
