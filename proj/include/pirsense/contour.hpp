#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pirsense/bootstrap.hpp"

namespace pirsense {

enum class PirEnd { lower, upper };

enum class ComparisonKind { rigorous_uncond_d, rigorous_cond_d, informal };

const char* to_string(PirEnd end);
const char* to_string(ComparisonKind kind);

/// Calibration point overlaid on an R-contour grid.
struct ComparisonPoint {
    double a_coord = 0.0;
    double b_coord = 0.0;
    ComparisonKind kind = ComparisonKind::informal;
    double b_d = 0.0;
    double b_y = 0.0;
    std::string covariate;
    bool out_of_range = false;
};

/// Rectangular grid of endpoint values over two parameter axes. NaN cells
/// mark infeasible models. Grids are emitted as data, never rendered.
struct ContourGrid {
    std::vector<double> axis1;
    std::vector<double> axis2;
    Matrix values;
    PirEnd which_end = PirEnd::lower;
    std::vector<ComparisonPoint> overlays;
};

/// Evenly spaced axis values.
std::vector<double> linspace(double lo, double hi, int count);

/// Re-compile and re-solve the model per cell, with the b-factors of the two
/// bounds at `axis_bound1` / `axis_bound2` (indices into the template's
/// bound list) replaced by the axis values.
ContourGrid b_contour(const CovarianceModel& cov, const SensitivityModel& model_template,
                      int axis_bound1, int axis_bound2, const std::vector<double>& b_axis1,
                      const std::vector<double>& b_axis2, PirEnd end, const GridParams& grid,
                      int threads = 1);

/// Pure evaluation of the causal effect over an (a, b) grid; no optimization.
ContourGrid r_contour(const EstimableParams& theta, const std::vector<double>& a_axis,
                      const std::vector<double>& b_axis);

/// Calibrated R_{D~U|X,Z} when U explains b_d times as much treatment
/// variance as the xdot covariate at `j`.
double comparison_point_d(const CovarianceModel& cov, int j, double b_d);

/// Calibrated R_{Y~U|X,Z,D} for outcome strength b_y; the comparison is made
/// conditional or unconditional on the treatment.
double comparison_point_y(const CovarianceModel& cov, int j, double b_d, double b_y,
                          bool conditional_on_d);

/// Benchmark pair built from observed partial correlations only; not a
/// feasible point of any constraint chain.
std::pair<double, double> informal_comparison_point(const CovarianceModel& cov,
                                                    int column, double b);

/// Comparison points of all three kinds for one covariate and strength.
std::vector<ComparisonPoint> comparison_points(const CovarianceModel& cov, int j,
                                               double b_d, double b_y);

/// Boundary vectors reinterpreted as an (a, b) region outline for overlay on
/// R-contours.
BoundaryVectors feasible_region_slice(const EstimableParams& theta,
                                      const CompiledConstraints& cc, const GridParams& grid);

/// CSV emitters: `axis1,axis2,value` with empty fields for missing cells,
/// and `kind,a,b,b_d,b_y,covariate` for overlays.
void write_contour_csv(const ContourGrid& grid, std::ostream& os);
void write_overlays_csv(const std::vector<ComparisonPoint>& points, std::ostream& os);

}  // namespace pirsense
