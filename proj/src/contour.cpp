#include "pirsense/contour.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "pirsense/errors.hpp"
#include "pirsense/parallel.hpp"
#include "pirsense/r2calc.hpp"

namespace pirsense {

using r2calc::f_of_r;

const char* to_string(PirEnd end) { return end == PirEnd::lower ? "lower" : "upper"; }

const char* to_string(ComparisonKind kind) {
    switch (kind) {
        case ComparisonKind::rigorous_uncond_d: return "rigorous_uncond_d";
        case ComparisonKind::rigorous_cond_d: return "rigorous_cond_d";
        case ComparisonKind::informal: return "informal";
    }
    return "?";
}

std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 2) throw PreconditionViolated("axis needs at least 2 points");
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return out;
}

ContourGrid b_contour(const CovarianceModel& cov, const SensitivityModel& model_template,
                      int axis_bound1, int axis_bound2, const std::vector<double>& b_axis1,
                      const std::vector<double>& b_axis2, PirEnd end, const GridParams& grid,
                      int threads) {
    const int n_bounds = static_cast<int>(model_template.bounds.size());
    if (axis_bound1 < 0 || axis_bound1 >= n_bounds || axis_bound2 < 0 ||
        axis_bound2 >= n_bounds || axis_bound1 == axis_bound2)
        throw PreconditionViolated("axis bounds must name two distinct template bounds");

    ContourGrid out;
    out.axis1 = b_axis1;
    out.axis2 = b_axis2;
    out.which_end = end;
    out.values.setConstant(b_axis1.size(), b_axis2.size(), std::nan(""));

    const int cells = static_cast<int>(b_axis1.size() * b_axis2.size());
    parallel_for(cells, threads, [&](int cell) {
        const int i = cell / static_cast<int>(b_axis2.size());
        const int j = cell % static_cast<int>(b_axis2.size());
        SensitivityModel model = model_template;
        model.bounds[axis_bound1].factor = b_axis1[i];
        model.bounds[axis_bound2].factor = b_axis2[j];
        try {
            auto [theta, cc] = compile(model, cov);
            const PirEstimate est = solve_pir(theta, cc, grid);
            if (est.feasible)
                out.values(i, j) = end == PirEnd::lower ? est.lower : est.upper;
        } catch (const InfeasibleAtCompile&) {
            // cell stays missing
        }
    });
    return out;
}

ContourGrid r_contour(const EstimableParams& theta, const std::vector<double>& a_axis,
                      const std::vector<double>& b_axis) {
    ContourGrid out;
    out.axis1 = a_axis;
    out.axis2 = b_axis;
    out.values.resize(a_axis.size(), b_axis.size());
    for (std::size_t i = 0; i < a_axis.size(); ++i)
        for (std::size_t j = 0; j < b_axis.size(); ++j) {
            SensitivityPoint psi;
            psi.a = a_axis[i];
            psi.b = b_axis[j];
            out.values(i, j) = causal_beta(theta, psi);
        }
    return out;
}

namespace {

struct BenchmarkQuantities {
    double r_d;    // R_{D~xdot_j | W}
    double f_d;    // its f-value
    double r_y;    // R_{Y~xdot_j | W}
    double r_yd;   // R_{Y~xdot_j | W, D}
    double f_yd;   // its f-value
    double r2_y_dj;  // R2_{Y ~ D+xdot_j | W}
    double r2_y_d;   // R2_{Y ~ D | W}
};

BenchmarkQuantities benchmark_quantities(const CovarianceModel& cov, int j) {
    const Roles& roles = cov.roles();
    if (j < 0 || j >= static_cast<int>(roles.xdot.size()))
        throw RoleMismatch("comparison covariate must be an xdot position");
    const int xj = roles.xdot[j];
    const int y = roles.outcome;
    const int d = roles.treatment;

    VariableSet w = roles.xtilde;
    for (int pos = 0; pos < static_cast<int>(roles.xdot.size()); ++pos)
        if (pos != j) w.push_back(roles.xdot[pos]);
    if (cov.has_instrument()) w.push_back(roles.instrument);

    VariableSet wd = w;
    wd.push_back(d);

    BenchmarkQuantities q;
    q.r_d = r2calc::partial_r(cov, d, xj, w);
    q.f_d = f_of_r(q.r_d);
    q.r_y = r2calc::partial_r(cov, y, xj, w);
    q.r_yd = r2calc::partial_r(cov, y, xj, wd);
    q.f_yd = f_of_r(q.r_yd);
    q.r2_y_dj = r2calc::partial_r2(cov, y, {d, xj}, w);
    q.r2_y_d = r2calc::partial_r2(cov, y, {d}, w);
    return q;
}

}  // namespace

double comparison_point_d(const CovarianceModel& cov, int j, double b_d) {
    if (b_d < 0.0) throw PreconditionViolated("comparison strength must be >= 0");
    return std::sqrt(b_d) * benchmark_quantities(cov, j).f_d;
}

double comparison_point_y(const CovarianceModel& cov, int j, double b_d, double b_y,
                          bool conditional_on_d) {
    if (b_d < 0.0 || b_y < 0.0) throw PreconditionViolated("comparison strength must be >= 0");
    const BenchmarkQuantities q = benchmark_quantities(cov, j);

    const double denom_term = 1.0 - b_d * q.f_d * q.f_d;
    if (denom_term <= 0.0)
        throw DegenerateDenominator("comparison point undefined: benchmark too strong");
    const double denom = std::sqrt(1.0 - q.r2_y_dj) * std::sqrt(denom_term);
    const double shared = std::sqrt(b_d) *
                          std::sqrt((1.0 - q.r2_y_dj) / (1.0 - q.r_d * q.r_d)) * q.f_yd;

    double num;
    if (!conditional_on_d) {
        num = (std::sqrt(b_y) - std::sqrt(b_d)) * q.r_y + shared;
    } else {
        const double lead = std::sqrt(b_y) * std::sqrt(1.0 - b_d * q.r_d * q.r_d) -
                            std::sqrt(b_d) * std::sqrt(1.0 - q.r_d * q.r_d);
        num = lead * q.r_yd * std::sqrt(1.0 - q.r2_y_d) + shared;
    }
    return num / denom;
}

std::pair<double, double> informal_comparison_point(const CovarianceModel& cov, int column,
                                                    double b) {
    if (b < 0.0) throw PreconditionViolated("comparison strength must be >= 0");
    const Roles& roles = cov.roles();
    const VariableSet all_x = cov.covariates();
    if (std::find(all_x.begin(), all_x.end(), column) == all_x.end())
        throw RoleMismatch("informal comparison needs a covariate column");

    VariableSet rest;
    for (int idx : all_x)
        if (idx != column) rest.push_back(idx);
    if (cov.has_instrument()) rest.push_back(roles.instrument);
    VariableSet rest_d = rest;
    rest_d.push_back(roles.treatment);

    const double root = std::sqrt(b);
    return {root * r2calc::partial_r(cov, roles.treatment, column, rest),
            root * r2calc::partial_r(cov, roles.outcome, column, rest_d)};
}

std::vector<ComparisonPoint> comparison_points(const CovarianceModel& cov, int j,
                                               double b_d, double b_y) {
    const std::string label = cov.names()[cov.roles().xdot.at(j)];
    std::vector<ComparisonPoint> out;

    const double a = comparison_point_d(cov, j, b_d);
    for (bool conditional : {false, true}) {
        ComparisonPoint point;
        point.kind = conditional ? ComparisonKind::rigorous_cond_d
                                 : ComparisonKind::rigorous_uncond_d;
        point.a_coord = a;
        point.b_coord = comparison_point_y(cov, j, b_d, b_y, conditional);
        point.b_d = b_d;
        point.b_y = b_y;
        point.covariate = label;
        out.push_back(point);
    }

    ComparisonPoint informal;
    informal.kind = ComparisonKind::informal;
    std::tie(informal.a_coord, informal.b_coord) =
        informal_comparison_point(cov, cov.roles().xdot.at(j), b_d);
    informal.b_d = b_d;
    informal.b_y = b_d;
    informal.covariate = label;
    out.push_back(informal);
    return out;
}

BoundaryVectors feasible_region_slice(const EstimableParams& theta,
                                      const CompiledConstraints& cc, const GridParams& grid) {
    BoundaryVectors bv = boundary(cc, theta, grid);
    BoundaryVectors out;
    for (std::size_t i = 0; i < bv.a_values.size(); ++i) {
        if (is_missing(bv.a_values[i])) continue;
        out.a_values.push_back(bv.a_values[i]);
        out.b_min.push_back(bv.b_min[i]);
        out.b_max.push_back(bv.b_max[i]);
    }
    return out;
}

namespace {

std::string format_number(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

void write_contour_csv(const ContourGrid& grid, std::ostream& os) {
    os << "axis1,axis2,value\n";
    for (std::size_t i = 0; i < grid.axis1.size(); ++i)
        for (std::size_t j = 0; j < grid.axis2.size(); ++j) {
            os << format_number(grid.axis1[i]) << ',' << format_number(grid.axis2[j]) << ',';
            const double value = grid.values(i, j);
            if (!std::isnan(value)) os << format_number(value);
            os << '\n';
        }
}

void write_overlays_csv(const std::vector<ComparisonPoint>& points, std::ostream& os) {
    os << "kind,a,b,b_d,b_y,covariate\n";
    for (const ComparisonPoint& point : points)
        os << to_string(point.kind) << ',' << format_number(point.a_coord) << ','
           << format_number(point.b_coord) << ',' << format_number(point.b_d) << ','
           << format_number(point.b_y) << ',' << point.covariate << '\n';
}

}  // namespace pirsense
