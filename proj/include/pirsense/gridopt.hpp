#pragma once

#include <cmath>
#include <vector>

#include "pirsense/sensmodel.hpp"

namespace pirsense {

/// Grid resolutions of the boundary search: points along a, along b during
/// the inner feasibility scan, and along g inside each b-candidate.
struct GridParams {
    int n_a = 200;
    int n_b = 200;
    int n_g = 200;
};

/// b from (a, d): the partial-correlation recursion solved for
/// R_{Y~U|X,Z,D}. Increasing in d for fixed a.
double b_given_d(double a, double d, double c1);

/// d from (a, e): the conditional-on-D comparative equality solved for
/// R_{Y~U|X,Z}. Increasing in e for fixed a.
double d_given_e(double a, double e, double c2, double c3, double c4);

/// f-scale transfer from m = R_{Z~U|X} to g = R_{Z~U|X,D} at fixed a.
/// Increasing in f_m.
double f_g_given_m(double a, double f_m, double c5);

/// f-scale transfer from g to o = R_{Y~Z|X,U,D} at fixed b.
double f_o_given_g(double b, double g, double f_c6);

/// f-scale value of q = R_{Y~xdot_j|...,Z,U,D} determined by (a, b).
double f_q_given_ab(double a, double b, double c7, double r_dj);

/// Per-slice boundary of the feasible set: for each grid value of a, the
/// minimal and maximal feasible b. NaN marks an infeasible slice.
struct BoundaryVectors {
    std::vector<double> a_values;
    std::vector<double> b_min;
    std::vector<double> b_max;

    int n_valid() const;
};

inline bool is_missing(double x) { return std::isnan(x); }

/// Estimated partially identified region. When no slice is feasible,
/// `feasible` is false and the endpoints stay unset (NaN); callers choose
/// how to encode that.
struct PirEstimate {
    double lower = std::nan("");
    double upper = std::nan("");
    SensitivityPoint argmin;
    SensitivityPoint argmax;
    BoundaryVectors boundary;
    bool feasible = false;
};

/// Discretize the boundary of the feasible set. Slices are independent and
/// may be computed in parallel; results do not depend on the thread count.
BoundaryVectors boundary(const CompiledConstraints& cc, const EstimableParams& theta,
                         const GridParams& grid, int threads = 1);

/// Minimize and maximize the causal effect over the discretized boundary.
PirEstimate solve_pir(const EstimableParams& theta, const CompiledConstraints& cc,
                      const GridParams& grid, int threads = 1);

/// All feasible b-candidates of one slice, scanned on the same grid the
/// boundary search uses. Without instrument constraints the whole interval
/// is feasible, so only the two endpoints are reported.
std::vector<double> feasible_b_candidates(const CompiledConstraints& cc,
                                          const EstimableParams& theta,
                                          const GridParams& grid, double a, double b_lo,
                                          double b_hi);

}  // namespace pirsense
