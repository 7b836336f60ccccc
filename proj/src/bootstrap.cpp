#include "pirsense/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pirsense/errors.hpp"
#include "pirsense/parallel.hpp"
#include "pirsense/r2calc.hpp"
#include "pirsense/stats.hpp"

namespace pirsense {

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

const char* to_string(IntervalMethod method) {
    switch (method) {
        case IntervalMethod::percentile: return "percentile";
        case IntervalMethod::basic: return "basic";
        case IntervalMethod::bca: return "bca";
        case IntervalMethod::heuristic: return "heuristic";
    }
    return "?";
}

std::optional<IntervalMethod> interval_method_from_string(std::string_view name) {
    for (IntervalMethod method : {IntervalMethod::percentile, IntervalMethod::basic,
                                  IntervalMethod::bca, IntervalMethod::heuristic})
        if (name == to_string(method)) return method;
    return std::nullopt;
}

namespace {

// Solve the plug-in problem on one covariance; empty constraint sets are
// encoded as the (-inf, +inf) endpoint pair rather than raised.
std::pair<double, double> endpoints_or_infinite(const Matrix& sigma,
                                                const std::vector<std::string>& names,
                                                const Roles& roles,
                                                const SensitivityModel& model,
                                                const GridParams& grid) {
    try {
        const CovarianceModel cov(names, sigma, roles);
        auto [theta, cc] = compile(model, cov);
        const PirEstimate est = solve_pir(theta, cc, grid);
        if (est.feasible) return {est.lower, est.upper};
    } catch (const Error&) {
        // degenerate resample; fall through to the conservative encoding
    }
    return {-kInf, kInf};
}

}  // namespace

BootstrapDistribution bootstrap_distribution(const Dataset& data, const Roles& roles,
                                             const SensitivityModel& model,
                                             const GridParams& grid,
                                             const BootstrapSpec& spec, int threads) {
    if (data.n() < 10) throw PreconditionViolated("bootstrap needs at least 10 rows");
    if (spec.n_boot < 1) throw PreconditionViolated("n_boot must be at least 1");

    {
        const CovarianceModel cov = covariance_from_rows(data, roles);
        auto [theta, cc] = compile(model, cov);
        if (!solve_pir(theta, cc, grid).feasible)
            throw ModelInfeasibleOnSample("point estimate has an empty constraint set");
    }

    BootstrapDistribution dist;
    dist.lowers.assign(spec.n_boot, 0.0);
    dist.uppers.assign(spec.n_boot, 0.0);
    parallel_for(spec.n_boot, threads, [&](int r) {
        SplitMix64 rng = substream(spec.seed, static_cast<std::uint64_t>(r));
        const Matrix sigma = resampled_covariance(data.rows, rng);
        const auto [lo, hi] = endpoints_or_infinite(sigma, data.names, roles, model, grid);
        dist.lowers[r] = lo;
        dist.uppers[r] = hi;
    });
    return dist;
}

BootstrapDistribution jackknife_distribution(const Dataset& data, const Roles& roles,
                                             const SensitivityModel& model,
                                             const GridParams& grid, int threads) {
    if (data.n() < 2) throw PreconditionViolated("jackknife needs at least 2 rows");
    const int n = static_cast<int>(data.n());
    BootstrapDistribution dist;
    dist.lowers.assign(n, 0.0);
    dist.uppers.assign(n, 0.0);
    parallel_for(n, threads, [&](int i) {
        const Matrix sigma = leave_one_out_covariance(data.rows, i);
        const auto [lo, hi] = endpoints_or_infinite(sigma, data.names, roles, model, grid);
        dist.lowers[i] = lo;
        dist.uppers[i] = hi;
    });
    return dist;
}

namespace {

int count_infinite(const std::vector<double>& values, double sign) {
    return static_cast<int>(std::count(values.begin(), values.end(), sign * kInf));
}

bool all_equal(const std::vector<double>& values) {
    return std::adjacent_find(values.begin(), values.end(),
                              [](double x, double y) { return x != y; }) == values.end();
}

// Jackknife acceleration: skewness of the leave-one-out estimates. Sides
// with non-finite leave-one-out values fall back to zero acceleration.
double acceleration(const std::vector<double>& jack) {
    double mean = 0.0;
    int n_finite = 0;
    for (double v : jack) {
        if (!std::isfinite(v)) return 0.0;
        mean += v;
        ++n_finite;
    }
    if (n_finite < 2) return 0.0;
    mean /= n_finite;
    double sum2 = 0.0, sum3 = 0.0;
    for (double v : jack) {
        const double diff = mean - v;
        sum2 += diff * diff;
        sum3 += diff * diff * diff;
    }
    if (sum2 <= 0.0) return 0.0;
    return sum3 / (6.0 * std::pow(sum2, 1.5));
}

// One BCa side: bias-corrected, acceleration-adjusted quantile level.
double bca_quantile(const std::vector<double>& replicates, double point, double accel,
                    double base_level) {
    if (all_equal(replicates)) {
        if (!std::isfinite(replicates.front()))
            throw DegenerateBca("all replicates on one side are infinite");
        return replicates.front();
    }
    const auto below = std::count_if(replicates.begin(), replicates.end(),
                                     [&](double v) { return v < point; });
    const double frac = static_cast<double>(below) / static_cast<double>(replicates.size());
    if (frac <= 0.0 || frac >= 1.0)
        throw DegenerateBca("bias correction is undefined for this replicate distribution");
    const double z0 = normal_quantile(frac);
    const double z = normal_quantile(base_level);
    const double adjusted = normal_cdf(z0 + (z0 + z) / (1.0 - accel * (z0 + z)));
    return quantile(replicates, adjusted);
}

}  // namespace

SensitivityInterval assemble_interval(const BootstrapDistribution& dist,
                                      const PirEstimate& point, const BootstrapSpec& spec,
                                      const BootstrapDistribution* jackknife) {
    if (dist.lowers.empty() || dist.uppers.empty())
        throw PreconditionViolated("replicate vectors must be nonempty");
    if (!(spec.level > 0.0 && spec.level < 1.0))
        throw PreconditionViolated("level must lie in (0, 1)");

    const double alpha = 1.0 - spec.level;
    SensitivityInterval out;
    out.method = spec.method;
    out.level = spec.level;
    out.n_infeasible_lower = count_infinite(dist.lowers, -1.0);
    out.n_infeasible_upper = count_infinite(dist.uppers, +1.0);

    switch (spec.method) {
        case IntervalMethod::percentile:
            out.lower = quantile(dist.lowers, alpha / 2.0);
            out.upper = quantile(dist.uppers, 1.0 - alpha / 2.0);
            break;
        case IntervalMethod::basic:
            if (!point.feasible)
                throw PreconditionViolated("basic bootstrap needs a feasible point estimate");
            out.lower = 2.0 * point.lower - quantile(dist.lowers, 1.0 - alpha / 2.0);
            out.upper = 2.0 * point.upper - quantile(dist.uppers, alpha / 2.0);
            break;
        case IntervalMethod::bca: {
            if (!point.feasible)
                throw PreconditionViolated("bca needs a feasible point estimate");
            if (jackknife == nullptr)
                throw PreconditionViolated("bca needs the jackknife distribution");
            out.lower = bca_quantile(dist.lowers, point.lower,
                                     acceleration(jackknife->lowers), alpha / 2.0);
            out.upper = bca_quantile(dist.uppers, point.upper,
                                     acceleration(jackknife->uppers), 1.0 - alpha / 2.0);
            break;
        }
        case IntervalMethod::heuristic:
            throw PreconditionViolated("heuristic intervals are not replicate-based");
    }
    return out;
}

SensitivityInterval heuristic_interval(const EstimableParams& theta,
                                       const CompiledConstraints& cc, const GridParams& grid,
                                       long sample_size, double level, int threads) {
    if (sample_size < 1) throw PreconditionViolated("sample size must be positive");
    if (!(level > 0.0 && level < 1.0)) throw PreconditionViolated("level must lie in (0, 1)");

    const BoundaryVectors bv = boundary(cc, theta, grid, threads);
    if (bv.n_valid() == 0)
        throw ModelInfeasibleOnSample("no feasible boundary slice");

    const double z = normal_quantile(1.0 - (1.0 - level) / 2.0) /
                     std::sqrt(static_cast<double>(sample_size));

    double lower = kInf, upper = -kInf;
    for (std::size_t i = 0; i < bv.a_values.size(); ++i) {
        const double a = bv.a_values[i];
        if (is_missing(a)) continue;
        const double f_a = r2calc::f_of_r(a);
        const double c = z / std::sqrt(1.0 - a * a);
        const double width = std::sqrt(f_a * f_a + c * c);

        // b f(a) + c sqrt(1-b^2) and -b f(a) + c sqrt(1-b^2) are concave in
        // b, so on a full interval their maxima sit at the clamped critical
        // points. With instrument constraints the feasible b-set may have
        // gaps; scan the same candidates the boundary search uses.
        std::vector<double> candidates;
        if (!cc.iv_link) {
            candidates = {std::clamp(f_a / width, bv.b_min[i], bv.b_max[i]),
                          std::clamp(-f_a / width, bv.b_min[i], bv.b_max[i])};
        } else {
            candidates = feasible_b_candidates(cc, theta, grid, a, bv.b_min[i], bv.b_max[i]);
        }
        for (double b : candidates) {
            const double shift = c * std::sqrt(std::max(0.0, 1.0 - b * b));
            lower = std::min(lower,
                             theta.beta_ols - (b * f_a + shift) * theta.sigma_ratio);
            upper = std::max(upper,
                             theta.beta_ols - (b * f_a - shift) * theta.sigma_ratio);
        }
    }

    SensitivityInterval out;
    out.method = IntervalMethod::heuristic;
    out.level = level;
    out.lower = lower;
    out.upper = upper;
    return out;
}

}  // namespace pirsense
