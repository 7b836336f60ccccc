#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pirsense/data.hpp"
#include "pirsense/gridopt.hpp"

namespace pirsense {

enum class IntervalMethod { percentile, basic, bca, heuristic };

const char* to_string(IntervalMethod method);
std::optional<IntervalMethod> interval_method_from_string(std::string_view name);

struct BootstrapSpec {
    int n_boot = 1000;
    double level = 0.95;
    IntervalMethod method = IntervalMethod::percentile;
    std::uint64_t seed = 0;
};

/// Interval covering the effect (or the whole identified region) at the
/// spec's nominal level. Endpoints may be +-infinity when degenerate
/// resamples contribute.
struct SensitivityInterval {
    double lower = 0.0;
    double upper = 0.0;
    IntervalMethod method = IntervalMethod::percentile;
    double level = 0.95;
    int n_infeasible_lower = 0;
    int n_infeasible_upper = 0;
};

/// Replicate distribution of the two region endpoints. Resamples with an
/// empty estimated constraint set contribute -inf / +inf.
struct BootstrapDistribution {
    std::vector<double> lowers;
    std::vector<double> uppers;
};

/// Resample rows with replacement, re-estimate and re-solve per replicate.
/// Replicate r uses the (seed, r) substream, so parallel and sequential runs
/// produce identical vectors. Raises ModelInfeasibleOnSample when the
/// full-sample point estimate itself is infeasible.
BootstrapDistribution bootstrap_distribution(const Dataset& data, const Roles& roles,
                                             const SensitivityModel& model,
                                             const GridParams& grid,
                                             const BootstrapSpec& spec, int threads = 1);

/// Leave-one-out endpoint estimates, used for the BCa acceleration.
BootstrapDistribution jackknife_distribution(const Dataset& data, const Roles& roles,
                                             const SensitivityModel& model,
                                             const GridParams& grid, int threads = 1);

/// Assemble the interval from the replicate vectors. `jackknife` is only
/// consulted by the BCa method.
SensitivityInterval assemble_interval(const BootstrapDistribution& dist,
                                      const PirEstimate& point, const BootstrapSpec& spec,
                                      const BootstrapDistribution* jackknife = nullptr);

/// Closed-form interval that treats the confounder as observed, minimized /
/// maximized over the gridded feasible boundary. Shown by simulation to lack
/// coverage guarantees; provided for comparison.
SensitivityInterval heuristic_interval(const EstimableParams& theta,
                                       const CompiledConstraints& cc, const GridParams& grid,
                                       long sample_size, double level, int threads = 1);

}  // namespace pirsense
