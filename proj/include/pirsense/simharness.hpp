#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pirsense/bootstrap.hpp"

namespace pirsense {

enum class ScenarioKind { regression, iv };

const char* to_string(ScenarioKind kind);
std::optional<ScenarioKind> scenario_from_string(std::string_view name);

/// One coverage experiment: DGP, scale, interval methods to score.
struct SimScenario {
    ScenarioKind kind = ScenarioKind::regression;
    int n = 500;
    int reps = 300;
    BootstrapSpec boot{500, 0.90, IntervalMethod::percentile, 0};
    GridParams grid{200, 200, 200};
    std::vector<std::string> methods{"percentile"};
    std::uint64_t seed = 0;
    int threads = 1;
};

/// Aggregated scores of one interval method. Lengths follow the convention
/// of measuring the distance from the interval's lower end to the true
/// effect over the experiments that cover it. coverage_pir is NaN for the
/// oracle method, which targets the effect only.
struct CoverageRow {
    std::string method;
    double coverage_beta = 0.0;
    double coverage_pir = 0.0;
    double mean_length = 0.0;
    double median_length = 0.0;
    int failures = 0;
};

/// Draw n rows of the regression design; columns U, X, D, Y.
Dataset gen_regression(int n, std::uint64_t seed);

/// Draw n rows of the instrumental-variable design; columns U, Z, D, Y.
Dataset gen_iv(int n, std::uint64_t seed);

/// Population covariance implied by the scenario's structural equations.
CovarianceModel population_covariance(ScenarioKind kind);

/// The sensitivity model each scenario is scored under.
SensitivityModel scenario_model(ScenarioKind kind);

/// Roles of the observed columns (the confounder column withheld).
Roles scenario_roles(ScenarioKind kind);

/// Identified-region truth, recomputed from the population covariance by the
/// regular pipeline.
PirEstimate population_pir(ScenarioKind kind, const GridParams& grid);

/// Run the coverage study; one row per requested method.
std::vector<CoverageRow> run_coverage(const SimScenario& scenario);

/// Aligned text table of the results.
std::string format_table(const std::vector<CoverageRow>& rows);

/// CSV rows including the scenario metadata columns.
void write_coverage_csv(const SimScenario& scenario, const std::vector<CoverageRow>& rows,
                        std::ostream& os);

}  // namespace pirsense
