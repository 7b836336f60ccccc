#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "pirsense/config.hpp"
#include "pirsense/contour.hpp"

namespace pirsense {

using Json = nlohmann::ordered_json;

/// Everything an analysis run needs, resolved from a config: the data (when
/// row-level input was given), the covariance model, and the bound set.
struct AnalysisInputs {
    std::optional<Dataset> data;
    CovarianceModel cov;
    Roles roles;
    SensitivityModel model;
    long n = 0;
};

AnalysisInputs build_inputs(const AnalysisConfig& config);

/// The full effective configuration, embedded into every result document so
/// a run can be reproduced from its output alone.
Json config_to_json(const AnalysisConfig& config);
AnalysisConfig config_from_json(const Json& json);

struct AnalysisResult {
    Json document;
    int exit_code = 0;  // 0 ok, 2 infeasible point estimate
};

/// Point estimate, compiled constraint summary and sensitivity interval as a
/// JSON document. Infinite endpoints serialize as the strings "inf"/"-inf".
AnalysisResult run_analyze(const AnalysisConfig& config, int threads,
                           bool with_timing = false);

/// Contour generation driven by the same config; returns the grid plus
/// overlay points for the requested benchmarks ("covariate:b" strings).
struct ContourRequest {
    char type = 'b';  // 'b' or 'r'
    PirEnd end = PirEnd::lower;
    int resolution = 0;  // 0 means the type's default
    std::vector<std::string> benchmarks;
};

ContourGrid run_contour(const AnalysisConfig& config, const ContourRequest& request,
                        int threads);

}  // namespace pirsense
