#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pirsense/bootstrap.hpp"

namespace pirsense {

/// One [[bounds]] entry as written in the config file; labels are resolved
/// against the data columns later. `axis` marks the bound whose b-factor
/// spans a contour axis (1 or 2), with an optional explicit range.
struct BoundConfig {
    std::string kind;
    double lower = 0.0;
    double upper = 0.0;
    double b = 0.0;
    std::vector<std::string> compare;
    std::vector<std::string> given_extra;
    int axis = 0;
    double axis_min = 0.0;
    double axis_max = -1.0;  ///< empty range means "derive from b"
};

/// Parsed analysis configuration: the [data], [roles], [[bounds]], [grid],
/// [bootstrap] and [output] sections of a config file.
struct AnalysisConfig {
    std::string csv_path;
    std::string cov_path;
    long cov_n = 0;

    std::string outcome;
    std::string treatment;
    std::string instrument;
    std::vector<std::string> xdot;
    std::vector<std::string> xtilde;

    std::vector<BoundConfig> bounds;
    GridParams grid;
    BootstrapSpec boot;

    std::string out_path;
    std::string out_format = "json";
};

/// Parse the TOML config dialect used by the CLI. Unknown keys raise
/// ParseError so typos do not silently change an analysis.
AnalysisConfig parse_config(const std::string& text, const std::string& origin);
AnalysisConfig load_config(const std::string& path);

}  // namespace pirsense
