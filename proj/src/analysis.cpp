#include "pirsense/analysis.hpp"

#include <chrono>
#include <cmath>

#include "pirsense/csv.hpp"
#include "pirsense/errors.hpp"

namespace pirsense {

namespace {

Json number_or_marker(double value) {
    if (std::isinf(value)) return value > 0 ? Json("inf") : Json("-inf");
    return Json(value);
}

SensitivityBound resolve_bound(const BoundConfig& bound, const std::vector<std::string>& xdot) {
    const auto kind = bound_kind_from_string(bound.kind);
    if (!kind) throw ParseError("unknown bound kind '" + bound.kind + "'");

    auto xdot_position = [&](const std::string& label) {
        for (std::size_t i = 0; i < xdot.size(); ++i)
            if (xdot[i] == label) return static_cast<int>(i);
        throw RoleMismatch("bound refers to '" + label + "', which is not an xdot covariate");
    };

    switch (*kind) {
        case BoundKind::direct_ud:
        case BoundKind::direct_uy:
        case BoundKind::direct_uz:
        case BoundKind::direct_zy:
            return SensitivityBound::direct(*kind, bound.lower, bound.upper);
        default: {
            std::vector<int> compare, given_extra;
            for (const auto& label : bound.compare) compare.push_back(xdot_position(label));
            for (const auto& label : bound.given_extra)
                given_extra.push_back(xdot_position(label));
            return SensitivityBound::comparative(*kind, std::move(compare), bound.b,
                                                 std::move(given_extra));
        }
    }
}

}  // namespace

AnalysisInputs build_inputs(const AnalysisConfig& config) {
    std::optional<Dataset> data;
    std::vector<std::string> names;
    Matrix sigma;
    long n = 0;

    if (!config.csv_path.empty()) {
        data = read_csv_file(config.csv_path);
        names = data->names;
        sigma = covariance_of(data->rows);
        n = data->n();
    } else {
        std::tie(names, sigma) = read_covariance_csv(config.cov_path);
        n = config.cov_n;
    }

    Dataset probe;  // only used for name resolution
    probe.names = names;
    const Roles roles = resolve_roles(probe, config.outcome, config.treatment,
                                      config.instrument, config.xdot, config.xtilde);

    SensitivityModel model;
    for (const BoundConfig& bound : config.bounds)
        model.bounds.push_back(resolve_bound(bound, config.xdot));

    CovarianceModel cov(names, std::move(sigma), roles);
    return {std::move(data), std::move(cov), roles, std::move(model), n};
}

Json config_to_json(const AnalysisConfig& config) {
    Json data;
    if (!config.csv_path.empty()) data["csv"] = config.csv_path;
    if (!config.cov_path.empty()) {
        data["covariance"] = config.cov_path;
        data["n"] = config.cov_n;
    }

    Json roles;
    roles["outcome"] = config.outcome;
    roles["treatment"] = config.treatment;
    if (!config.instrument.empty()) roles["instrument"] = config.instrument;
    roles["xdot"] = config.xdot;
    roles["xtilde"] = config.xtilde;

    Json bounds = Json::array();
    for (const BoundConfig& bound : config.bounds) {
        Json entry;
        entry["kind"] = bound.kind;
        if (bound.kind.rfind("direct", 0) == 0) {
            entry["lower"] = bound.lower;
            entry["upper"] = bound.upper;
        } else {
            entry["b"] = bound.b;
            entry["compare"] = bound.compare;
            entry["given_extra"] = bound.given_extra;
        }
        if (bound.axis != 0) {
            entry["axis"] = bound.axis;
            entry["axis_min"] = bound.axis_min;
            entry["axis_max"] = bound.axis_max;
        }
        bounds.push_back(entry);
    }

    Json doc;
    doc["data"] = data;
    doc["roles"] = roles;
    doc["bounds"] = bounds;
    doc["grid"] = {{"n_a", config.grid.n_a}, {"n_b", config.grid.n_b}, {"n_g", config.grid.n_g}};
    doc["bootstrap"] = {{"n_boot", config.boot.n_boot},
                        {"level", config.boot.level},
                        {"method", to_string(config.boot.method)},
                        {"seed", config.boot.seed}};
    return doc;
}

AnalysisConfig config_from_json(const Json& json) {
    AnalysisConfig config;
    const Json& data = json.at("data");
    config.csv_path = data.value("csv", "");
    config.cov_path = data.value("covariance", "");
    config.cov_n = data.value("n", 0L);

    const Json& roles = json.at("roles");
    config.outcome = roles.at("outcome").get<std::string>();
    config.treatment = roles.at("treatment").get<std::string>();
    config.instrument = roles.value("instrument", "");
    config.xdot = roles.value("xdot", std::vector<std::string>{});
    config.xtilde = roles.value("xtilde", std::vector<std::string>{});

    for (const Json& entry : json.at("bounds")) {
        BoundConfig bound;
        bound.kind = entry.at("kind").get<std::string>();
        bound.lower = entry.value("lower", 0.0);
        bound.upper = entry.value("upper", 0.0);
        bound.b = entry.value("b", 0.0);
        bound.compare = entry.value("compare", std::vector<std::string>{});
        bound.given_extra = entry.value("given_extra", std::vector<std::string>{});
        bound.axis = entry.value("axis", 0);
        bound.axis_min = entry.value("axis_min", 0.0);
        bound.axis_max = entry.value("axis_max", -1.0);
        config.bounds.push_back(std::move(bound));
    }

    const Json& grid = json.at("grid");
    config.grid.n_a = grid.at("n_a").get<int>();
    config.grid.n_b = grid.at("n_b").get<int>();
    config.grid.n_g = grid.at("n_g").get<int>();

    const Json& boot = json.at("bootstrap");
    config.boot.n_boot = boot.at("n_boot").get<int>();
    config.boot.level = boot.at("level").get<double>();
    config.boot.method = *interval_method_from_string(boot.at("method").get<std::string>());
    config.boot.seed = boot.at("seed").get<std::uint64_t>();
    return config;
}

AnalysisResult run_analyze(const AnalysisConfig& config, int threads, bool with_timing) {
    const auto started = std::chrono::steady_clock::now();
    const AnalysisInputs inputs = build_inputs(config);

    auto [theta, cc] = compile(inputs.model, inputs.cov);
    const PirEstimate point = solve_pir(theta, cc, config.grid, threads);

    Json doc;
    doc["tool"] = "pirsense";
    doc["config"] = config_to_json(config);
    doc["n"] = inputs.n;

    Json theta_json;
    theta_json["beta_ols"] = theta.beta_ols;
    if (theta.beta_tsls) theta_json["beta_tsls"] = *theta.beta_tsls;
    theta_json["sigma_ratio"] = theta.sigma_ratio;
    theta_json["c1"] = theta.c1;
    if (theta.c5) theta_json["c5"] = *theta.c5;
    if (theta.c6) theta_json["c6"] = *theta.c6;
    theta_json["comparative_rhs"] = theta.comparative_rhs;
    doc["theta"] = theta_json;

    Json cc_json;
    auto interval_json = [](const Interval& interval) {
        return Json::array({interval.lower, interval.upper});
    };
    cc_json["a"] = interval_json(cc.a);
    cc_json["b"] = interval_json(cc.b);
    cc_json["d"] = interval_json(cc.d);
    cc_json["m"] = interval_json(cc.m);
    cc_json["o"] = interval_json(cc.o);
    Json e_json = Json::array();
    for (const ConditionalYBound& eb : cc.e) e_json.push_back(eb.e_abs);
    cc_json["e_abs"] = e_json;
    Json zy_json = Json::array();
    for (const ZYBound& zy : cc.zy) zy_json.push_back(zy.factor);
    cc_json["zy_factors"] = zy_json;
    cc_json["d_link"] = cc.d_link;
    cc_json["iv_link"] = cc.iv_link;
    doc["constraints"] = cc_json;

    Json pir_json;
    pir_json["feasible"] = point.feasible;
    if (point.feasible) {
        pir_json["lower"] = point.lower;
        pir_json["upper"] = point.upper;
        pir_json["argmin"] = {{"a", point.argmin.a}, {"b", point.argmin.b}};
        pir_json["argmax"] = {{"a", point.argmax.a}, {"b", point.argmax.b}};
    }
    pir_json["n_slices"] = config.grid.n_a;
    pir_json["n_missing"] = config.grid.n_a - point.boundary.n_valid();
    doc["pir"] = pir_json;

    AnalysisResult result;
    if (!point.feasible) {
        doc["interval"] = nullptr;
        doc["diagnostics"] = {{"error", "infeasible point estimate"}};
        result.document = std::move(doc);
        result.exit_code = 2;
        return result;
    }

    SensitivityInterval interval;
    if (config.boot.method == IntervalMethod::heuristic) {
        interval =
            heuristic_interval(theta, cc, config.grid, inputs.n, config.boot.level, threads);
    } else {
        if (!inputs.data)
            throw PreconditionViolated(
                "bootstrap intervals need row-level data; use method = \"heuristic\" with "
                "covariance input");
        const BootstrapDistribution dist = bootstrap_distribution(
            *inputs.data, inputs.roles, inputs.model, config.grid, config.boot, threads);
        if (config.boot.method == IntervalMethod::bca) {
            const BootstrapDistribution jack = jackknife_distribution(
                *inputs.data, inputs.roles, inputs.model, config.grid, threads);
            interval = assemble_interval(dist, point, config.boot, &jack);
        } else {
            interval = assemble_interval(dist, point, config.boot, nullptr);
        }
    }

    Json interval_json_doc;
    interval_json_doc["method"] = to_string(interval.method);
    interval_json_doc["level"] = interval.level;
    interval_json_doc["lower"] = number_or_marker(interval.lower);
    interval_json_doc["upper"] = number_or_marker(interval.upper);
    interval_json_doc["n_infeasible_lower"] = interval.n_infeasible_lower;
    interval_json_doc["n_infeasible_upper"] = interval.n_infeasible_upper;
    doc["interval"] = interval_json_doc;

    Json diagnostics;
    diagnostics["n_missing_slices"] = config.grid.n_a - point.boundary.n_valid();
    if (with_timing) {
        const auto elapsed = std::chrono::steady_clock::now() - started;
        diagnostics["runtime_seconds"] =
            std::chrono::duration_cast<std::chrono::duration<double>>(elapsed).count();
    }
    doc["diagnostics"] = diagnostics;

    result.document = std::move(doc);
    return result;
}

ContourGrid run_contour(const AnalysisConfig& config, const ContourRequest& request,
                        int threads) {
    const AnalysisInputs inputs = build_inputs(config);
    auto [theta, cc] = compile(inputs.model, inputs.cov);

    ContourGrid grid;
    if (request.type == 'r') {
        const int res = request.resolution > 0 ? request.resolution : 400;
        grid = r_contour(theta, linspace(cc.a.lower, cc.a.upper, res),
                         linspace(-1.0, 1.0, res));
    } else {
        int axis1 = -1, axis2 = -1;
        for (std::size_t i = 0; i < config.bounds.size(); ++i) {
            if (config.bounds[i].axis == 1) axis1 = static_cast<int>(i);
            if (config.bounds[i].axis == 2) axis2 = static_cast<int>(i);
        }
        if (axis1 < 0 || axis2 < 0)
            throw ParseError("b-contour needs two bounds marked axis = 1 and axis = 2");
        const int res = request.resolution > 0 ? request.resolution : 30;
        auto axis_values = [&](int index) {
            const BoundConfig& bound = config.bounds[index];
            const double hi =
                bound.axis_max > bound.axis_min ? bound.axis_max : std::max(2.0 * bound.b, 1.0);
            return linspace(bound.axis_min, hi, res);
        };
        grid = b_contour(inputs.cov, inputs.model, axis1, axis2, axis_values(axis1),
                         axis_values(axis2), request.end, config.grid, threads);
    }
    grid.which_end = request.end;

    for (const std::string& spec : request.benchmarks) {
        const auto colon = spec.find(':');
        if (colon == std::string::npos)
            throw ParseError("benchmark must look like covariate:b, got '" + spec + "'");
        const std::string label = spec.substr(0, colon);
        const double b = std::stod(spec.substr(colon + 1));
        int position = -1;
        for (std::size_t i = 0; i < config.xdot.size(); ++i)
            if (config.xdot[i] == label) position = static_cast<int>(i);
        if (position < 0)
            throw RoleMismatch("benchmark covariate '" + label + "' is not in xdot");
        for (ComparisonPoint point : comparison_points(inputs.cov, position, b, b)) {
            point.out_of_range =
                grid.axis1.empty() || point.a_coord < grid.axis1.front() ||
                point.a_coord > grid.axis1.back() || point.b_coord < grid.axis2.front() ||
                point.b_coord > grid.axis2.back();
            grid.overlays.push_back(std::move(point));
        }
    }
    return grid;
}

}  // namespace pirsense
