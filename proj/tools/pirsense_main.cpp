#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "pirsense/analysis.hpp"
#include "pirsense/csv.hpp"
#include "pirsense/errors.hpp"
#include "pirsense/simharness.hpp"

namespace {

using pirsense::AnalysisConfig;
using pirsense::Json;

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw pirsense::ParseError("cannot open " + path + " for writing");
    out << text;
}

AnalysisConfig load_effective_config(const std::string& config_path,
                                     const std::string& result_path) {
    if (!result_path.empty()) {
        std::ifstream in(result_path, std::ios::binary);
        if (!in) throw pirsense::ParseError("cannot open " + result_path);
        Json doc = Json::parse(in);
        return pirsense::config_from_json(doc.at("config"));
    }
    return pirsense::load_config(config_path);
}

int run_analyze_cmd(const std::string& config_path, const std::string& result_path,
                    const std::string& out_override, std::uint64_t seed, bool seed_set,
                    int threads, bool with_timing) {
    AnalysisConfig config = load_effective_config(config_path, result_path);
    if (seed_set) config.boot.seed = seed;
    if (!out_override.empty()) config.out_path = out_override;

    const pirsense::AnalysisResult result = pirsense::run_analyze(config, threads, with_timing);
    const std::string text = result.document.dump(2) + "\n";
    if (config.out_path.empty())
        std::cout << text;
    else
        write_text_file(config.out_path, text);
    return result.exit_code;
}

int run_contour_cmd(const std::string& config_path, const pirsense::ContourRequest& request,
                    const std::string& out_path, const std::string& format, int threads) {
    const AnalysisConfig config = pirsense::load_config(config_path);
    const pirsense::ContourGrid grid = pirsense::run_contour(config, request, threads);

    const std::string base = out_path.empty() ? "contour" : out_path;
    if (format == "json") {
        Json doc;
        doc["type"] = request.type == 'r' ? "r" : "b";
        doc["which_end"] = pirsense::to_string(grid.which_end);
        doc["axis1"] = grid.axis1;
        doc["axis2"] = grid.axis2;
        Json values = Json::array();
        for (long i = 0; i < grid.values.rows(); ++i) {
            Json row = Json::array();
            for (long j = 0; j < grid.values.cols(); ++j) {
                const double v = grid.values(i, j);
                row.push_back(std::isnan(v) ? Json(nullptr) : Json(v));
            }
            values.push_back(row);
        }
        doc["values"] = values;
        Json overlays = Json::array();
        for (const auto& point : grid.overlays)
            overlays.push_back({{"kind", pirsense::to_string(point.kind)},
                                {"a", point.a_coord},
                                {"b", point.b_coord},
                                {"b_d", point.b_d},
                                {"b_y", point.b_y},
                                {"covariate", point.covariate},
                                {"out_of_range", point.out_of_range}});
        doc["overlays"] = overlays;
        write_text_file(base + ".json", doc.dump(2) + "\n");
        std::cerr << "wrote " << base << ".json\n";
    } else {
        {
            std::ofstream os(base + ".csv", std::ios::binary);
            pirsense::write_contour_csv(grid, os);
        }
        {
            std::ofstream os(base + "_overlays.csv", std::ios::binary);
            pirsense::write_overlays_csv(grid.overlays, os);
        }
        std::cerr << "wrote " << base << ".csv and " << base << "_overlays.csv\n";
    }
    return 0;
}

int run_simulate_cmd(const pirsense::SimScenario& scenario, const std::string& out_path) {
    const std::vector<pirsense::CoverageRow> rows = pirsense::run_coverage(scenario);
    std::cout << pirsense::format_table(rows);
    if (!out_path.empty()) {
        std::ofstream os(out_path, std::ios::binary);
        if (!os) throw pirsense::ParseError("cannot open " + out_path + " for writing");
        pirsense::write_coverage_csv(scenario, rows, os);
        std::cerr << "wrote " << out_path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Partially identified regions and sensitivity intervals for linear "
                 "causal effects under unmeasured confounding"};
    app.require_subcommand(1);
    app.fallthrough();

    int threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    app.add_option("--threads", threads, "Upper bound on worker threads")
        ->check(CLI::PositiveNumber);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Estimate the identified region and interval");
    std::string config_path, from_result, out_override;
    std::uint64_t seed = 0;
    bool with_timing = false;
    auto* config_opt = analyze->add_option("-c,--config", config_path, "TOML config file");
    auto* from_opt = analyze->add_option("--from-result", from_result,
                                         "Re-run the configuration embedded in a result file");
    analyze->add_option("-o,--out", out_override, "Result path (default: stdout)");
    auto* seed_opt = analyze->add_option("--seed", seed, "Bootstrap seed override");
    analyze->add_flag("--timing", with_timing, "Include runtime in the result document");
    config_opt->excludes(from_opt);

    // contour
    auto* contour = app.add_subcommand("contour", "Emit contour grids as data files");
    std::string contour_config, contour_out, contour_format = "csv", contour_type = "b",
                contour_end = "lower";
    int contour_res = 0;
    std::vector<std::string> benchmarks;
    contour->add_option("-c,--config", contour_config, "TOML config file")->required();
    contour->add_option("--type", contour_type, "Grid type: b or r")
        ->check(CLI::IsMember({"b", "r"}));
    contour->add_option("--end", contour_end, "Which region end to chart")
        ->check(CLI::IsMember({"lower", "upper"}));
    contour->add_option("--res", contour_res, "Points per axis (default 30 for b, 400 for r)");
    contour->add_option("--benchmarks", benchmarks,
                        "Comparison points as covariate:b pairs (repeatable)");
    contour->add_option("-o,--out", contour_out, "Output basename (default 'contour')");
    contour->add_option("--format", contour_format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Run a coverage study");
    pirsense::SimScenario scenario;
    std::string scenario_name = "regression", sim_out;
    std::uint64_t sim_seed = 0;
    simulate->add_option("--scenario", scenario_name, "regression or iv")
        ->check(CLI::IsMember({"regression", "iv"}));
    simulate->add_option("--n", scenario.n, "Sample size per experiment");
    simulate->add_option("--reps", scenario.reps, "Number of experiments");
    simulate->add_option("--boot", scenario.boot.n_boot, "Bootstrap replicates");
    simulate->add_option("--level", scenario.boot.level, "Nominal level");
    simulate
        ->add_option("--methods", scenario.methods,
                     "Comma-separated subset of percentile, basic, bca, heuristic, oracle")
        ->delimiter(',');
    simulate->add_option("--grid", scenario.grid.n_a, "Grid points per dimension");
    simulate->add_option("--seed", sim_seed, "Experiment seed")->required();
    simulate->add_option("-o,--out", sim_out, "CSV output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) {
            if (config_path.empty() && from_result.empty())
                throw pirsense::ParseError("analyze needs --config or --from-result");
            return run_analyze_cmd(config_path, from_result, out_override, seed,
                                   seed_opt->count() > 0, threads, with_timing);
        }
        if (*contour) {
            pirsense::ContourRequest request;
            request.type = contour_type == "r" ? 'r' : 'b';
            request.end = contour_end == "upper" ? pirsense::PirEnd::upper
                                                 : pirsense::PirEnd::lower;
            request.resolution = contour_res;
            request.benchmarks = benchmarks;
            return run_contour_cmd(contour_config, request, contour_out, contour_format,
                                   threads);
        }
        if (*simulate) {
            scenario.kind = *pirsense::scenario_from_string(scenario_name);
            scenario.seed = sim_seed;
            scenario.threads = threads;
            scenario.grid.n_b = scenario.grid.n_a;
            scenario.grid.n_g = scenario.grid.n_a;
            return run_simulate_cmd(scenario, sim_out);
        }
    } catch (const pirsense::Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
