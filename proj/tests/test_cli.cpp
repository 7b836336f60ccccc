#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pirsense/analysis.hpp"
#include "pirsense/csv.hpp"
#include "pirsense/errors.hpp"
#include "pirsense/simharness.hpp"

using namespace pirsense;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / "pirsense_cli_test";
        fs::create_directories(path);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string regression_config(const std::string& csv_path, const std::string& extra = "") {
    std::ostringstream os;
    os << "[data]\ncsv = \"" << csv_path << "\"\n\n"
       << "[roles]\noutcome = \"Y\"\ntreatment = \"D\"\nxdot = [\"X\"]\n\n"
       << "[[bounds]]\nkind = \"comp_ud\"\ncompare = [\"X\"]\nb = 1.0\n\n"
       << "[[bounds]]\nkind = \"comp_uy_uncond_d\"\ncompare = [\"X\"]\nb = 0.4444444444444444\n\n"
       << "[grid]\nn_a = 200\nn_b = 40\nn_g = 40\n\n"
       << "[bootstrap]\nn_boot = 80\nlevel = 0.9\nmethod = \"percentile\"\nseed = 11\n"
       << extra;
    return os.str();
}

}  // namespace

TEST_CASE("csv ingestion") {
    std::istringstream toy("a,b\n1,2\n3,6\n");
    const Dataset data = read_csv(toy, "toy");
    REQUIRE(data.n() == 2);
    const Matrix cov = covariance_of(data.rows);
    // two-point variance with 1/n scaling
    CHECK(cov(0, 0) == doctest::Approx(1.0));
    CHECK(cov(1, 1) == doctest::Approx(4.0));
    CHECK(cov(0, 1) == doctest::Approx(2.0));

    std::istringstream quoted("\"a\",\"b\"\n\"1\",\" 2 \"\n3,4\n");
    CHECK(read_csv(quoted, "quoted").rows(0, 1) == 2.0);

    std::istringstream bad("a,b\n1,x\n3,4\n");
    CHECK_THROWS_AS(read_csv(bad, "bad"), NonNumericColumn);
    std::istringstream ragged("a,b\n1\n");
    CHECK_THROWS_AS(read_csv(ragged, "ragged"), ParseError);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_csv(empty, "empty"), ParseError);
}

TEST_CASE("constant columns fail the definiteness check") {
    std::istringstream constant("y,d,x\n1,2,5\n2,3,5\n3,5,5\n");
    const Dataset data = read_csv(constant, "constant");
    Roles roles;
    roles.outcome = 0;
    roles.treatment = 1;
    roles.xdot = {2};
    CHECK_THROWS_AS(covariance_from_rows(data, roles), SingularConditioningSet);
}

TEST_CASE("config parsing") {
    const std::string text =
        "# comment\n[data]\ncsv = \"d.csv\"\n\n[roles]\noutcome = \"y\"\ntreatment = \"d\"\n"
        "instrument = \"z\"\nxdot = [\"a\", \"b\"]\nxtilde = []\n\n"
        "[[bounds]]\nkind = \"comp_uy_cond_d\"\ncompare = [\"b\"]\ngiven_extra = []\nb = 5.0\n\n"
        "[[bounds]]\nkind = \"direct_uz\"\nlower = -0.002\nupper = 0.002\n\n"
        "[bootstrap]\nn_boot = 500\nlevel = 0.95\nmethod = \"bca\"\nseed = 3\n";
    const AnalysisConfig config = parse_config(text, "inline");
    CHECK(config.csv_path == "d.csv");
    CHECK(config.instrument == "z");
    REQUIRE(config.bounds.size() == 2);
    CHECK(config.bounds[0].kind == "comp_uy_cond_d");
    CHECK(config.bounds[0].compare == std::vector<std::string>{"b"});
    CHECK(config.bounds[0].b == 5.0);
    CHECK(config.bounds[1].lower == -0.002);
    CHECK(config.boot.method == IntervalMethod::bca);
    CHECK(config.boot.seed == 3);

    CHECK_THROWS_AS(parse_config("[data]\ncsv = \"x\"\noops\n", "inline"), ParseError);
    CHECK_THROWS_AS(parse_config("[data]\ncsv = \"x\"\nbad_key = 1\n[roles]\n"
                                 "outcome = \"y\"\ntreatment = \"d\"\n",
                                 "inline"),
                    ParseError);
    CHECK_THROWS_AS(parse_config("[roles]\noutcome = \"y\"\ntreatment = \"d\"\n", "inline"),
                    ParseError);
}

TEST_CASE("analysis run over generated data") {
    TempDir tmp;
    const Dataset data = gen_regression(500, 20240811).without_column("U");
    {
        std::ofstream os(tmp.file("reg.csv"), std::ios::binary);
        write_csv(data, os);
    }
    write_file(tmp.file("reg.toml"), regression_config(tmp.file("reg.csv")));

    const AnalysisConfig config = load_config(tmp.file("reg.toml"));
    const AnalysisResult result = run_analyze(config, 2);
    CHECK(result.exit_code == 0);
    const Json& doc = result.document;
    CHECK(doc.at("pir").at("feasible").get<bool>());
    CHECK(doc.at("pir").at("lower").get<double>() == doctest::Approx(1.0).epsilon(0.25));
    CHECK(doc.at("pir").at("upper").get<double>() == doctest::Approx(2.366).epsilon(0.25));
    CHECK(doc.at("interval").at("lower").get<double>() <
          doc.at("pir").at("lower").get<double>());
    CHECK(doc.at("interval").at("upper").get<double>() >
          doc.at("pir").at("upper").get<double>());

    // the document round-trips into an identical re-run
    const AnalysisConfig replay = config_from_json(doc.at("config"));
    const AnalysisResult again = run_analyze(replay, 1);
    CHECK(again.document == doc);
}

TEST_CASE("covariance input matches raw rows") {
    TempDir tmp;
    const Dataset data = gen_regression(400, 5).without_column("U");
    {
        std::ofstream os(tmp.file("rows.csv"), std::ios::binary);
        write_csv(data, os);
    }
    // covariance file computed from the same rows
    const Matrix cov = covariance_of(data.rows);
    {
        std::ofstream os(tmp.file("cov.csv"), std::ios::binary);
        os << "X,D,Y\n";
        os.precision(17);
        for (int i = 0; i < 3; ++i)
            os << cov(i, 0) << ',' << cov(i, 1) << ',' << cov(i, 2) << '\n';
    }
    write_file(tmp.file("rows.toml"),
               regression_config(tmp.file("rows.csv")));
    write_file(tmp.file("cov.toml"),
               "[data]\ncovariance = \"" + tmp.file("cov.csv") + "\"\nn = 400\n\n" +
                   "[roles]\noutcome = \"Y\"\ntreatment = \"D\"\nxdot = [\"X\"]\n\n" +
                   "[[bounds]]\nkind = \"comp_ud\"\ncompare = [\"X\"]\nb = 1.0\n\n" +
                   "[[bounds]]\nkind = \"comp_uy_uncond_d\"\ncompare = [\"X\"]\n"
                   "b = 0.4444444444444444\n\n" +
                   "[grid]\nn_a = 200\nn_b = 40\nn_g = 40\n\n" +
                   "[bootstrap]\nmethod = \"heuristic\"\nlevel = 0.9\nseed = 11\n");

    const AnalysisResult from_rows = run_analyze(load_config(tmp.file("rows.toml")), 1);
    const AnalysisResult from_cov = run_analyze(load_config(tmp.file("cov.toml")), 1);
    CHECK(from_rows.document.at("pir") == from_cov.document.at("pir"));
    CHECK(from_rows.document.at("theta") == from_cov.document.at("theta"));
}

TEST_CASE("column order does not change the analysis") {
    TempDir tmp;
    Dataset data = gen_regression(300, 9).without_column("U");
    {
        std::ofstream os(tmp.file("order1.csv"), std::ios::binary);
        write_csv(data, os);
    }
    // permute columns
    Dataset shuffled;
    shuffled.names = {data.names[2], data.names[0], data.names[1]};
    shuffled.rows.resize(data.rows.rows(), 3);
    shuffled.rows.col(0) = data.rows.col(2);
    shuffled.rows.col(1) = data.rows.col(0);
    shuffled.rows.col(2) = data.rows.col(1);
    {
        std::ofstream os(tmp.file("order2.csv"), std::ios::binary);
        write_csv(shuffled, os);
    }
    write_file(tmp.file("o1.toml"), regression_config(tmp.file("order1.csv")));
    write_file(tmp.file("o2.toml"), regression_config(tmp.file("order2.csv")));
    const AnalysisResult one = run_analyze(load_config(tmp.file("o1.toml")), 1);
    const AnalysisResult two = run_analyze(load_config(tmp.file("o2.toml")), 1);
    CHECK(one.document.at("pir") == two.document.at("pir"));
    CHECK(one.document.at("interval") == two.document.at("interval"));
}

TEST_CASE("infeasible point estimate signals exit code 2") {
    TempDir tmp;
    const Dataset data = gen_regression(200, 3).without_column("U");
    {
        std::ofstream os(tmp.file("inf.csv"), std::ios::binary);
        write_csv(data, os);
    }
    write_file(tmp.file("inf.toml"),
               "[data]\ncsv = \"" + tmp.file("inf.csv") + "\"\n\n" +
                   "[roles]\noutcome = \"Y\"\ntreatment = \"D\"\nxdot = [\"X\"]\n\n" +
                   "[[bounds]]\nkind = \"direct_ud\"\nlower = 0.0\nupper = 0.1\n\n" +
                   "[[bounds]]\nkind = \"comp_uy_uncond_d\"\ncompare = [\"X\"]\nb = 0.0\n\n" +
                   "[[bounds]]\nkind = \"direct_uy\"\nlower = 0.9\nupper = 0.95\n\n" +
                   "[bootstrap]\nseed = 1\n");
    const AnalysisResult result = run_analyze(load_config(tmp.file("inf.toml")), 1);
    CHECK(result.exit_code == 2);
    CHECK_FALSE(result.document.at("pir").at("feasible").get<bool>());
}

TEST_CASE("instrument bounds without instrument role fail early") {
    TempDir tmp;
    const Dataset data = gen_regression(200, 4).without_column("U");
    {
        std::ofstream os(tmp.file("noz.csv"), std::ios::binary);
        write_csv(data, os);
    }
    write_file(tmp.file("noz.toml"),
               "[data]\ncsv = \"" + tmp.file("noz.csv") + "\"\n\n" +
                   "[roles]\noutcome = \"Y\"\ntreatment = \"D\"\nxdot = [\"X\"]\n\n" +
                   "[[bounds]]\nkind = \"direct_uz\"\nlower = -0.1\nupper = 0.1\n\n" +
                   "[bootstrap]\nseed = 1\n");
    CHECK_THROWS_AS(run_analyze(load_config(tmp.file("noz.toml")), 1), RoleMismatch);
}

TEST_CASE("contour runs from a config") {
    TempDir tmp;
    const Dataset data = gen_regression(300, 6).without_column("U");
    {
        std::ofstream os(tmp.file("c.csv"), std::ios::binary);
        write_csv(data, os);
    }
    write_file(
        tmp.file("c.toml"),
        "[data]\ncsv = \"" + tmp.file("c.csv") + "\"\n\n" +
            "[roles]\noutcome = \"Y\"\ntreatment = \"D\"\nxdot = [\"X\"]\n\n" +
            "[[bounds]]\nkind = \"comp_ud\"\ncompare = [\"X\"]\nb = 1.0\naxis = 1\n"
            "axis_min = 0.1\naxis_max = 2.0\n\n" +
            "[[bounds]]\nkind = \"comp_uy_uncond_d\"\ncompare = [\"X\"]\nb = 0.444\naxis = 2\n"
            "axis_min = 0.1\naxis_max = 1.0\n\n" +
            "[grid]\nn_a = 60\nn_b = 20\nn_g = 20\n\n[bootstrap]\nseed = 1\n");

    ContourRequest request;
    request.type = 'b';
    request.resolution = 5;
    const ContourGrid grid = run_contour(load_config(tmp.file("c.toml")), request, 2);
    CHECK(grid.axis1.size() == 5);
    CHECK(grid.axis2.size() == 5);
    CHECK(grid.values.rows() == 5);

    ContourRequest r_request;
    r_request.type = 'r';
    r_request.resolution = 21;
    r_request.benchmarks = {"X:1.0"};
    const ContourGrid r_grid = run_contour(load_config(tmp.file("c.toml")), r_request, 1);
    CHECK(r_grid.axis1.size() == 21);
    CHECK(r_grid.overlays.size() == 3);  // two rigorous flavours plus the informal point
}
