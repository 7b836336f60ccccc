#include <cmath>
#include <sstream>

#include "doctest.h"
#include "pirsense/data.hpp"
#include "pirsense/simharness.hpp"

using namespace pirsense;

TEST_CASE("population covariances match the structural equations") {
    const CovarianceModel reg = population_covariance(ScenarioKind::regression);
    Matrix expected(4, 4);
    expected << 1, 0, 1, 2,
                0, 1, 1, 3,
                1, 1, 3, 6,
                2, 3, 6, 15;
    CHECK((reg.sigma() - expected).cwiseAbs().maxCoeff() < 1e-12);

    const CovarianceModel iv = population_covariance(ScenarioKind::iv);
    Matrix expected_iv(4, 4);
    expected_iv << 1, 0, 1, 2,
                   0, 1, 1, 1,
                   1, 1, 3, 4,
                   2, 1, 4, 7;
    CHECK((iv.sigma() - expected_iv).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("generated samples converge to the population covariance") {
    // entrywise tolerance 0.02 scaled by the entry's own size, since the
    // sampling error of a variance estimate grows with the variance
    auto close = [](const Matrix& sample, const Matrix& expected) {
        for (long i = 0; i < expected.rows(); ++i)
            for (long j = 0; j < expected.cols(); ++j)
                if (std::abs(sample(i, j) - expected(i, j)) >
                    0.02 * (1.0 + std::abs(expected(i, j))))
                    return false;
        return true;
    };
    const Dataset big = gen_regression(200000, 7);
    const Matrix sample = covariance_of(big.rows);
    const Matrix expected = population_covariance(ScenarioKind::regression).sigma();
    CHECK(close(sample, expected));

    const Dataset iv = gen_iv(200000, 8);
    const Matrix iv_sample = covariance_of(iv.rows);
    const Matrix iv_expected = population_covariance(ScenarioKind::iv).sigma();
    CHECK(close(iv_sample, iv_expected));
    // instrument moments implied by the equations
    CHECK(iv_expected(1, 2) == 1.0);  // cov(Z, D)
    CHECK(iv_expected(1, 3) == 1.0);  // cov(Z, Y)
}

TEST_CASE("generation is deterministic in the seed") {
    const Dataset a = gen_regression(50, 123);
    const Dataset b = gen_regression(50, 123);
    CHECK(a.rows == b.rows);
    const Dataset c = gen_regression(50, 124);
    CHECK(a.rows != c.rows);
    const Dataset d = gen_iv(50, 123);
    const Dataset e = gen_iv(50, 123);
    CHECK(d.rows == e.rows);
}

TEST_CASE("population region endpoints come from the pipeline") {
    const PirEstimate pir = population_pir(ScenarioKind::regression, GridParams{400, 50, 50});
    REQUIRE(pir.feasible);
    CHECK(std::abs(pir.lower - 1.0) < 2e-3);
    CHECK(std::abs(pir.upper - (3.0 + std::sqrt(3.0)) / 2.0) < 2e-3);

    // both comparative bounds are active at the minimizer
    const auto cov = population_covariance(ScenarioKind::regression);
    auto [theta, cc] = compile(scenario_model(ScenarioKind::regression), cov);
    const SensitivityPoint at_min = pir.argmin;
    CHECK(std::abs(std::abs(at_min.a) - cc.a.upper) < 1e-6);
    REQUIRE(at_min.d.has_value());
    CHECK(std::abs(std::abs(*at_min.d) - cc.d.upper) < 1e-6);

    const PirEstimate iv_pir = population_pir(ScenarioKind::iv, GridParams{400, 150, 150});
    REQUIRE(iv_pir.feasible);
    CHECK(iv_pir.lower <= 1.0);
    CHECK(iv_pir.upper >= 1.0);
    CHECK(iv_pir.upper - iv_pir.lower < 0.2);
}

TEST_CASE("coverage study plumbing") {
    SimScenario scenario;
    scenario.kind = ScenarioKind::regression;
    scenario.n = 200;
    scenario.reps = 4;
    scenario.boot = BootstrapSpec{40, 0.9, IntervalMethod::percentile, 0};
    scenario.grid = GridParams{60, 20, 20};
    scenario.methods = {"percentile", "basic", "heuristic", "oracle"};
    scenario.seed = 99;
    scenario.threads = 2;

    const auto rows = run_coverage(scenario);
    REQUIRE(rows.size() == 4);
    for (const auto& row : rows) {
        CHECK(row.failures == 0);
        CHECK(row.coverage_beta >= 0.0);
        CHECK(row.coverage_beta <= 1.0);
    }
    CHECK(std::isnan(rows[3].coverage_pir));  // oracle targets the effect only

    // deterministic across runs and thread counts
    SimScenario again = scenario;
    again.threads = 1;
    const auto rows2 = run_coverage(again);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].coverage_beta == rows2[i].coverage_beta);
        CHECK(((std::isnan(rows[i].mean_length) && std::isnan(rows2[i].mean_length)) ||
               rows[i].mean_length == rows2[i].mean_length));
    }

    std::ostringstream csv;
    write_coverage_csv(scenario, rows, csv);
    CHECK(csv.str().find("scenario,n,reps") == 0);
    CHECK(csv.str().find("regression,200,4,40,0.9,99,percentile") != std::string::npos);
    CHECK(format_table(rows).find("percentile") != std::string::npos);
}
