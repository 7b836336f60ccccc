#include "pirsense/simharness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "pirsense/errors.hpp"
#include "pirsense/parallel.hpp"
#include "pirsense/stats.hpp"

namespace pirsense {

const char* to_string(ScenarioKind kind) {
    return kind == ScenarioKind::regression ? "regression" : "iv";
}

std::optional<ScenarioKind> scenario_from_string(std::string_view name) {
    if (name == "regression") return ScenarioKind::regression;
    if (name == "iv") return ScenarioKind::iv;
    return std::nullopt;
}

namespace {

// Structural coefficient matrix -> covariance of v = B v + eps with unit
// error variances: (I - B)^{-1} (I - B)^{-T}.
Matrix lsem_covariance(const Matrix& coefs) {
    const Matrix inv = (Matrix::Identity(coefs.rows(), coefs.cols()) - coefs).inverse();
    return inv * inv.transpose();
}

Matrix regression_coefs() {
    // columns/rows ordered U, X, D, Y
    Matrix coefs = Matrix::Zero(4, 4);
    coefs(2, 0) = 1.0;  // D <- U
    coefs(2, 1) = 1.0;  // D <- X
    coefs(3, 0) = 1.0;  // Y <- U
    coefs(3, 1) = 2.0;  // Y <- X
    coefs(3, 2) = 1.0;  // Y <- D
    return coefs;
}

Matrix iv_coefs() {
    // columns/rows ordered U, Z, D, Y
    Matrix coefs = Matrix::Zero(4, 4);
    coefs(2, 0) = 1.0;  // D <- U
    coefs(2, 1) = 1.0;  // D <- Z
    coefs(3, 0) = 1.0;  // Y <- U
    coefs(3, 2) = 1.0;  // Y <- D
    return coefs;
}

}  // namespace

Dataset gen_regression(int n, std::uint64_t seed) {
    Dataset data;
    data.names = {"U", "X", "D", "Y"};
    data.rows.resize(n, 4);
    SplitMix64 rng(mix64(seed));
    for (int i = 0; i < n; ++i) {
        const double u = rng.next_normal();
        const double x = rng.next_normal();
        const double d = x + u + rng.next_normal();
        const double y = d + 2.0 * x + u + rng.next_normal();
        data.rows.row(i) << u, x, d, y;
    }
    return data;
}

Dataset gen_iv(int n, std::uint64_t seed) {
    Dataset data;
    data.names = {"U", "Z", "D", "Y"};
    data.rows.resize(n, 4);
    SplitMix64 rng(mix64(seed));
    for (int i = 0; i < n; ++i) {
        const double u = rng.next_normal();
        const double z = rng.next_normal();
        const double d = z + u + rng.next_normal();
        const double y = d + u + rng.next_normal();
        data.rows.row(i) << u, z, d, y;
    }
    return data;
}

CovarianceModel population_covariance(ScenarioKind kind) {
    if (kind == ScenarioKind::regression) {
        Roles roles;
        roles.outcome = 3;
        roles.treatment = 2;
        roles.xdot = {1};
        return CovarianceModel({"U", "X", "D", "Y"}, lsem_covariance(regression_coefs()),
                               roles);
    }
    Roles roles;
    roles.outcome = 3;
    roles.treatment = 2;
    roles.instrument = 1;
    return CovarianceModel({"U", "Z", "D", "Y"}, lsem_covariance(iv_coefs()), roles);
}

SensitivityModel scenario_model(ScenarioKind kind) {
    SensitivityModel model;
    if (kind == ScenarioKind::regression) {
        model.bounds.push_back(
            SensitivityBound::comparative(BoundKind::comp_ud, {0}, 1.0));
        model.bounds.push_back(
            SensitivityBound::comparative(BoundKind::comp_uy_uncond_d, {0}, 4.0 / 9.0));
    } else {
        model.bounds.push_back(SensitivityBound::direct(BoundKind::direct_uz, -0.002, 0.002));
        model.bounds.push_back(SensitivityBound::direct(BoundKind::direct_zy, -0.002, 0.002));
    }
    return model;
}

Roles scenario_roles(ScenarioKind kind) {
    // roles within the observed columns, i.e. after dropping U
    Roles roles;
    roles.outcome = 2;
    roles.treatment = 1;
    if (kind == ScenarioKind::regression)
        roles.xdot = {0};
    else
        roles.instrument = 0;
    return roles;
}

PirEstimate population_pir(ScenarioKind kind, const GridParams& grid) {
    GridParams fine = grid;
    fine.n_a = std::max(fine.n_a, 400);
    const CovarianceModel cov = population_covariance(kind);
    auto [theta, cc] = compile(scenario_model(kind), cov);
    return solve_pir(theta, cc, fine);
}

namespace {

struct OneInterval {
    bool ok = false;
    double lower = 0.0;
    double upper = 0.0;
};

// Normal-theory interval for the treatment coefficient when the confounder
// is included as a regressor; a calibration check, not a sensitivity method.
OneInterval oracle_interval(const Dataset& full, ScenarioKind kind, double level) {
    const long n = full.n();
    const int d_col = full.index_of("D");
    std::vector<int> regressors{d_col, full.index_of("U")};
    if (kind == ScenarioKind::regression)
        regressors.push_back(full.index_of("X"));
    else
        regressors.push_back(full.index_of("Z"));

    const int k = static_cast<int>(regressors.size()) + 1;
    Matrix design(n, k);
    design.col(0).setOnes();
    for (std::size_t j = 0; j < regressors.size(); ++j)
        design.col(static_cast<int>(j) + 1) = full.rows.col(regressors[j]);
    const Vector response = full.rows.col(full.index_of("Y"));

    const Matrix gram = design.transpose() * design;
    const Eigen::LDLT<Matrix> ldlt(gram);
    const Vector coef = ldlt.solve(design.transpose() * response);
    const double rss = (response - design * coef).squaredNorm();
    const double sigma2 = rss / static_cast<double>(n - k);
    const Matrix gram_inv = ldlt.solve(Matrix::Identity(k, k));
    const double se = std::sqrt(sigma2 * gram_inv(1, 1));

    const double z = normal_quantile(1.0 - (1.0 - level) / 2.0);
    return {true, coef(1) - z * se, coef(1) + z * se};
}

double mean_of(const std::vector<double>& values) {
    if (values.empty()) return std::nan("");
    return std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
}

double median_of(std::vector<double> values) {
    if (values.empty()) return std::nan("");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

std::vector<CoverageRow> run_coverage(const SimScenario& scenario) {
    if (scenario.n < 10 || scenario.reps < 1)
        throw PreconditionViolated("scenario sizes must be positive");
    for (const std::string& method : scenario.methods)
        if (method != "oracle" && !interval_method_from_string(method))
            throw PreconditionViolated("unknown method: " + method);

    const SensitivityModel model = scenario_model(scenario.kind);
    const Roles roles = scenario_roles(scenario.kind);
    const PirEstimate truth = population_pir(scenario.kind, scenario.grid);
    const double beta_true = 1.0;

    const bool needs_boot =
        std::any_of(scenario.methods.begin(), scenario.methods.end(), [](const auto& m) {
            return m == "percentile" || m == "basic" || m == "bca";
        });
    const bool needs_jackknife =
        std::find(scenario.methods.begin(), scenario.methods.end(), "bca") !=
        scenario.methods.end();

    const int n_methods = static_cast<int>(scenario.methods.size());
    std::vector<OneInterval> results(static_cast<std::size_t>(scenario.reps) * n_methods);

    parallel_for(scenario.reps, scenario.threads, [&](int rep) {
        const std::uint64_t data_seed = derive_seed(scenario.seed, 2 * rep);
        const std::uint64_t boot_seed = derive_seed(scenario.seed, 2 * rep + 1);
        const Dataset full = scenario.kind == ScenarioKind::regression
                                 ? gen_regression(scenario.n, data_seed)
                                 : gen_iv(scenario.n, data_seed);
        const Dataset observed = full.without_column("U");

        bool pipeline_ok = false;
        EstimableParams theta;
        CompiledConstraints cc;
        PirEstimate point;
        try {
            const CovarianceModel cov = covariance_from_rows(observed, roles);
            std::tie(theta, cc) = compile(model, cov);
            point = solve_pir(theta, cc, scenario.grid);
            pipeline_ok = point.feasible;
        } catch (const Error&) {
            pipeline_ok = false;
        }

        BootstrapDistribution dist, jack;
        bool boot_ok = false;
        if (pipeline_ok && needs_boot) {
            try {
                BootstrapSpec spec = scenario.boot;
                spec.seed = boot_seed;
                dist = bootstrap_distribution(observed, roles, model, scenario.grid, spec);
                if (needs_jackknife)
                    jack = jackknife_distribution(observed, roles, model, scenario.grid);
                boot_ok = true;
            } catch (const Error&) {
                boot_ok = false;
            }
        }

        for (int mi = 0; mi < n_methods; ++mi) {
            const std::string& name = scenario.methods[mi];
            OneInterval& slot = results[static_cast<std::size_t>(rep) * n_methods + mi];
            try {
                if (name == "oracle") {
                    slot = oracle_interval(full, scenario.kind, scenario.boot.level);
                } else if (name == "heuristic") {
                    if (!pipeline_ok) continue;
                    const SensitivityInterval si = heuristic_interval(
                        theta, cc, scenario.grid, scenario.n, scenario.boot.level);
                    slot = {true, si.lower, si.upper};
                } else {
                    if (!boot_ok) continue;
                    BootstrapSpec spec = scenario.boot;
                    spec.method = *interval_method_from_string(name);
                    spec.seed = boot_seed;
                    const SensitivityInterval si = assemble_interval(
                        dist, point, spec, needs_jackknife ? &jack : nullptr);
                    slot = {true, si.lower, si.upper};
                }
            } catch (const Error&) {
                slot.ok = false;
            }
        }
    });

    std::vector<CoverageRow> rows;
    for (int mi = 0; mi < n_methods; ++mi) {
        CoverageRow row;
        row.method = scenario.methods[mi];
        int covered_beta = 0, covered_pir = 0;
        std::vector<double> lengths;
        for (int rep = 0; rep < scenario.reps; ++rep) {
            const OneInterval& slot = results[static_cast<std::size_t>(rep) * n_methods + mi];
            if (!slot.ok) {
                ++row.failures;
                continue;
            }
            const bool covers_beta = slot.lower <= beta_true && beta_true <= slot.upper;
            if (covers_beta) {
                ++covered_beta;
                lengths.push_back(beta_true - slot.lower);
            }
            if (slot.lower <= truth.lower && truth.upper <= slot.upper) ++covered_pir;
        }
        row.coverage_beta = static_cast<double>(covered_beta) / scenario.reps;
        row.coverage_pir = row.method == "oracle"
                               ? std::nan("")
                               : static_cast<double>(covered_pir) / scenario.reps;
        row.mean_length = mean_of(lengths);
        row.median_length = median_of(lengths);
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::string cell(double value, bool percent) {
    if (std::isnan(value)) return "-";
    std::ostringstream os;
    os << std::fixed << std::setprecision(percent ? 1 : 3);
    if (percent)
        os << 100.0 * value << '%';
    else
        os << value;
    return os.str();
}

}  // namespace

std::string format_table(const std::vector<CoverageRow>& rows) {
    std::ostringstream os;
    os << std::left << std::setw(12) << "method" << std::right << std::setw(10) << "cov(beta)"
       << std::setw(10) << "cov(PIR)" << std::setw(12) << "mean len" << std::setw(12)
       << "median len" << std::setw(10) << "failures" << '\n';
    for (const CoverageRow& row : rows) {
        os << std::left << std::setw(12) << row.method << std::right << std::setw(10)
           << cell(row.coverage_beta, true) << std::setw(10) << cell(row.coverage_pir, true)
           << std::setw(12) << cell(row.mean_length, false) << std::setw(12)
           << cell(row.median_length, false) << std::setw(10) << row.failures << '\n';
    }
    return os.str();
}

void write_coverage_csv(const SimScenario& scenario, const std::vector<CoverageRow>& rows,
                        std::ostream& os) {
    os << "scenario,n,reps,n_boot,level,seed,method,coverage_beta,coverage_pir,"
          "mean_length,median_length,failures\n";
    for (const CoverageRow& row : rows) {
        os << to_string(scenario.kind) << ',' << scenario.n << ',' << scenario.reps << ','
           << scenario.boot.n_boot << ',' << scenario.boot.level << ',' << scenario.seed
           << ',' << row.method << ',';
        auto emit = [&os](double value) {
            if (!std::isnan(value)) {
                std::ostringstream tmp;
                tmp.precision(17);
                tmp << value;
                os << tmp.str();
            }
            os << ',';
        };
        emit(row.coverage_beta);
        emit(row.coverage_pir);
        emit(row.mean_length);
        emit(row.median_length);
        os << row.failures << '\n';
    }
}

}  // namespace pirsense
