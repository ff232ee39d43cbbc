#include "sfofr/simulate.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "sfofr/errors.hpp"
#include "sfofr/inference.hpp"
#include "sfofr/logging.hpp"

namespace sfofr {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void SimulationConfig::validate() const {
    if (eta <= 0.0 || eta >= 1.0)
        throw InvalidArgumentError("SimulationConfig: eta must lie in (0,1)");
    if (grid_size < 3) throw InvalidArgumentError("SimulationConfig: grid_size must be >= 3");
    if (replications < 1)
        throw InvalidArgumentError("SimulationConfig: replications must be >= 1");
    if (n_train < 2) throw InvalidArgumentError("SimulationConfig: n_train must be >= 2");
    if (noise_sd < 0.0) throw InvalidArgumentError("SimulationConfig: negative noise_sd");
}

FunctionalSample gen_predictor(int n, const QuadratureGrid& grid, std::mt19937_64& rng) {
    const Eigen::Index m = grid.points.size();
    Eigen::MatrixXd cosines(10, m), sines(10, m);
    for (int k = 1; k <= 10; ++k) {
        const double decay = std::pow(static_cast<double>(k), -1.5) * std::sqrt(2.0);
        for (Eigen::Index r = 0; r < m; ++r) {
            cosines(k - 1, r) = decay * std::cos(k * kPi * grid.points[r]);
            sines(k - 1, r) = decay * std::sin(k * kPi * grid.points[r]);
        }
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd values(n, m);
    for (int i = 0; i < n; ++i) {
        Eigen::RowVectorXd nu1(10), nu2(10);
        for (int k = 0; k < 10; ++k) {
            nu1[k] = gauss(rng);
            nu2[k] = gauss(rng);
        }
        values.row(i) = nu1 * cosines + nu2 * sines;
    }
    return make_sample(std::move(values), grid);
}

double true_beta(double t, double s) { return 2.0 + s + t + 0.5 * std::sin(2.0 * kPi * s * t); }

double true_rho(double t, double u, double eta) {
    return eta * (1.0 + u * t) / (1.0 + std::abs(u - t));
}

Eigen::MatrixXd true_beta_surface(const Eigen::VectorXd& t_grid, const Eigen::VectorXd& s_grid) {
    Eigen::MatrixXd out(t_grid.size(), s_grid.size());
    for (Eigen::Index i = 0; i < t_grid.size(); ++i)
        for (Eigen::Index j = 0; j < s_grid.size(); ++j)
            out(i, j) = true_beta(t_grid[i], s_grid[j]);
    return out;
}

Eigen::MatrixXd true_rho_surface(const Eigen::VectorXd& t_grid, const Eigen::VectorXd& u_grid,
                                 double eta) {
    Eigen::MatrixXd out(t_grid.size(), u_grid.size());
    for (Eigen::Index i = 0; i < t_grid.size(); ++i)
        for (Eigen::Index j = 0; j < u_grid.size(); ++j)
            out(i, j) = true_rho(t_grid[i], u_grid[j], eta);
    return out;
}

FunctionalSample gen_response(const FunctionalSample& x, const SpatialWeights& w, double eta,
                              double noise_sd, std::mt19937_64& rng, double tol) {
    x.validate();
    const Eigen::Index n = x.size();
    const Eigen::Index m = x.num_points();
    const Eigen::MatrixXd beta_surf = true_beta_surface(x.grid.points, x.grid.points);
    const Eigen::MatrixXd x_weighted = x.values.leftCols(m - 1) * x.grid.weights.asDiagonal();
    FunctionalSample forcing{x_weighted * beta_surf.leftCols(m - 1).transpose(), x.grid};
    if (noise_sd > 0.0) {
        std::normal_distribution<double> gauss(0.0, noise_sd);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index r = 0; r < m; ++r) forcing.values(i, r) += gauss(rng);
    }
    const Eigen::MatrixXd rho_surf = true_rho_surface(x.grid.points, x.grid.points, eta);
    return neumann_fitted(w, rho_surf, forcing, tol);
}

namespace {

double riemann_ratio(const Eigen::MatrixXd& diff_sq, const Eigen::MatrixXd& truth_sq,
                     const Eigen::VectorXd& w_row, const Eigen::VectorXd& w_col) {
    const Eigen::Index r = w_row.size(), c = w_col.size();
    const double num = w_row.dot(diff_sq.topLeftCorner(r, c) * w_col);
    const double den = w_row.dot(truth_sq.topLeftCorner(r, c) * w_col);
    if (den <= 0.0) throw InvalidArgumentError("relative error: zero truth norm");
    return num / den;
}

}  // namespace

double rrispee(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth,
               const Eigen::VectorXd& grid_row, const Eigen::VectorXd& grid_col) {
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
        throw InvalidArgumentError("rrispee: surface grids differ");
    if (truth.rows() != grid_row.size() || truth.cols() != grid_col.size())
        throw InvalidArgumentError("rrispee: grid size mismatch");
    const Eigen::VectorXd w_row = quad_weights(grid_row).weights;
    const Eigen::VectorXd w_col = quad_weights(grid_col).weights;
    const Eigen::MatrixXd diff_sq = (estimate - truth).array().square();
    const Eigen::MatrixXd truth_sq = truth.array().square();
    return 100.0 * std::sqrt(riemann_ratio(diff_sq, truth_sq, w_row, w_col));
}

double rmspe(const FunctionalSample& pred, const FunctionalSample& truth) {
    if (pred.values.rows() != truth.values.rows() || pred.values.cols() != truth.values.cols())
        throw InvalidArgumentError("rmspe: sample shapes differ");
    const Eigen::Index m = truth.num_points();
    const Eigen::VectorXd& w = truth.grid.weights;
    const Eigen::MatrixXd diff_sq = (pred.values - truth.values).array().square();
    const Eigen::MatrixXd truth_sq = truth.values.array().square();
    const double num = (diff_sq.leftCols(m - 1) * w).sum();
    const double den = (truth_sq.leftCols(m - 1) * w).sum();
    if (den <= 0.0) throw InvalidArgumentError("rmspe: zero truth norm");
    return 100.0 * std::sqrt(num / den);
}

std::pair<double, double> rmse_r2(const FunctionalSample& pred, const FunctionalSample& obs) {
    if (pred.values.rows() != obs.values.rows() || pred.values.cols() != obs.values.cols())
        throw InvalidArgumentError("rmse_r2: sample shapes differ");
    const Eigen::Index m = obs.num_points();
    const Eigen::VectorXd& w = obs.grid.weights;
    const Eigen::MatrixXd diff_sq = (pred.values - obs.values).array().square();
    const Eigen::MatrixXd obs_sq = obs.values.array().square();
    const double num = (diff_sq.leftCols(m - 1) * w).sum();
    const double den = (obs_sq.leftCols(m - 1) * w).sum();
    if (den <= 0.0) throw InvalidArgumentError("rmse_r2: zero observation norm");
    const double rmse = 100.0 * std::sqrt(num / den);

    Eigen::MatrixXd centered = obs.values;
    centered.rowwise() -= obs.values.colwise().mean();
    const double var = (centered.array().square().matrix().leftCols(m - 1) * w).sum();
    if (var <= 0.0) throw NumericError("rmse_r2: zero response variance for R^2");
    return {rmse, 1.0 - num / var};
}

MetricTable monte_carlo(const SimulationConfig& config) {
    config.validate();
    const bool with_bootstrap = config.bootstrap_b > 0;
    const QuadratureGrid grid = uniform_grid(config.grid_size);
    const Eigen::MatrixXd beta_truth = true_beta_surface(grid.points, grid.points);
    const Eigen::MatrixXd rho_truth = true_rho_surface(grid.points, grid.points, config.eta);
    const LambdaGrid lambda_grid =
        config.lambda_grid.rho_values.size() > 0 ? config.lambda_grid : default_lambda_grid();

    MetricTable table;
    table.columns = {"rrispee_beta", "rrispee_rho", "rmspe"};
    if (with_bootstrap) {
        table.columns.insert(table.columns.end(),
                             {"cpd_beta", "cpd_rho", "score_beta", "score_rho"});
    }
    table.columns.push_back("seconds");

    const auto reps = static_cast<std::size_t>(config.replications);
    std::vector<std::vector<double>> results(reps);
    std::vector<char> ok(reps, 0);

    auto run_one = [&](std::size_t rep) {
        const auto start = std::chrono::steady_clock::now();
        std::mt19937_64 rng(substream_seed(config.seed, rep));

        const FunctionalSample x = gen_predictor(config.n_train, grid, rng);
        const SpatialWeights w = inverse_distance_weights(config.n_train);
        const FunctionalSample y =
            gen_response(x, w, config.eta, config.noise_sd, rng, config.fit.neumann_tol);

        // test units are generated independently, with no spatial coupling to
        // the training set; the prediction target is the noiseless response
        const FunctionalSample x_test = gen_predictor(config.n_test, grid, rng);
        const Eigen::Index m = grid.points.size();
        const Eigen::MatrixXd xw_test =
            x_test.values.leftCols(m - 1) * grid.weights.asDiagonal();
        const FunctionalSample y_test{xw_test * beta_truth.leftCols(m - 1).transpose(), grid};

        GridSearchResult sel = grid_search(y, x, w, lambda_grid, config.fit);

        std::vector<double> row;
        row.push_back(rrispee(sel.fit.beta_surface, beta_truth, grid.points, grid.points));
        row.push_back(rrispee(sel.fit.rho_surface, rho_truth, grid.points, grid.points));
        const FunctionalSample pred{
            xw_test * sel.fit.beta_surface.leftCols(m - 1).transpose(), grid};
        row.push_back(rmspe(pred, y_test));

        if (with_bootstrap) {
            const BootstrapSurfaces bands =
                bootstrap_ci(sel.fit, y, x, w, config.bootstrap_b, config.alpha,
                             substream_seed(config.seed, 1'000'000 + rep));
            row.push_back(cpd(beta_truth, bands, SurfaceKind::beta));
            row.push_back(cpd(rho_truth, bands, SurfaceKind::rho));
            row.push_back(interval_score(beta_truth, bands, SurfaceKind::beta));
            row.push_back(interval_score(rho_truth, bands, SurfaceKind::rho));
        }
        const auto elapsed = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
        row.push_back(elapsed);
        results[rep] = std::move(row);
        ok[rep] = 1;
    };

    auto run_guarded = [&](std::size_t rep) {
        try {
            run_one(rep);
        } catch (const std::exception& e) {
            log::warn("monte_carlo: replication " + std::to_string(rep) + " failed: " + e.what());
        }
    };

    if (config.jobs <= 1) {
        for (std::size_t rep = 0; rep < reps; ++rep) run_guarded(rep);
    } else {
        std::vector<std::thread> pool;
        const auto stride = static_cast<std::size_t>(config.jobs);
        for (std::size_t t = 0; t < stride; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t rep = t; rep < reps; rep += stride) run_guarded(rep);
            });
        for (auto& th : pool) th.join();
    }

    for (std::size_t rep = 0; rep < reps; ++rep) {
        if (ok[rep])
            table.rows.push_back(std::move(results[rep]));
        else
            ++table.failed;
    }
    if (table.rows.empty() || table.failed * 20 > config.replications)
        throw NumericError("monte_carlo: more than 5% of replications failed");

    const auto cols = table.columns.size();
    const double r = static_cast<double>(table.rows.size());
    table.means.assign(cols, 0.0);
    table.ses.assign(cols, std::numeric_limits<double>::quiet_NaN());
    for (const auto& row : table.rows)
        for (std::size_t c = 0; c < cols; ++c) table.means[c] += row[c] / r;
    if (table.rows.size() > 1) {
        for (std::size_t c = 0; c < cols; ++c) {
            double ss = 0.0;
            for (const auto& row : table.rows) {
                const double d = row[c] - table.means[c];
                ss += d * d;
            }
            table.ses[c] = std::sqrt(ss / (r - 1.0)) / std::sqrt(r);
        }
    }
    return table;
}

}  // namespace sfofr
