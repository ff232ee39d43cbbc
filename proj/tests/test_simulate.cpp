#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "sfofr/sample.hpp"
#include "sfofr/simulate.hpp"
#include "sfofr/spatial.hpp"

using namespace sfofr;

TEST_CASE("true surfaces at pinned points") {
    CHECK(true_beta(0.0, 0.0) == doctest::Approx(2.0));
    CHECK(true_beta(1.0, 1.0) == doctest::Approx(4.0));
    CHECK(true_beta(0.5, 0.5) == doctest::Approx(3.0 + 0.5 * std::sin(M_PI / 2.0)));
    CHECK(true_rho(0.7, 0.7, 0.3) == doctest::Approx(0.3 * (1 + 0.49)));
    CHECK(true_rho(1.0, 1.0, 0.5) == doctest::Approx(1.0));
    CHECK(true_rho(0.0, 1.0, 0.9) == doctest::Approx(0.45));
}

TEST_CASE("gen_predictor moments match the truncated Fourier series") {
    QuadratureGrid grid = uniform_grid(21);
    std::mt19937_64 rng(301);
    FunctionalSample x = gen_predictor(10000, grid, rng);
    // Mean curve close to zero.
    Eigen::VectorXd mean = x.values.colwise().mean();
    CHECK(mean.cwiseAbs().maxCoeff() < 0.05);
    // Pointwise variance at s=0: only cosine terms, sum 2 k^-3 ~ 2 zeta(3).
    double var0 = (x.values.col(0).array() - mean(0)).square().mean();
    double target = 0.0;
    for (int k = 1; k <= 10; ++k) target += 2.0 / (static_cast<double>(k) * k * k);
    CHECK(std::abs(var0 - target) / target < 0.05);
}

TEST_CASE("gen_response limits and dense oracle") {
    QuadratureGrid grid = uniform_grid(21);
    std::mt19937_64 rng(303);
    FunctionalSample x = gen_predictor(4, grid, rng);
    SpatialWeights w = inverse_distance_weights(4);

    // eta -> 0: response reduces to the integral term plus noise; with no
    // noise, one Neumann term suffices.
    std::mt19937_64 r1(5), r2(5);
    FunctionalSample y_small = gen_response(x, w, 1e-13, 0.0, r1);
    Eigen::MatrixXd direct(4, 21);
    for (int i = 0; i < 4; ++i)
        for (int ti = 0; ti < 21; ++ti) {
            double acc = 0.0;
            for (int r = 0; r + 1 < 21; ++r)
                acc += grid.weights(r) * x.values(i, r) * true_beta(grid.points(ti), grid.points(r));
            direct(i, ti) = acc;
        }
    CHECK((y_small.values - direct).cwiseAbs().maxCoeff() < 1e-9);

    // Zero predictor and zero noise give a zero response.
    FunctionalSample zero = make_sample(Eigen::MatrixXd::Zero(4, 21), grid);
    FunctionalSample y0 = gen_response(zero, w, 0.5, 0.0, r2);
    CHECK(y0.values.cwiseAbs().maxCoeff() == 0.0);

    // Dense (I - A)^-1 f oracle at eta = 0.4.
    std::mt19937_64 r3(7);
    FunctionalSample y = gen_response(x, w, 0.4, 0.0, r3);
    int n = 4, m = 21;
    Eigen::MatrixXd rho = true_rho_surface(grid.points, grid.points, 0.4);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n * m, n * m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int ti = 0; ti < m; ++ti)
                for (int uj = 0; uj + 1 < m; ++uj)
                    a(i * m + ti, j * m + uj) = w.matrix(i, j) * rho(ti, uj) * grid.weights(uj);
    Eigen::VectorXd f(n * m);
    for (int i = 0; i < n; ++i) f.segment(i * m, m) = direct.row(i).transpose();
    Eigen::VectorXd sol = (Eigen::MatrixXd::Identity(n * m, n * m) - a).partialPivLu().solve(f);
    double max_diff = 0.0;
    for (int i = 0; i < n; ++i)
        max_diff = std::max(max_diff, (y.values.row(i).transpose() - sol.segment(i * m, m))
                                          .cwiseAbs()
                                          .maxCoeff());
    CHECK(max_diff < 0.001);

    // Halving the tolerance changes the output by less than the original tol.
    std::mt19937_64 r4(7), r5(7);
    FunctionalSample ya = gen_response(x, w, 0.4, 0.0, r4, 0.001);
    FunctionalSample yb = gen_response(x, w, 0.4, 0.0, r5, 0.0005);
    CHECK((ya.values - yb.values).cwiseAbs().maxCoeff() < 0.001);
}

TEST_CASE("metric identities") {
    Eigen::VectorXd g = Eigen::VectorXd::LinSpaced(31, 0.0, 1.0);
    Eigen::MatrixXd truth(31, 31);
    for (int i = 0; i < 31; ++i)
        for (int j = 0; j < 31; ++j) truth(i, j) = true_beta(g(i), g(j));

    CHECK(rrispee(truth, truth, g, g) == doctest::Approx(0.0));
    CHECK(rrispee(Eigen::MatrixXd::Zero(31, 31), truth, g, g) == doctest::Approx(100.0));
    CHECK(rrispee(1.1 * truth, truth, g, g) == doctest::Approx(10.0).epsilon(1e-9));

    QuadratureGrid grid = uniform_grid(31);
    std::mt19937_64 rng(311);
    FunctionalSample t = gen_predictor(15, grid, rng);
    FunctionalSample pred = t;
    CHECK(rmspe(pred, t) == doctest::Approx(0.0));
    pred.values.setZero();
    CHECK(rmspe(pred, t) == doctest::Approx(100.0).epsilon(1e-9));
    pred.values = 1.1 * t.values;
    CHECK(rmspe(pred, t) == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("rmse_r2 identities") {
    QuadratureGrid grid = uniform_grid(31);
    std::mt19937_64 rng(313);
    FunctionalSample obs = gen_predictor(12, grid, rng);
    auto [rmse0, r2_1] = rmse_r2(obs, obs);
    CHECK(rmse0 == doctest::Approx(0.0));
    CHECK(r2_1 == doctest::Approx(1.0));

    // Predicting the cross-sectional mean curve gives R^2 = 0.
    FunctionalSample meanpred = obs;
    Eigen::RowVectorXd mean = obs.values.colwise().mean();
    for (int i = 0; i < meanpred.values.rows(); ++i) meanpred.values.row(i) = mean;
    auto [rmse_m, r2_0] = rmse_r2(meanpred, obs);
    CHECK(r2_0 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rmse_m > 0.0);
}

TEST_CASE("monte_carlo determinism, disjoint sets, single-rep SEs") {
    SimulationConfig cfg;
    cfg.n_train = 25;
    cfg.n_test = 25;
    cfg.eta = 0.2;
    cfg.grid_size = 41;
    cfg.seed = 5;
    cfg.replications = 2;
    cfg.noise_sd = 0.02;
    cfg.fit.k_y = 6;
    cfg.fit.k_x = 6;
    cfg.lambda_grid.rho_values = Eigen::VectorXd::LinSpaced(2, 0.001, 0.1);
    cfg.lambda_grid.beta_values = Eigen::VectorXd::LinSpaced(2, 0.001, 0.1);

    MetricTable t1 = monte_carlo(cfg);
    MetricTable t2 = monte_carlo(cfg);
    REQUIRE(t1.rows.size() == 2);
    CHECK(t1.columns == t2.columns);
    for (size_t r = 0; r < t1.rows.size(); ++r)
        for (size_t c = 0; c < t1.rows[r].size(); ++c) {
            if (t1.columns[c] == "seconds") continue;  // wall clock varies
            CHECK(t1.rows[r][c] == t2.rows[r][c]);
        }
    for (size_t c = 0; c + 1 < t1.columns.size(); ++c) {
        CHECK(t1.means[c] >= 0.0);
        CHECK(t1.ses[c] >= 0.0);
    }

    cfg.replications = 1;
    MetricTable single = monte_carlo(cfg);
    REQUIRE(single.rows.size() == 1);
    for (size_t c = 0; c < single.columns.size(); ++c) CHECK(std::isnan(single.ses[c]));
}
