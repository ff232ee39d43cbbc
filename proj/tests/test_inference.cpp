#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "sfofr/estimator.hpp"
#include "sfofr/inference.hpp"
#include "sfofr/sample.hpp"
#include "sfofr/simulate.hpp"
#include "sfofr/spatial.hpp"

using namespace sfofr;

TEST_CASE("quantile_type7 matches linear order-statistic interpolation") {
    std::vector<double> v{4.0, 1.0, 3.0, 2.0};
    CHECK(quantile_type7(v, 0.0) == 1.0);
    CHECK(quantile_type7(v, 1.0) == 4.0);
    CHECK(quantile_type7(v, 0.5) == doctest::Approx(2.5));
    // h = (n-1)p + 1 = 3*0.25 + 1 = 1.75 -> x(1) + 0.75 (x(2)-x(1)) = 1.75
    CHECK(quantile_type7(v, 0.25) == doctest::Approx(1.75));
    std::vector<double> single{7.5};
    CHECK(quantile_type7(single, 0.3) == 7.5);
}

TEST_CASE("substream seeds are distinct and deterministic") {
    CHECK(substream_seed(1, 0) == substream_seed(1, 0));
    CHECK(substream_seed(1, 0) != substream_seed(1, 1));
    CHECK(substream_seed(1, 0) != substream_seed(2, 0));
}

TEST_CASE("cpd and interval_score degenerate identities") {
    BootstrapSurfaces bands;
    bands.alpha = 0.05;
    Eigen::MatrixXd truth = Eigen::MatrixXd::Constant(5, 7, 2.0);
    bands.lower_beta = Eigen::MatrixXd::Constant(5, 7, 1.0);
    bands.upper_beta = Eigen::MatrixXd::Constant(5, 7, 3.0);
    // Full coverage: CPD = alpha, score = band width.
    CHECK(cpd(truth, bands, SurfaceKind::beta) == doctest::Approx(0.05));
    CHECK(interval_score(truth, bands, SurfaceKind::beta) == doctest::Approx(2.0));

    // No coverage: CPD = 1 - alpha.
    bands.lower_beta.setConstant(5.0);
    bands.upper_beta.setConstant(6.0);
    CHECK(cpd(truth, bands, SurfaceKind::beta) == doctest::Approx(0.95));
    // Score = width + (2/alpha) * (lower - truth) = 1 + 40 * 3 = 121.
    CHECK(interval_score(truth, bands, SurfaceKind::beta) == doctest::Approx(121.0));

    // lower = upper = truth -> score 0, CPD alpha.
    bands.lower_beta = truth;
    bands.upper_beta = truth;
    CHECK(interval_score(truth, bands, SurfaceKind::beta) == doctest::Approx(0.0));
    CHECK(cpd(truth, bands, SurfaceKind::beta) == doctest::Approx(0.05));
}

TEST_CASE("bootstrap_ci determinism, degenerate residuals, band properties") {
    QuadratureGrid grid = uniform_grid(41);
    std::mt19937_64 rng(211);
    int n = 40;
    FunctionalSample x = gen_predictor(n, grid, rng);
    SpatialWeights w = inverse_distance_weights(n);
    FunctionalSample y = gen_response(x, w, 0.1, 0.02, rng);
    FitConfig cfg;
    cfg.lambda_rho = 0.01;
    cfg.lambda_beta = 0.001;
    FitResult fr = fit(y, x, w, cfg);

    BootstrapSurfaces b1 = bootstrap_ci(fr, y, x, w, 49, 0.05, 7);
    BootstrapSurfaces b2 = bootstrap_ci(fr, y, x, w, 49, 0.05, 7);
    CHECK((b1.lower_beta - b2.lower_beta).cwiseAbs().maxCoeff() == 0.0);
    CHECK((b1.upper_rho - b2.upper_rho).cwiseAbs().maxCoeff() == 0.0);
    CHECK((b1.lower_beta.array() <= b1.upper_beta.array()).all());
    CHECK((b1.lower_rho.array() <= b1.upper_rho.array()).all());

    // Multi-threaded run matches the single-threaded one exactly.
    BootstrapSurfaces b4 = bootstrap_ci(fr, y, x, w, 49, 0.05, 7, 3);
    CHECK((b1.lower_beta - b4.lower_beta).cwiseAbs().maxCoeff() == 0.0);
    CHECK((b1.upper_beta - b4.upper_beta).cwiseAbs().maxCoeff() == 0.0);

    // Raising alpha never widens the band.
    BootstrapSurfaces wide = bootstrap_ci(fr, y, x, w, 49, 0.20, 7);
    CHECK((wide.upper_beta - wide.lower_beta -
           (b1.upper_beta - b1.lower_beta)).maxCoeff() < 1e-12);

    // Bands should contain the point estimate at most grid points.
    double frac = ((b1.lower_beta.array() <= fr.beta_surface.array()) &&
                   (fr.beta_surface.array() <= b1.upper_beta.array()))
                      .cast<double>()
                      .mean();
    CHECK(frac > 0.9);

    // Degenerate resampling: with exactly zero residuals every replicate sees
    // the same response, so lower = upper = the replicate estimate.
    std::mt19937_64 rng2(213);
    FunctionalSample x0 = gen_predictor(20, grid, rng2);
    SpatialWeights w0 = inverse_distance_weights(20);
    FunctionalSample y0 = gen_response(x0, w0, 0.1, 0.0, rng2);
    FitResult fr0 = fit(y0, x0, w0, cfg);
    fr0.residuals.values.setZero();
    BootstrapSurfaces b0 = bootstrap_ci(fr0, y0, x0, w0, 49, 0.05, 7);
    CHECK((b0.upper_beta - b0.lower_beta).cwiseAbs().maxCoeff() == 0.0);
    CHECK((b0.upper_rho - b0.lower_rho).cwiseAbs().maxCoeff() == 0.0);
    // The common replicate estimate is a refit of the structural mean and
    // stays close to the point estimate.
    CHECK((b0.upper_beta - fr0.beta_surface).cwiseAbs().maxCoeff() <
          0.05 * fr0.beta_surface.cwiseAbs().maxCoeff());
}
