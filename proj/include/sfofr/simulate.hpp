#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sfofr/estimator.hpp"
#include "sfofr/selection.hpp"

namespace sfofr {

struct SimulationConfig {
    int n_train = 100;
    int n_test = 200;
    double eta = 0.5;          // spatial dependence strength, in (0,1)
    int grid_size = 101;
    std::uint64_t seed = 1;
    int replications = 50;
    double noise_sd = 0.0125;
    int bootstrap_b = 0;       // 0 disables bootstrap metrics
    double alpha = 0.05;
    int jobs = 1;
    FitConfig fit;             // bases and IV order; lambdas come from the grid
    LambdaGrid lambda_grid;    // empty -> default 7x7 grid

    void validate() const;
};

/// Per-replication metric rows plus mean/SE aggregation.
struct MetricTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;  // one row per successful replication
    std::vector<double> means;
    std::vector<double> ses;  // sample sd / sqrt(R); NaN when replications == 1
    int failed = 0;
};

/// Truncated Fourier predictor curves (10 cosine/sine pairs, 1/k^{3/2} decay).
FunctionalSample gen_predictor(int n, const QuadratureGrid& grid, std::mt19937_64& rng);

double true_beta(double t, double s);
double true_rho(double t, double u, double eta);

/// True beta / rho evaluated on grid cross-products.
Eigen::MatrixXd true_beta_surface(const Eigen::VectorXd& t_grid, const Eigen::VectorXd& s_grid);
Eigen::MatrixXd true_rho_surface(const Eigen::VectorXd& t_grid, const Eigen::VectorXd& u_grid,
                                 double eta);

/// Spatially coupled response via the Neumann iteration over forcing
/// integral(X beta) + white noise on the grid.
FunctionalSample gen_response(const FunctionalSample& x, const SpatialWeights& w, double eta,
                              double noise_sd, std::mt19937_64& rng, double tol = 0.001);

/// 100 * sqrt(||est - truth||^2 / ||truth||^2), left-Riemann double integral.
double rrispee(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth,
               const Eigen::VectorXd& grid_row, const Eigen::VectorXd& grid_col);

/// Same relative error aggregated over response curves and the t grid.
double rmspe(const FunctionalSample& pred, const FunctionalSample& truth);

/// Relative RMSE (percent) and R^2 against the cross-sectional mean curve.
std::pair<double, double> rmse_r2(const FunctionalSample& pred, const FunctionalSample& obs);

/// Full Monte Carlo experiment: per replication generate disjoint train/test
/// sets, grid-search the smoothing parameters, and collect all metrics.
MetricTable monte_carlo(const SimulationConfig& config);

}  // namespace sfofr
