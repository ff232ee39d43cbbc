#pragma once

#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sfofr/estimator.hpp"

namespace sfofr {

/// Search space for the smoothing parameters; values strictly increasing.
struct LambdaGrid {
    Eigen::VectorXd rho_values;
    Eigen::VectorXd beta_values;

    void validate(bool allow_zero = false) const;
};

/// Default 7x7 log-spaced grid, lambda in {1e-4, ..., 1e2}.
LambdaGrid default_lambda_grid();

/// Gaussian quasi-log-likelihood of the fitted mean at the plug-in sigma2.
double quasi_loglik(const FitResult& fit);

/// Ridge-type effective dimension trace[(Pi_hat' Pi + R)^-1 Pi_hat' Pi].
double effective_df(const DesignMatrices& design, const PenaltyAssembly& penalty);
double effective_df(const NormalEquations& ne, const PenaltyAssembly& penalty);

/// -2 quasi_loglik + effective_df * log(n), n the number of spatial units.
double bic(const FitResult& fit);

struct GridSearchResult {
    double lambda_rho = 0.0;
    double lambda_beta = 0.0;
    FitResult fit;
    std::vector<std::tuple<double, double, double>> bic_trace;  // (l_rho, l_beta, bic)
};

/// Exhaustive BIC minimization over the grid cross-product; the design is
/// assembled once and shared across grid points. Ties break toward larger
/// (lambda_rho, lambda_beta) lexicographically.
GridSearchResult grid_search(const FunctionalSample& y, const FunctionalSample& x,
                             const SpatialWeights& w, const LambdaGrid& grid,
                             const FitConfig& config);

/// Same search over an already prepared workspace.
GridSearchResult grid_search_prepared(const FitWorkspace& ws, const LambdaGrid& grid);

}  // namespace sfofr
