#pragma once

#include <utility>

#include <Eigen/Dense>

#include "sfofr/basis.hpp"
#include "sfofr/design.hpp"
#include "sfofr/sample.hpp"
#include "sfofr/spatial.hpp"

namespace sfofr {

struct CoefficientSet {
    Eigen::MatrixXd rho_coeffs;   // K_y x K_y
    Eigen::MatrixXd beta_coeffs;  // K_y x K_x
};

/// Block-diagonal roughness penalty R(lambda_rho, lambda_beta); the upper block
/// penalizes rho, the lower block beta, each as a Kronecker sum of marginal
/// Gram and second-derivative matrices.
struct PenaltyAssembly {
    double lambda_rho = 0.0;
    double lambda_beta = 0.0;
    Eigen::MatrixXd r;
};

PenaltyAssembly assemble_penalty(double lambda_rho, double lambda_beta,
                                 const BasisSystem& basis_y, const BasisSystem& basis_x);

struct FitConfig {
    int k_y = 10;
    int k_x = 10;
    int degree = 3;
    int q = 2;  // highest instrument lag order
    double lambda_rho = 1.0;
    double lambda_beta = 1.0;
    double neumann_tol = 0.001;
    int neumann_max_iter = 1000;
};

struct FitResult {
    CoefficientSet theta;
    std::pair<double, double> lambdas{0.0, 0.0};
    FunctionalSample fitted;
    FunctionalSample residuals;
    double sigma2_hat = 0.0;
    double bic = 0.0;
    double edf = 0.0;
    // surfaces evaluated on the response/predictor grids
    Eigen::MatrixXd rho_surface;   // t x u grid
    Eigen::MatrixXd beta_surface;  // t x s grid
    FitConfig config;
};

/// Solves the penalized two-stage normal equations (Pi_hat' Pi + R) theta =
/// Pi_hat' y, symmetrizing the system matrix; diagonal-jitter fallback, throws
/// NumericError with a diagnostic when the system stays singular.
CoefficientSet pens2sls_solve(const DesignMatrices& design, const PenaltyAssembly& penalty,
                              int k_y, int k_x);
CoefficientSet pens2sls_solve(const NormalEquations& ne, const PenaltyAssembly& penalty,
                              int k_y, int k_x, double* edf_out = nullptr);

/// Tensor-product surface values on the grid cross-product:
/// out(a,b) = sum_{l,k} coeffs(l,k) phi_l(grid_row_a) chi_k(grid_col_b).
Eigen::MatrixXd reconstruct_surface(const Eigen::MatrixXd& coeffs, const BasisSystem& basis_row,
                                    const BasisSystem& basis_col,
                                    const Eigen::VectorXd& grid_row,
                                    const Eigen::VectorXd& grid_col);

/// Fixed-point Neumann solve of Y = T Y + forcing, where (T Y)_i(t) =
/// sum_j w_ij leftRiemann_u[ Y_j(u) rho(t,u) ]; rho_surface is evaluated on
/// the forcing grid (rows t, columns u). Stops when the sup-norm update falls
/// below tol; throws NumericError after max_iter iterations.
FunctionalSample neumann_fitted(const SpatialWeights& w, const Eigen::MatrixXd& rho_surface,
                                const FunctionalSample& forcing, double tol = 0.001,
                                int max_iter = 1000);

/// Precomputed per-dataset state shared by grid search and bootstrap refits.
struct FitWorkspace {
    BasisSystem basis_y;
    BasisSystem basis_x;
    FunctionalSample y;
    FunctionalSample x;
    SpatialWeights w;
    FitConfig config;
    Eigen::MatrixXd pred_coeffs;               // n x K_x
    std::vector<Eigen::MatrixXd> iv_coeffs;    // W^q-lagged predictor coefficients, q = 0..Q
    Eigen::MatrixXd resp_lag_coeffs;           // n x K_y
    NormalEquations ne;
    Eigen::MatrixXd penalty_rho_unit;          // rho penalty block at lambda = 1
    Eigen::MatrixXd penalty_beta_unit;         // beta penalty block at lambda = 1
    Eigen::MatrixXd basis_y_on_grid;           // M x K_y
    Eigen::MatrixXd basis_x_on_grid;           // G x K_x
    Eigen::MatrixXd x_weighted;                // n x (G-1), predictor scaled by quadrature weights
};

FitWorkspace prepare_fit(const FunctionalSample& y, const FunctionalSample& x,
                         const SpatialWeights& w, const FitConfig& config);

/// Re-solves the prepared problem at the given smoothing parameters.
FitResult fit_prepared(const FitWorkspace& ws, double lambda_rho, double lambda_beta);

/// Replaces the response (same X, W, bases) and refreshes the lag-dependent
/// normal-equation blocks; used by the residual bootstrap.
void replace_response(FitWorkspace& ws, const Eigen::MatrixXd& y_values);

/// End-to-end PenS2SLS fit at fixed smoothing parameters.
FitResult fit(const FunctionalSample& y, const FunctionalSample& x, const SpatialWeights& w,
              const FitConfig& config);

}  // namespace sfofr
