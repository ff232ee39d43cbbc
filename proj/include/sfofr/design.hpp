#pragma once

#include <atomic>
#include <vector>

#include <Eigen/Dense>

#include "sfofr/basis.hpp"
#include "sfofr/sample.hpp"
#include "sfofr/spatial.hpp"

namespace sfofr {

/// Regression design Pi, instrument matrix Z, stacked response and first-stage
/// projection. Pi columns are ordered [endogenous rho block | exogenous b block]
/// to match theta = (vec(rho), vec(b)).
struct DesignMatrices {
    Eigen::MatrixXd pi;      // (n M) x (K_y^2 + K_y K_x)
    Eigen::MatrixXd z;       // (n M) x (K_y K_x (Q+1))
    Eigen::VectorXd y_vec;   // vec of the M x n response matrix, curve i contiguous
    Eigen::MatrixXd pi_hat;  // Z (Z'Z)^+ Z' Pi
};

/// Left-Riemann basis coefficients: entry (i,k) = sum_r Delta_r psi_k(s_r) X_i(s_r).
Eigen::MatrixXd project_curves(const FunctionalSample& sample, const BasisSystem& basis);

/// Assembles Pi from lagged-response and predictor coefficients; block row i is
/// [resp_lag_coeffs_i' kron phi* | pred_coeffs_i' kron phi*].
Eigen::MatrixXd build_design(const Eigen::MatrixXd& resp_lag_coeffs,
                             const Eigen::MatrixXd& pred_coeffs, const BasisSystem& basis_y,
                             const Eigen::VectorXd& t_grid);

/// Instrument matrix Z = [Z_0 | ... | Z_Q]; Z_q is built from W^q-lagged
/// predictor coefficients.
Eigen::MatrixXd build_instruments(const Eigen::MatrixXd& pred_coeffs, const SpatialWeights& w,
                                  int q_max, const BasisSystem& basis_y,
                                  const Eigen::VectorXd& t_grid);

/// First-stage projection Pi_hat = Z (Z'Z)^+ Z' Pi without materializing the
/// nM x nM projector. Warns on instrument condition number > 1e12; throws
/// NumericError when Z'Z is numerically singular and the pseudo-inverse
/// fallback is disabled.
Eigen::MatrixXd first_stage(const Eigen::MatrixXd& pi, const Eigen::MatrixXd& z,
                            bool allow_pseudo_inverse = true);

/// Invocation counters (instrumentation for design-reuse tests).
std::atomic<long>& first_stage_counter();
std::atomic<long>& cross_products_counter();

/// Second-stage normal-equation blocks computed through the Kronecker factor
/// structure of Pi and Z; algebraically equal to Pi_hat' Pi and Pi_hat' y but
/// never materializes the nM-row matrices.
struct NormalEquations {
    Eigen::MatrixXd a;  // Pi' Z* Pi
    Eigen::VectorXd b;  // Pi' Z* vec(Y)
};

NormalEquations cross_products(const Eigen::MatrixXd& resp_lag_coeffs,
                               const Eigen::MatrixXd& pred_coeffs,
                               const std::vector<Eigen::MatrixXd>& iv_coeffs,
                               const BasisSystem& basis_y, const Eigen::VectorXd& t_grid,
                               const Eigen::MatrixXd& y_values);

/// Convenience assembly of the full materialized DesignMatrices from raw data.
DesignMatrices assemble_design(const FunctionalSample& y, const FunctionalSample& x,
                               const SpatialWeights& w, const BasisSystem& basis_y,
                               const BasisSystem& basis_x, int q_max);

}  // namespace sfofr
