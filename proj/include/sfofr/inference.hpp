#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sfofr/estimator.hpp"

namespace sfofr {

enum class SurfaceKind { beta, rho };

/// Pointwise bootstrap quantile bands for beta (t x s grid) and rho (t x u grid).
struct BootstrapSurfaces {
    double alpha = 0.05;
    int num_replicates = 0;
    Eigen::MatrixXd lower_beta, upper_beta;
    Eigen::MatrixXd lower_rho, upper_rho;
    std::vector<Eigen::MatrixXd> beta_replicates;  // kept when store_replicates is set
    std::vector<Eigen::MatrixXd> rho_replicates;
};

/// Residual bootstrap: whole residual curves are centered, resampled with
/// replacement over units, added to the structural fitted mean, and the model
/// is refit at the original smoothing parameters. Pointwise type-7 quantiles
/// at levels alpha/2 and 1-alpha/2. Replicates that fail to refit are skipped;
/// more than 10% failures is an error.
BootstrapSurfaces bootstrap_ci(const FitResult& fit, const FunctionalSample& y,
                               const FunctionalSample& x, const SpatialWeights& w,
                               int num_replicates, double alpha, std::uint64_t seed,
                               int jobs = 1, bool store_replicates = false);

/// Coverage probability deviance: |(1-alpha) - grid fraction covered|.
double cpd(const Eigen::MatrixXd& truth, const BootstrapSurfaces& bands, SurfaceKind which);

/// Grid-averaged interval score (width plus 2/alpha scaled non-coverage gaps).
double interval_score(const Eigen::MatrixXd& truth, const BootstrapSurfaces& bands,
                      SurfaceKind which);

/// Linear-interpolation (type 7) empirical quantile of unsorted values.
double quantile_type7(std::vector<double> values, double p);

/// Deterministic per-replicate RNG stream derived from (seed, index).
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace sfofr
