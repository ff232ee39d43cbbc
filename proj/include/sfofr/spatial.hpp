#pragma once

#include <Eigen/Dense>

#include "sfofr/basis.hpp"
#include "sfofr/sample.hpp"

namespace sfofr {

/// n x n nonnegative weight matrix with zero diagonal; normalized rows sum to 1.
struct SpatialWeights {
    Eigen::MatrixXd matrix;
    bool normalized = false;
    bool has_zero_rows = false;

    Eigen::Index size() const { return matrix.rows(); }
    void validate() const;
};

/// Station locations in degrees.
struct StationCoords {
    Eigen::VectorXd longitude;
    Eigen::VectorXd latitude;

    Eigen::Index size() const { return longitude.size(); }
    void validate() const;
};

enum class DistanceMetric { haversine, euclidean };

/// Row-normalized weights w_ij = 1/(1+|i-j|) off the diagonal.
SpatialWeights inverse_distance_weights(int n);

/// Bi-square kernel over the h nearest neighbours with adaptive bandwidth
/// H_i = max distance within the neighbour set; rows normalized.
SpatialWeights knn_bisquare_weights(const StationCoords& coords, int h,
                                    DistanceMetric metric = DistanceMetric::haversine);

/// Divides each nonzero row by its sum; zero rows are kept and flagged.
SpatialWeights row_normalize(SpatialWeights w);

/// Applies W^q to the curve matrix, pointwise on the grid.
FunctionalSample spatial_lag(const SpatialWeights& w, const FunctionalSample& curves, int q = 1);

/// Great-circle distance matrix in km (mean Earth radius 6371.0).
Eigen::MatrixXd haversine_distances(const StationCoords& coords);

/// Functional Moran's I curve evaluated at eval_points; curves are least-squares
/// fitted to the basis and the statistic is a ratio of quadratic forms in the
/// fitted coefficients.
Eigen::VectorXd moran_curve(const FunctionalSample& curves, const BasisSystem& basis,
                            const SpatialWeights& w, const Eigen::VectorXd& eval_points);

/// True iff rho_sup * max-abs-row-sum(W) < 1 (strict).
bool contraction_check(double rho_sup, const SpatialWeights& w);

}  // namespace sfofr
