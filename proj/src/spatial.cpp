#include "sfofr/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "sfofr/errors.hpp"
#include "sfofr/logging.hpp"

namespace sfofr {

namespace {
constexpr double kEarthRadiusKm = 6371.0;
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
}  // namespace

void SpatialWeights::validate() const {
    if (matrix.rows() != matrix.cols())
        throw InvalidArgumentError("SpatialWeights: matrix must be square");
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
        if (matrix(i, i) != 0.0)
            throw InvalidArgumentError("SpatialWeights: diagonal entries must be zero");
        double row_sum = 0.0;
        for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
            if (matrix(i, j) < 0.0)
                throw InvalidArgumentError("SpatialWeights: negative weight");
            row_sum += matrix(i, j);
        }
        if (normalized && row_sum > 0.0 && std::abs(row_sum - 1.0) > 1e-12)
            throw InvalidArgumentError("SpatialWeights: normalized row does not sum to 1");
    }
}

void StationCoords::validate() const {
    if (longitude.size() != latitude.size())
        throw InvalidArgumentError("StationCoords: longitude/latitude length mismatch");
    for (Eigen::Index i = 0; i < size(); ++i) {
        if (latitude[i] < -90.0 || latitude[i] > 90.0)
            throw InvalidArgumentError("StationCoords: latitude outside [-90, 90]");
        if (longitude[i] < -180.0 || longitude[i] > 180.0)
            throw InvalidArgumentError("StationCoords: longitude outside [-180, 180]");
    }
}

SpatialWeights inverse_distance_weights(int n) {
    if (n < 2) throw InvalidArgumentError("inverse_distance_weights: need n >= 2");
    SpatialWeights w;
    w.matrix.setZero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) w.matrix(i, j) = 1.0 / (1.0 + std::abs(i - j));
    return row_normalize(std::move(w));
}

Eigen::MatrixXd haversine_distances(const StationCoords& coords) {
    coords.validate();
    const Eigen::Index n = coords.size();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lat_i = coords.latitude[i] * kDegToRad;
        const double lon_i = coords.longitude[i] * kDegToRad;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double lat_j = coords.latitude[j] * kDegToRad;
            const double lon_j = coords.longitude[j] * kDegToRad;
            const double sdlat = std::sin(0.5 * (lat_j - lat_i));
            const double sdlon = std::sin(0.5 * (lon_j - lon_i));
            const double a = sdlat * sdlat + std::cos(lat_i) * std::cos(lat_j) * sdlon * sdlon;
            const double dist = 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
            d(i, j) = dist;
            d(j, i) = dist;
        }
    }
    return d;
}

SpatialWeights knn_bisquare_weights(const StationCoords& coords, int h, DistanceMetric metric) {
    coords.validate();
    const Eigen::Index n = coords.size();
    if (h < 1) throw InvalidArgumentError("knn_bisquare_weights: need h >= 1");
    if (n < h + 1) throw InvalidArgumentError("knn_bisquare_weights: need n >= h + 1");

    Eigen::MatrixXd d;
    if (metric == DistanceMetric::haversine) {
        d = haversine_distances(coords);
    } else {
        d.setZero(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const double dx = coords.longitude[i] - coords.longitude[j];
                const double dy = coords.latitude[i] - coords.latitude[j];
                d(i, j) = d(j, i) = std::hypot(dx, dy);
            }
    }

    SpatialWeights w;
    w.matrix.setZero(n, n);
    std::vector<Eigen::Index> order(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        // ties broken by lower station index
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            return d(i, a) < d(i, b);
        });
        std::vector<Eigen::Index> nbrs;
        for (Eigen::Index idx : order) {
            if (idx == i) continue;
            nbrs.push_back(idx);
            if (static_cast<int>(nbrs.size()) == h) break;
        }
        double bandwidth = 0.0;
        for (Eigen::Index j : nbrs) bandwidth = std::max(bandwidth, d(i, j));
        if (bandwidth == 0.0)
            throw InvalidArgumentError(
                "knn_bisquare_weights: coincident stations fill the neighbour set (H_i = 0)");
        double row_sum = 0.0;
        for (Eigen::Index j : nbrs) {
            const double r = d(i, j) / bandwidth;
            const double v = (1.0 - r * r) * (1.0 - r * r);
            w.matrix(i, j) = v;
            row_sum += v;
        }
        if (row_sum == 0.0) {
            // all neighbours exactly at bandwidth: fall back to uniform weights
            for (Eigen::Index j : nbrs) w.matrix(i, j) = 1.0 / h;
        } else {
            for (Eigen::Index j : nbrs) w.matrix(i, j) /= row_sum;
        }
    }
    w.normalized = true;
    w.validate();
    return w;
}

SpatialWeights row_normalize(SpatialWeights w) {
    w.normalized = false;
    w.validate();
    w.has_zero_rows = false;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double s = w.matrix.row(i).sum();
        if (s > 0.0) {
            w.matrix.row(i) /= s;
        } else {
            w.has_zero_rows = true;
        }
    }
    if (w.has_zero_rows)
        log::warn("row_normalize: all-zero row(s) left unnormalized (isolated units)");
    w.normalized = true;
    w.validate();
    return w;
}

FunctionalSample spatial_lag(const SpatialWeights& w, const FunctionalSample& curves, int q) {
    curves.validate();
    if (q < 1) throw InvalidArgumentError("spatial_lag: need q >= 1");
    if (w.size() != curves.size())
        throw InvalidArgumentError("spatial_lag: weight matrix and sample sizes differ");
    FunctionalSample out = curves;
    for (int k = 0; k < q; ++k) out.values = w.matrix * out.values;
    return out;
}

Eigen::VectorXd moran_curve(const FunctionalSample& curves, const BasisSystem& basis,
                            const SpatialWeights& w, const Eigen::VectorXd& eval_points) {
    curves.validate();
    if (w.size() != curves.size())
        throw InvalidArgumentError("moran_curve: weight matrix and sample sizes differ");
    const Eigen::MatrixXd b = basis.eval(curves.grid.points);
    // least-squares coefficients, n x K
    const Eigen::MatrixXd v =
        b.colPivHouseholderQr().solve(curves.values.transpose()).transpose();
    const Eigen::MatrixXd num_q = v.transpose() * w.matrix * v;  // V' W V
    const Eigen::MatrixXd den_q = v.transpose() * v;             // V' V
    const Eigen::MatrixXd phi = basis.eval(eval_points);
    Eigen::VectorXd out(eval_points.size());
    for (Eigen::Index r = 0; r < eval_points.size(); ++r) {
        const Eigen::VectorXd p = phi.row(r).transpose();
        const double den = p.dot(den_q * p);
        if (den <= 0.0)
            throw NumericError("moran_curve: zero denominator (all fitted curves vanish at t)");
        out[r] = p.dot(num_q * p) / den;
    }
    return out;
}

bool contraction_check(double rho_sup, const SpatialWeights& w) {
    if (rho_sup < 0.0) throw InvalidArgumentError("contraction_check: rho_sup must be >= 0");
    const double row_norm = w.matrix.cwiseAbs().rowwise().sum().maxCoeff();
    return rho_sup * row_norm < 1.0;
}

}  // namespace sfofr
