#pragma once

#include <Eigen/Dense>

namespace sfofr {

/// Subinterval quadrature rule on [0,1]: weights[i] = points[i+1] - points[i],
/// used as a left-Riemann sum over the first |points|-1 grid points.
struct QuadratureGrid {
    Eigen::VectorXd points;
    Eigen::VectorXd weights;  // length points.size() - 1
};

/// Builds a QuadratureGrid from a strictly increasing grid in [0,1].
QuadratureGrid quad_weights(const Eigen::VectorXd& points);

/// Univariate B-spline basis on [0,1] with clamped, equally spaced knots.
class BasisSystem {
public:
    /// num_funcs = interior knots + degree + 1; throws on num_funcs < degree + 1.
    BasisSystem(int num_funcs, int degree);

    int degree() const { return degree_; }
    int num_funcs() const { return num_funcs_; }
    const Eigen::VectorXd& knots() const { return knots_; }

    /// Basis (or derivative) evaluation matrix: (|points| x K), entry (i,k) = phi_k^(d)(points_i).
    Eigen::MatrixXd eval(const Eigen::VectorXd& points, int deriv = 0) const;

    /// Gram matrix of basis products, integrated exactly per knot span.
    /// nodes_per_span = 0 selects degree+1 Gauss-Legendre nodes (exact).
    Eigen::MatrixXd gram(int nodes_per_span = 0) const;

    /// Penalty matrix of derivative products (default integrated squared
    /// second derivatives); throws when deriv_order > degree.
    Eigen::MatrixXd penalty(int deriv_order = 2, int nodes_per_span = 0) const;

private:
    int degree_;
    int num_funcs_;
    Eigen::VectorXd knots_;
};

inline BasisSystem make_basis(int num_funcs, int degree = 3) {
    return BasisSystem(num_funcs, degree);
}

}  // namespace sfofr
