#include "sfofr/design.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include "sfofr/errors.hpp"
#include "sfofr/logging.hpp"

namespace sfofr {

namespace {

// Pseudo-inverse solve of the small symmetric system G x = rhs with a relative
// eigenvalue cutoff; also reports the condition number.
Eigen::MatrixXd pinv_solve(const Eigen::MatrixXd& g, const Eigen::MatrixXd& rhs,
                           bool allow_pseudo_inverse, const char* context) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double max_ev = ev.cwiseAbs().maxCoeff();
    if (max_ev <= 0.0) throw NumericError(std::string(context) + ": Z'Z is zero");
    const double cutoff = max_ev * 1e-12;
    const double min_ev = ev.cwiseAbs().minCoeff();
    if (min_ev < cutoff) {
        if (!allow_pseudo_inverse)
            throw NumericError(std::string(context) +
                               ": Z'Z numerically singular and pseudo-inverse disabled");
        log::warn(std::string(context) + ": rank-deficient instruments, using pseudo-inverse");
    } else if (max_ev / min_ev > 1e12) {
        log::warn(std::string(context) + ": instrument condition number exceeds 1e12");
    }
    Eigen::VectorXd inv_ev(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        inv_ev[i] = (std::abs(ev[i]) > cutoff) ? 1.0 / ev[i] : 0.0;
    return es.eigenvectors() * inv_ev.asDiagonal() * (es.eigenvectors().transpose() * rhs);
}

}  // namespace

std::atomic<long>& first_stage_counter() {
    static std::atomic<long> counter{0};
    return counter;
}

std::atomic<long>& cross_products_counter() {
    static std::atomic<long> counter{0};
    return counter;
}

Eigen::MatrixXd project_curves(const FunctionalSample& sample, const BasisSystem& basis) {
    sample.validate();
    const Eigen::Index m = sample.num_points();
    const Eigen::MatrixXd b = basis.eval(sample.grid.points.head(m - 1));
    // left-Riemann: weight the first M-1 columns and drop the last point
    return (sample.values.leftCols(m - 1) * sample.grid.weights.asDiagonal()) * b;
}

Eigen::MatrixXd build_design(const Eigen::MatrixXd& resp_lag_coeffs,
                             const Eigen::MatrixXd& pred_coeffs, const BasisSystem& basis_y,
                             const Eigen::VectorXd& t_grid) {
    const Eigen::Index n = resp_lag_coeffs.rows();
    if (pred_coeffs.rows() != n)
        throw InvalidArgumentError("build_design: coefficient row counts differ");
    const Eigen::Index m = t_grid.size();
    const Eigen::Index ky = basis_y.num_funcs();
    const Eigen::Index kr = resp_lag_coeffs.cols();
    const Eigen::Index kx = pred_coeffs.cols();
    const Eigen::MatrixXd phi_star = basis_y.eval(t_grid);
    Eigen::MatrixXd pi(n * m, kr * ky + kx * ky);
    for (Eigen::Index i = 0; i < n; ++i) {
        pi.block(i * m, 0, m, kr * ky) =
            Eigen::kroneckerProduct(resp_lag_coeffs.row(i), phi_star);
        pi.block(i * m, kr * ky, m, kx * ky) =
            Eigen::kroneckerProduct(pred_coeffs.row(i), phi_star);
    }
    return pi;
}

Eigen::MatrixXd build_instruments(const Eigen::MatrixXd& pred_coeffs, const SpatialWeights& w,
                                  int q_max, const BasisSystem& basis_y,
                                  const Eigen::VectorXd& t_grid) {
    if (q_max < 1) throw InvalidArgumentError("build_instruments: need Q >= 1");
    const Eigen::Index n = pred_coeffs.rows();
    if (w.size() != n)
        throw InvalidArgumentError("build_instruments: weight matrix size mismatch");
    const Eigen::Index m = t_grid.size();
    const Eigen::Index ky = basis_y.num_funcs();
    const Eigen::Index kx = pred_coeffs.cols();
    const Eigen::MatrixXd phi_star = basis_y.eval(t_grid);
    Eigen::MatrixXd z(n * m, kx * ky * (q_max + 1));
    Eigen::MatrixXd lagged = pred_coeffs;
    for (int q = 0; q <= q_max; ++q) {
        if (q > 0) lagged = w.matrix * lagged;
        for (Eigen::Index i = 0; i < n; ++i)
            z.block(i * m, q * kx * ky, m, kx * ky) =
                Eigen::kroneckerProduct(lagged.row(i), phi_star);
    }
    return z;
}

Eigen::MatrixXd first_stage(const Eigen::MatrixXd& pi, const Eigen::MatrixXd& z,
                            bool allow_pseudo_inverse) {
    if (pi.rows() != z.rows())
        throw InvalidArgumentError("first_stage: Pi and Z row counts differ");
    first_stage_counter().fetch_add(1, std::memory_order_relaxed);
    const Eigen::MatrixXd g = z.transpose() * z;
    const Eigen::MatrixXd c = pinv_solve(g, z.transpose() * pi, allow_pseudo_inverse,
                                         "first_stage");
    return z * c;
}

NormalEquations cross_products(const Eigen::MatrixXd& resp_lag_coeffs,
                               const Eigen::MatrixXd& pred_coeffs,
                               const std::vector<Eigen::MatrixXd>& iv_coeffs,
                               const BasisSystem& basis_y, const Eigen::VectorXd& t_grid,
                               const Eigen::MatrixXd& y_values) {
    const Eigen::Index n = resp_lag_coeffs.rows();
    const Eigen::Index m = t_grid.size();
    if (pred_coeffs.rows() != n || y_values.rows() != n || y_values.cols() != m)
        throw InvalidArgumentError("cross_products: dimension mismatch");
    if (iv_coeffs.empty()) throw InvalidArgumentError("cross_products: no instrument blocks");
    cross_products_counter().fetch_add(1, std::memory_order_relaxed);
    const Eigen::Index ky = basis_y.num_funcs();
    const Eigen::Index kx = pred_coeffs.cols();
    const auto num_blocks = static_cast<Eigen::Index>(iv_coeffs.size());
    const Eigen::MatrixXd phi_star = basis_y.eval(t_grid);
    const Eigen::MatrixXd gt = phi_star.transpose() * phi_star;  // K_y x K_y

    // Pi coefficient part, column-blocked [rho | b]
    Eigen::MatrixXd pi_coeffs(n, resp_lag_coeffs.cols() + kx);
    pi_coeffs << resp_lag_coeffs, pred_coeffs;

    const Eigen::Index zc = num_blocks * kx * ky;
    const Eigen::Index pc = pi_coeffs.cols() * ky;
    Eigen::MatrixXd ztz(zc, zc);
    Eigen::MatrixXd ztp(zc, pc);
    Eigen::VectorXd zty(zc);
    const Eigen::MatrixXd y_proj = phi_star.transpose() * y_values.transpose();  // K_y x n
    for (Eigen::Index p = 0; p < num_blocks; ++p) {
        ztp.middleRows(p * kx * ky, kx * ky) =
            Eigen::kroneckerProduct(iv_coeffs[p].transpose() * pi_coeffs, gt);
        for (Eigen::Index q = 0; q < num_blocks; ++q)
            ztz.block(p * kx * ky, q * kx * ky, kx * ky, kx * ky) =
                Eigen::kroneckerProduct(iv_coeffs[p].transpose() * iv_coeffs[q], gt);
        const Eigen::MatrixXd yb = y_proj * iv_coeffs[p];  // K_y x K_x
        zty.segment(p * kx * ky, kx * ky) =
            Eigen::Map<const Eigen::VectorXd>(yb.data(), yb.size());
    }

    const Eigen::MatrixXd ct = pinv_solve(ztz, ztp, true, "cross_products");
    NormalEquations ne;
    ne.a = ztp.transpose() * ct;
    ne.a = 0.5 * (ne.a + ne.a.transpose()).eval();
    ne.b = ct.transpose() * zty;
    return ne;
}

DesignMatrices assemble_design(const FunctionalSample& y, const FunctionalSample& x,
                               const SpatialWeights& w, const BasisSystem& basis_y,
                               const BasisSystem& basis_x, int q_max) {
    y.validate();
    x.validate();
    if (y.size() != x.size() || y.size() != w.size())
        throw InvalidArgumentError("assemble_design: inconsistent sample sizes");
    const FunctionalSample y_lag = spatial_lag(w, y, 1);
    const Eigen::MatrixXd resp_lag_coeffs = project_curves(y_lag, basis_y);
    const Eigen::MatrixXd pred_coeffs = project_curves(x, basis_x);
    DesignMatrices d;
    d.pi = build_design(resp_lag_coeffs, pred_coeffs, basis_y, y.grid.points);
    d.z = build_instruments(pred_coeffs, w, q_max, basis_y, y.grid.points);
    const Eigen::MatrixXd yt = y.values.transpose();  // M x n
    d.y_vec = Eigen::Map<const Eigen::VectorXd>(yt.data(), yt.size());
    d.pi_hat = first_stage(d.pi, d.z);
    return d;
}

}  // namespace sfofr
