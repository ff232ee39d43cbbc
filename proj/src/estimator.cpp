#include "sfofr/estimator.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

#include "sfofr/errors.hpp"
#include "sfofr/logging.hpp"

namespace sfofr {

namespace {

// Symmetric solve with diagonal-jitter escalation; optionally reports
// trace[(A + R)^-1 A] through edf_out.
Eigen::VectorXd solve_penalized(const Eigen::MatrixXd& a_sym, const Eigen::MatrixXd& r,
                                const Eigen::VectorXd& b, double* edf_out) {
    const Eigen::MatrixXd lhs = a_sym + r;
    const double mean_diag = lhs.diagonal().cwiseAbs().mean();
    const double a_norm = lhs.cwiseAbs().rowwise().sum().maxCoeff();
    // An underdetermined unpenalized system (e.g. n below the basis dimension
    // at lambda = 0) has no unique solution and must fail loudly rather than
    // be rescued by jitter. Penalized systems may be extremely ill-conditioned
    // at huge lambda yet still have a meaningful solution, so the guard only
    // applies when the penalty is absent.
    if (r.cwiseAbs().maxCoeff() == 0.0) {
        Eigen::LDLT<Eigen::MatrixXd> probe(lhs);
        const Eigen::VectorXd d = probe.vectorD().cwiseAbs();
        if (!(d.minCoeff() > 1e-14 * d.maxCoeff())) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lhs, Eigen::EigenvaluesOnly);
            std::ostringstream msg;
            msg << "pens2sls_solve: singular penalized system (smallest eigenvalue "
                << es.eigenvalues().minCoeff() << "); consider raising lambda";
            throw NumericError(msg.str());
        }
    }
    double jitter = 0.0;
    for (int attempt = 0; attempt <= 3; ++attempt) {
        Eigen::MatrixXd m = lhs;
        if (jitter > 0.0) m.diagonal().array() += jitter;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
        if (ldlt.info() == Eigen::Success) {
            Eigen::VectorXd x = ldlt.solve(b);
            const double resid = (lhs * x - b).norm();
            const double scale = b.norm() + a_norm * x.norm();
            if (x.allFinite() && resid <= 1e-8 * (scale > 0.0 ? scale : 1.0)) {
                if (edf_out) {
                    // column-wise solves against A give trace[(A+R)^-1 A]
                    *edf_out = ldlt.solve(a_sym).trace();
                }
                return x;
            }
        }
        if (jitter > 0.0)
            log::warn("pens2sls_solve: jitter escalation (attempt " + std::to_string(attempt) +
                      ")");
        jitter = (jitter == 0.0) ? 1e-10 * mean_diag : jitter * 100.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lhs, Eigen::EigenvaluesOnly);
    std::ostringstream msg;
    msg << "pens2sls_solve: singular penalized system (smallest eigenvalue "
        << es.eigenvalues().minCoeff() << "); consider raising lambda";
    throw NumericError(msg.str());
}

CoefficientSet split_theta(const Eigen::VectorXd& theta, int k_y, int k_x) {
    if (theta.size() != Eigen::Index(k_y) * k_y + Eigen::Index(k_y) * k_x)
        throw InvalidArgumentError("split_theta: theta length does not match bases");
    CoefficientSet cs;
    cs.rho_coeffs = Eigen::Map<const Eigen::MatrixXd>(theta.data(), k_y, k_y);
    cs.beta_coeffs = Eigen::Map<const Eigen::MatrixXd>(theta.data() + k_y * k_y, k_y, k_x);
    return cs;
}

}  // namespace

PenaltyAssembly assemble_penalty(double lambda_rho, double lambda_beta,
                                 const BasisSystem& basis_y, const BasisSystem& basis_x) {
    if (lambda_rho < 0.0 || lambda_beta < 0.0)
        throw InvalidArgumentError("assemble_penalty: negative smoothing parameter");
    const Eigen::MatrixXd phi_t = basis_y.gram();
    const Eigen::MatrixXd d_t = basis_y.penalty();
    const Eigen::MatrixXd psi = basis_x.gram();
    const Eigen::MatrixXd d_s = basis_x.penalty();
    const Eigen::Index ky = basis_y.num_funcs(), kx = basis_x.num_funcs();

    PenaltyAssembly p;
    p.lambda_rho = lambda_rho;
    p.lambda_beta = lambda_beta;
    p.r = Eigen::MatrixXd::Zero(ky * ky + ky * kx, ky * ky + ky * kx);
    p.r.topLeftCorner(ky * ky, ky * ky) =
        lambda_rho * (Eigen::kroneckerProduct(phi_t, d_t) + Eigen::kroneckerProduct(d_t, phi_t));
    p.r.bottomRightCorner(ky * kx, ky * kx) =
        lambda_beta * (Eigen::kroneckerProduct(psi, d_t) + Eigen::kroneckerProduct(d_s, phi_t));
    return p;
}

CoefficientSet pens2sls_solve(const DesignMatrices& design, const PenaltyAssembly& penalty,
                              int k_y, int k_x) {
    Eigen::MatrixXd a = design.pi_hat.transpose() * design.pi;
    a = 0.5 * (a + a.transpose()).eval();
    const Eigen::VectorXd b = design.pi_hat.transpose() * design.y_vec;
    return split_theta(solve_penalized(a, penalty.r, b, nullptr), k_y, k_x);
}

CoefficientSet pens2sls_solve(const NormalEquations& ne, const PenaltyAssembly& penalty,
                              int k_y, int k_x, double* edf_out) {
    return split_theta(solve_penalized(ne.a, penalty.r, ne.b, edf_out), k_y, k_x);
}

Eigen::MatrixXd reconstruct_surface(const Eigen::MatrixXd& coeffs, const BasisSystem& basis_row,
                                    const BasisSystem& basis_col,
                                    const Eigen::VectorXd& grid_row,
                                    const Eigen::VectorXd& grid_col) {
    if (!coeffs.allFinite())
        throw InvalidArgumentError("reconstruct_surface: non-finite coefficients");
    if (coeffs.rows() != basis_row.num_funcs() || coeffs.cols() != basis_col.num_funcs())
        throw InvalidArgumentError("reconstruct_surface: coefficient shape mismatch");
    return basis_row.eval(grid_row) * coeffs * basis_col.eval(grid_col).transpose();
}

FunctionalSample neumann_fitted(const SpatialWeights& w, const Eigen::MatrixXd& rho_surface,
                                const FunctionalSample& forcing, double tol, int max_iter) {
    forcing.validate();
    const Eigen::Index n = forcing.size();
    const Eigen::Index m = forcing.num_points();
    if (w.size() != n)
        throw InvalidArgumentError("neumann_fitted: weight matrix and sample sizes differ");
    if (rho_surface.rows() != m || rho_surface.cols() != m)
        throw InvalidArgumentError("neumann_fitted: rho surface grid mismatch");

    if (!contraction_check(rho_surface.cwiseAbs().maxCoeff(), w))
        log::warn("neumann_fitted: sufficient contraction condition violated; iterating with cap");

    // left-Riemann integral over u folded into a single M x M kernel
    Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(m, m);
    kernel.leftCols(m - 1) =
        rho_surface.leftCols(m - 1) * forcing.grid.weights.asDiagonal();

    FunctionalSample out = forcing;
    for (int iter = 1; iter <= max_iter; ++iter) {
        Eigen::MatrixXd next =
            (w.matrix * out.values) * kernel.transpose() + forcing.values;
        const double delta = (next - out.values).cwiseAbs().maxCoeff();
        out.values.swap(next);
        if (delta < tol) return out;
    }
    throw NumericError("neumann_fitted: no convergence after " + std::to_string(max_iter) +
                       " iterations");
}

FitWorkspace prepare_fit(const FunctionalSample& y, const FunctionalSample& x,
                         const SpatialWeights& w, const FitConfig& config) {
    y.validate();
    x.validate();
    if (y.size() != x.size() || y.size() != w.size())
        throw InvalidArgumentError("fit: inconsistent n across Y, X, W");
    if (config.q < 1) throw InvalidArgumentError("fit: need Q >= 1");

    FitWorkspace ws{BasisSystem(config.k_y, config.degree), BasisSystem(config.k_x, config.degree),
                    y, x, w, config};
    ws.pred_coeffs = project_curves(x, ws.basis_x);
    ws.iv_coeffs.reserve(config.q + 1);
    ws.iv_coeffs.push_back(ws.pred_coeffs);
    for (int q = 1; q <= config.q; ++q)
        ws.iv_coeffs.push_back(w.matrix * ws.iv_coeffs.back());
    ws.resp_lag_coeffs = project_curves(spatial_lag(w, y, 1), ws.basis_y);
    ws.ne = cross_products(ws.resp_lag_coeffs, ws.pred_coeffs, ws.iv_coeffs, ws.basis_y,
                           y.grid.points, y.values);

    const Eigen::MatrixXd phi_t = ws.basis_y.gram();
    const Eigen::MatrixXd d_t = ws.basis_y.penalty();
    ws.penalty_rho_unit =
        Eigen::kroneckerProduct(phi_t, d_t) + Eigen::kroneckerProduct(d_t, phi_t);
    ws.penalty_beta_unit = Eigen::kroneckerProduct(ws.basis_x.gram(), d_t) +
                           Eigen::kroneckerProduct(ws.basis_x.penalty(), phi_t);
    ws.basis_y_on_grid = ws.basis_y.eval(y.grid.points);
    ws.basis_x_on_grid = ws.basis_x.eval(x.grid.points);
    const Eigen::Index g = x.num_points();
    ws.x_weighted = x.values.leftCols(g - 1) * x.grid.weights.asDiagonal();
    return ws;
}

void replace_response(FitWorkspace& ws, const Eigen::MatrixXd& y_values) {
    if (y_values.rows() != ws.y.values.rows() || y_values.cols() != ws.y.values.cols())
        throw InvalidArgumentError("replace_response: response shape mismatch");
    ws.y.values = y_values;
    ws.resp_lag_coeffs = project_curves(spatial_lag(ws.w, ws.y, 1), ws.basis_y);
    ws.ne = cross_products(ws.resp_lag_coeffs, ws.pred_coeffs, ws.iv_coeffs, ws.basis_y,
                           ws.y.grid.points, ws.y.values);
}

FitResult fit_prepared(const FitWorkspace& ws, double lambda_rho, double lambda_beta) {
    const int ky = ws.config.k_y, kx = ws.config.k_x;
    PenaltyAssembly penalty;
    penalty.lambda_rho = lambda_rho;
    penalty.lambda_beta = lambda_beta;
    penalty.r = Eigen::MatrixXd::Zero(ky * ky + ky * kx, ky * ky + ky * kx);
    penalty.r.topLeftCorner(ky * ky, ky * ky) = lambda_rho * ws.penalty_rho_unit;
    penalty.r.bottomRightCorner(ky * kx, ky * kx) = lambda_beta * ws.penalty_beta_unit;

    FitResult res;
    res.config = ws.config;
    res.lambdas = {lambda_rho, lambda_beta};
    res.theta = pens2sls_solve(ws.ne, penalty, ky, kx, &res.edf);

    res.rho_surface =
        ws.basis_y_on_grid * res.theta.rho_coeffs * ws.basis_y_on_grid.transpose();
    res.beta_surface =
        ws.basis_y_on_grid * res.theta.beta_coeffs * ws.basis_x_on_grid.transpose();

    // forcing_i(t) = leftRiemann_s[ X_i(s) beta_hat(t, s) ]
    const Eigen::Index g = ws.x.num_points();
    FunctionalSample forcing{ws.x_weighted * res.beta_surface.leftCols(g - 1).transpose(),
                             ws.y.grid};
    res.fitted = neumann_fitted(ws.w, res.rho_surface, forcing, ws.config.neumann_tol,
                                ws.config.neumann_max_iter);
    res.residuals = ws.y;
    res.residuals.values = ws.y.values - res.fitted.values;
    const double nm = static_cast<double>(ws.y.size()) * static_cast<double>(ws.y.num_points());
    res.sigma2_hat = res.residuals.values.squaredNorm() / nm;

    // quasi-Gaussian BIC: -2 L + edf log(n), L at the plug-in sigma2
    const double two_pi = 2.0 * 3.14159265358979323846;
    const double loglik =
        -0.5 * nm * (std::log(two_pi * std::max(res.sigma2_hat, 1e-300)) + 1.0);
    res.bic = -2.0 * loglik + res.edf * std::log(static_cast<double>(ws.y.size()));
    return res;
}

FitResult fit(const FunctionalSample& y, const FunctionalSample& x, const SpatialWeights& w,
              const FitConfig& config) {
    const FitWorkspace ws = prepare_fit(y, x, w, config);
    return fit_prepared(ws, config.lambda_rho, config.lambda_beta);
}

}  // namespace sfofr
