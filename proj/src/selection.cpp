#include "sfofr/selection.hpp"

#include <cmath>
#include <optional>

#include "sfofr/errors.hpp"
#include "sfofr/logging.hpp"

namespace sfofr {

void LambdaGrid::validate(bool allow_zero) const {
    if (rho_values.size() == 0 || beta_values.size() == 0)
        throw InvalidArgumentError("LambdaGrid: empty grid");
    for (const auto& v : {rho_values, beta_values}) {
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (v[i] < 0.0 || (v[i] == 0.0 && !allow_zero))
                throw InvalidArgumentError("LambdaGrid: values must be positive");
            if (i > 0 && v[i] <= v[i - 1])
                throw InvalidArgumentError("LambdaGrid: values must be strictly increasing");
        }
    }
}

LambdaGrid default_lambda_grid() {
    LambdaGrid g;
    g.rho_values = Eigen::VectorXd(7);
    for (int i = 0; i < 7; ++i) g.rho_values[i] = std::pow(10.0, i - 4);
    g.beta_values = g.rho_values;
    return g;
}

double quasi_loglik(const FitResult& fit) {
    if (fit.sigma2_hat < 1e-300)
        throw NumericError("quasi_loglik: degenerate residual variance");
    const double nm = static_cast<double>(fit.residuals.size()) *
                      static_cast<double>(fit.residuals.num_points());
    const double ssr = fit.residuals.values.squaredNorm();
    const double two_pi = 2.0 * 3.14159265358979323846;
    return -0.5 * nm * std::log(two_pi * fit.sigma2_hat) - ssr / (2.0 * fit.sigma2_hat);
}

double effective_df(const NormalEquations& ne, const PenaltyAssembly& penalty) {
    const Eigen::MatrixXd lhs = ne.a + penalty.r;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(lhs);
    if (ldlt.info() != Eigen::Success)
        throw NumericError("effective_df: singular penalized system");
    const double edf = ldlt.solve(ne.a).trace();
    if (!std::isfinite(edf)) throw NumericError("effective_df: singular penalized system");
    return edf;
}

double effective_df(const DesignMatrices& design, const PenaltyAssembly& penalty) {
    NormalEquations ne;
    ne.a = design.pi_hat.transpose() * design.pi;
    ne.a = 0.5 * (ne.a + ne.a.transpose()).eval();
    ne.b = design.pi_hat.transpose() * design.y_vec;
    return effective_df(ne, penalty);
}

double bic(const FitResult& fit) {
    const double n = static_cast<double>(fit.residuals.size());
    return -2.0 * quasi_loglik(fit) + fit.edf * std::log(n);
}

GridSearchResult grid_search_prepared(const FitWorkspace& ws, const LambdaGrid& grid) {
    grid.validate(true);
    std::optional<GridSearchResult> best;
    std::vector<std::tuple<double, double, double>> trace;
    std::string last_error;
    // lexicographic ascending order + non-strict comparison breaks BIC ties
    // toward the larger (lambda_rho, lambda_beta) pair
    for (Eigen::Index ir = 0; ir < grid.rho_values.size(); ++ir) {
        for (Eigen::Index ib = 0; ib < grid.beta_values.size(); ++ib) {
            const double lr = grid.rho_values[ir];
            const double lb = grid.beta_values[ib];
            try {
                FitResult fr = fit_prepared(ws, lr, lb);
                trace.emplace_back(lr, lb, fr.bic);
                if (!best || fr.bic <= best->fit.bic) {
                    best = GridSearchResult{lr, lb, std::move(fr), {}};
                }
            } catch (const NumericError& e) {
                last_error = e.what();
                log::info("grid_search: fit failed at lambda=(" + std::to_string(lr) + ", " +
                          std::to_string(lb) + "): " + e.what());
            }
        }
    }
    if (!best)
        throw NumericError("grid_search: every grid point failed (last error: " + last_error +
                           ")");
    best->bic_trace = std::move(trace);
    return std::move(*best);
}

GridSearchResult grid_search(const FunctionalSample& y, const FunctionalSample& x,
                             const SpatialWeights& w, const LambdaGrid& grid,
                             const FitConfig& config) {
    const FitWorkspace ws = prepare_fit(y, x, w, config);
    return grid_search_prepared(ws, grid);
}

}  // namespace sfofr
