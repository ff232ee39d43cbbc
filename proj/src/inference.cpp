#include "sfofr/inference.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "sfofr/errors.hpp"
#include "sfofr/logging.hpp"

namespace sfofr {

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 over (seed, index)
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double quantile_type7(std::vector<double> values, double p) {
    if (values.empty()) throw InvalidArgumentError("quantile_type7: empty sample");
    if (p < 0.0 || p > 1.0) throw InvalidArgumentError("quantile_type7: p outside [0,1]");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

BootstrapSurfaces bootstrap_ci(const FitResult& fit, const FunctionalSample& y,
                               const FunctionalSample& x, const SpatialWeights& w,
                               int num_replicates, double alpha, std::uint64_t seed, int jobs,
                               bool store_replicates) {
    if (alpha <= 0.0 || alpha >= 1.0)
        throw InvalidArgumentError("bootstrap_ci: alpha must lie in (0,1)");
    if (num_replicates < static_cast<int>(std::ceil(2.0 / alpha - 1.0)))
        throw InvalidArgumentError("bootstrap_ci: too few replicates for the quantile levels");

    const Eigen::Index n = y.size();
    // centered residual curves
    Eigen::MatrixXd resid = fit.residuals.values;
    resid.rowwise() -= resid.colwise().mean();
    const Eigen::MatrixXd& mean_term = fit.fitted.values;  // (I - T)^-1 integral(X beta_hat)

    const FitWorkspace base_ws = prepare_fit(y, x, w, fit.config);
    const auto b = static_cast<std::size_t>(num_replicates);
    std::vector<Eigen::MatrixXd> beta_reps(b), rho_reps(b);
    std::vector<char> ok(b, 0);

    auto run_range = [&](FitWorkspace ws, std::size_t begin, std::size_t end, std::size_t step) {
        for (std::size_t k = begin; k < end; k += step) {
            std::mt19937_64 rng(substream_seed(seed, k));
            std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
            Eigen::MatrixXd y_star = mean_term;
            for (Eigen::Index i = 0; i < n; ++i) y_star.row(i) += resid.row(pick(rng));
            try {
                replace_response(ws, y_star);
                FitResult refit = fit_prepared(ws, fit.lambdas.first, fit.lambdas.second);
                beta_reps[k] = std::move(refit.beta_surface);
                rho_reps[k] = std::move(refit.rho_surface);
                ok[k] = 1;
            } catch (const NumericError& e) {
                log::info("bootstrap_ci: replicate " + std::to_string(k) + " failed: " + e.what());
            }
        }
    };

    if (jobs <= 1) {
        run_range(base_ws, 0, b, 1);
    } else {
        std::vector<std::thread> pool;
        const auto stride = static_cast<std::size_t>(jobs);
        for (std::size_t t = 0; t < stride; ++t)
            pool.emplace_back(run_range, base_ws, t, b, stride);
        for (auto& th : pool) th.join();
    }

    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < b; ++k)
        if (ok[k]) kept.push_back(k);
    if (kept.size() < b - b / 10)
        throw NumericError("bootstrap_ci: more than 10% of replicates failed to refit");

    BootstrapSurfaces out;
    out.alpha = alpha;
    out.num_replicates = num_replicates;
    const double lo_p = alpha / 2.0, hi_p = 1.0 - alpha / 2.0;
    auto bands = [&](const std::vector<Eigen::MatrixXd>& reps, Eigen::MatrixXd& lower,
                     Eigen::MatrixXd& upper) {
        const Eigen::Index rows = reps[kept.front()].rows();
        const Eigen::Index cols = reps[kept.front()].cols();
        lower.resize(rows, cols);
        upper.resize(rows, cols);
        std::vector<double> cell(kept.size());
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                for (std::size_t k = 0; k < kept.size(); ++k) cell[k] = reps[kept[k]](r, c);
                lower(r, c) = quantile_type7(cell, lo_p);
                upper(r, c) = quantile_type7(cell, hi_p);
            }
        }
    };
    bands(beta_reps, out.lower_beta, out.upper_beta);
    bands(rho_reps, out.lower_rho, out.upper_rho);
    if (store_replicates) {
        for (std::size_t k : kept) {
            out.beta_replicates.push_back(std::move(beta_reps[k]));
            out.rho_replicates.push_back(std::move(rho_reps[k]));
        }
    }
    return out;
}

namespace {

void check_grids(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& lower,
                 const Eigen::MatrixXd& upper) {
    if (truth.rows() != lower.rows() || truth.cols() != lower.cols() ||
        truth.rows() != upper.rows() || truth.cols() != upper.cols())
        throw InvalidArgumentError("band metric: grid mismatch between truth and bands");
}

}  // namespace

double cpd(const Eigen::MatrixXd& truth, const BootstrapSurfaces& bands, SurfaceKind which) {
    const Eigen::MatrixXd& lower = which == SurfaceKind::beta ? bands.lower_beta : bands.lower_rho;
    const Eigen::MatrixXd& upper = which == SurfaceKind::beta ? bands.upper_beta : bands.upper_rho;
    check_grids(truth, lower, upper);
    double covered = 0.0;
    for (Eigen::Index r = 0; r < truth.rows(); ++r)
        for (Eigen::Index c = 0; c < truth.cols(); ++c)
            if (lower(r, c) <= truth(r, c) && truth(r, c) <= upper(r, c)) covered += 1.0;
    covered /= static_cast<double>(truth.size());
    // |(1 - alpha) - covered| arranged so the full-coverage case yields alpha
    // exactly in floating point.
    return std::abs(bands.alpha - (1.0 - covered));
}

double interval_score(const Eigen::MatrixXd& truth, const BootstrapSurfaces& bands,
                      SurfaceKind which) {
    const Eigen::MatrixXd& lower = which == SurfaceKind::beta ? bands.lower_beta : bands.lower_rho;
    const Eigen::MatrixXd& upper = which == SurfaceKind::beta ? bands.upper_beta : bands.upper_rho;
    check_grids(truth, lower, upper);
    const double penalty = 2.0 / bands.alpha;
    double total = 0.0;
    for (Eigen::Index r = 0; r < truth.rows(); ++r) {
        for (Eigen::Index c = 0; c < truth.cols(); ++c) {
            double s = upper(r, c) - lower(r, c);
            if (truth(r, c) < lower(r, c)) s += penalty * (lower(r, c) - truth(r, c));
            if (truth(r, c) > upper(r, c)) s += penalty * (truth(r, c) - upper(r, c));
            total += std::abs(s);
        }
    }
    return total / static_cast<double>(truth.size());
}

}  // namespace sfofr
