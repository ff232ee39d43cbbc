// sfofr: penalized spatial function-on-function regression CLI.
//
// Subcommands: simulate, fit, bootstrap, bench, moran. All commands are
// deterministic given (inputs, config, seed). Exit codes: 0 success,
// 2 schema/config error, 3 numerical failure, 4 IO failure.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sfofr/errors.hpp"
#include "sfofr/inference.hpp"
#include "sfofr/io.hpp"
#include "sfofr/logging.hpp"
#include "sfofr/selection.hpp"
#include "sfofr/simulate.hpp"

namespace {

using namespace sfofr;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    bool no_center = false;
    // input overrides (take precedence over the config io block)
    std::string y_path, x_path, w_path, coords_path;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_inputs) {
    cmd->add_option("--config", args.config_path, "Run configuration file (JSON)");
    cmd->add_option("--out-dir", args.out_dir, "Output directory (created if missing)");
    cmd->add_option("--seed", args.seed, "RNG seed override");
    cmd->add_option("--jobs", args.jobs, "Worker thread count")->check(CLI::PositiveNumber);
    if (with_inputs) {
        cmd->add_flag("--no-center", args.no_center,
                      "Skip subtracting the cross-sectional mean curve at ingestion");
        cmd->add_option("--y", args.y_path, "Response curve CSV");
        cmd->add_option("--x", args.x_path, "Predictor curve CSV");
        cmd->add_option("--w", args.w_path, "Spatial weight matrix CSV");
        cmd->add_option("--coords", args.coords_path, "Station coordinate CSV (station,lon,lat)");
    }
}

io::RunConfig load_config(const CommonArgs& args) {
    io::RunConfig cfg;
    if (!args.config_path.empty()) cfg = io::read_run_config(args.config_path);
    if (args.seed) cfg.simulation.seed = *args.seed;
    cfg.simulation.jobs = args.jobs;
    if (!args.y_path.empty()) cfg.y_path = args.y_path;
    if (!args.x_path.empty()) cfg.x_path = args.x_path;
    if (!args.w_path.empty()) cfg.w_path = args.w_path;
    if (!args.coords_path.empty()) cfg.coords_path = args.coords_path;
    return cfg;
}

std::string join(const std::string& dir, const std::string& name) { return dir + "/" + name; }

void center_curves(FunctionalSample& sample) {
    sample.values.rowwise() -= sample.values.colwise().mean();
}

FunctionalSample load_curves(const std::string& path, const char* what, bool center) {
    if (path.empty())
        throw InvalidArgumentError(std::string(what) + " curve file required (--" +
                                   (what[0] == 'r' ? "y" : "x") + " or config io block)");
    FunctionalSample sample = io::read_curves(path);
    if (center) center_curves(sample);
    return sample;
}

SpatialWeights load_weights(const io::RunConfig& cfg, Eigen::Index n) {
    if (!cfg.w_path.empty()) {
        SpatialWeights w{io::read_matrix(cfg.w_path), true, false};
        if (w.matrix.rows() != n)
            throw InvalidArgumentError("weight matrix size does not match the curve count");
        w.validate();
        return w;
    }
    if (!cfg.coords_path.empty()) {
        const StationCoords coords = io::read_coords(cfg.coords_path);
        if (coords.size() != n)
            throw InvalidArgumentError("coordinate count does not match the curve count");
        return knn_bisquare_weights(coords, cfg.knn_h, cfg.metric);
    }
    throw InvalidArgumentError("spatial weights required: pass --w or --coords");
}

FitResult run_fit(const io::RunConfig& cfg, const FunctionalSample& y, const FunctionalSample& x,
                  const SpatialWeights& w) {
    if (cfg.fixed_lambda) return fit(y, x, w, cfg.fit);
    const LambdaGrid grid =
        cfg.lambda_grid.rho_values.size() > 0 ? cfg.lambda_grid : default_lambda_grid();
    GridSearchResult sel = grid_search(y, x, w, grid, cfg.fit);
    log::info("grid search selected lambda_rho=" + io::format_double(sel.lambda_rho) +
              " lambda_beta=" + io::format_double(sel.lambda_beta));
    return std::move(sel.fit);
}

int cmd_simulate(const CommonArgs& args) {
    io::RunConfig cfg = load_config(args);
    io::ensure_dir(args.out_dir);
    const SimulationConfig& sim = cfg.simulation;
    const QuadratureGrid grid = uniform_grid(sim.grid_size);
    std::mt19937_64 rng(substream_seed(sim.seed, 0));
    const FunctionalSample x = gen_predictor(sim.n_train, grid, rng);
    const SpatialWeights w = inverse_distance_weights(sim.n_train);
    const FunctionalSample y = gen_response(x, w, sim.eta, sim.noise_sd, rng, sim.fit.neumann_tol);
    io::write_curves(join(args.out_dir, "y.csv"), y);
    io::write_curves(join(args.out_dir, "x.csv"), x);
    io::write_matrix(join(args.out_dir, "w.csv"), w.matrix);
    io::write_surface(join(args.out_dir, "beta_true.csv"),
                      true_beta_surface(grid.points, grid.points), grid.points, grid.points);
    io::write_surface(join(args.out_dir, "rho_true.csv"),
                      true_rho_surface(grid.points, grid.points, sim.eta), grid.points,
                      grid.points);
    return 0;
}

int cmd_fit(const CommonArgs& args) {
    io::RunConfig cfg = load_config(args);
    io::ensure_dir(args.out_dir);
    const FunctionalSample y = load_curves(cfg.y_path, "response", !args.no_center);
    const FunctionalSample x = load_curves(cfg.x_path, "predictor", !args.no_center);
    const SpatialWeights w = load_weights(cfg, y.size());
    const FitResult fr = run_fit(cfg, y, x, w);
    io::write_surface(join(args.out_dir, "beta_surface.csv"), fr.beta_surface, y.grid.points,
                      x.grid.points);
    io::write_surface(join(args.out_dir, "rho_surface.csv"), fr.rho_surface, y.grid.points,
                      y.grid.points);
    io::write_fit_json(join(args.out_dir, "theta.json"), fr);
    io::write_curves(join(args.out_dir, "fitted.csv"), fr.fitted);
    io::write_curves(join(args.out_dir, "residuals.csv"), fr.residuals);
    return 0;
}

int cmd_bootstrap(const CommonArgs& args, const std::string& fit_dir,
                  const std::string& truth_beta, const std::string& truth_rho) {
    io::RunConfig cfg = load_config(args);
    io::ensure_dir(args.out_dir);
    const FunctionalSample y = load_curves(cfg.y_path, "response", !args.no_center);
    const FunctionalSample x = load_curves(cfg.x_path, "predictor", !args.no_center);
    const SpatialWeights w = load_weights(cfg, y.size());

    // refit at the smoothing parameters recorded in the fit artifacts
    const FitResult stored = io::read_fit_json(join(fit_dir, "theta.json"));
    io::RunConfig refit_cfg = cfg;
    refit_cfg.fit = stored.config;
    refit_cfg.fixed_lambda = true;
    const FitResult fr = run_fit(refit_cfg, y, x, w);

    const std::uint64_t seed = args.seed.value_or(cfg.simulation.seed);
    const BootstrapSurfaces bands =
        bootstrap_ci(fr, y, x, w, cfg.bootstrap_b, cfg.alpha, seed, args.jobs);
    io::write_surface(join(args.out_dir, "beta_lower.csv"), bands.lower_beta, y.grid.points,
                      x.grid.points);
    io::write_surface(join(args.out_dir, "beta_upper.csv"), bands.upper_beta, y.grid.points,
                      x.grid.points);
    io::write_surface(join(args.out_dir, "rho_lower.csv"), bands.lower_rho, y.grid.points,
                      y.grid.points);
    io::write_surface(join(args.out_dir, "rho_upper.csv"), bands.upper_rho, y.grid.points,
                      y.grid.points);

    const std::string beta_truth_path = truth_beta.empty() ? cfg.truth_beta_path : truth_beta;
    const std::string rho_truth_path = truth_rho.empty() ? cfg.truth_rho_path : truth_rho;
    if (!beta_truth_path.empty() || !rho_truth_path.empty()) {
        nlohmann::json report;
        report["alpha"] = cfg.alpha;
        report["replicates"] = cfg.bootstrap_b;
        if (!beta_truth_path.empty()) {
            const Eigen::MatrixXd truth = io::read_surface(beta_truth_path);
            report["cpd_beta"] = cpd(truth, bands, SurfaceKind::beta);
            report["score_beta"] = interval_score(truth, bands, SurfaceKind::beta);
        }
        if (!rho_truth_path.empty()) {
            const Eigen::MatrixXd truth = io::read_surface(rho_truth_path);
            report["cpd_rho"] = cpd(truth, bands, SurfaceKind::rho);
            report["score_rho"] = interval_score(truth, bands, SurfaceKind::rho);
        }
        std::ofstream out(join(args.out_dir, "coverage.json"));
        if (!out) throw IoError("write failed: " + join(args.out_dir, "coverage.json"));
        out << report.dump(2) << '\n';
    }
    return 0;
}

int cmd_bench(const CommonArgs& args, int replications_override) {
    io::RunConfig cfg = load_config(args);
    if (replications_override > 0) cfg.simulation.replications = replications_override;
    io::ensure_dir(args.out_dir);
    const MetricTable table = monte_carlo(cfg.simulation);
    // The metric CSV must be reproducible byte-for-byte under a fixed seed, so
    // the wall-clock column is reported separately in the timing file.
    const std::size_t sec_col = table.columns.size() - 1;
    MetricTable metrics = table;
    metrics.columns.pop_back();
    metrics.means.pop_back();
    metrics.ses.pop_back();
    for (auto& row : metrics.rows) row.pop_back();
    io::write_metric_table(join(args.out_dir, "metrics.csv"), metrics);
    std::ofstream report(join(args.out_dir, "timing.txt"));
    if (!report) throw IoError("write failed: " + join(args.out_dir, "timing.txt"));
    report << "mean seconds per replication: " << io::format_double(table.means[sec_col]) << '\n'
           << "replications: " << table.rows.size() << " (failed: " << table.failed << ")\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r)
        report << "replication " << (r + 1) << ": "
               << io::format_double(table.rows[r][sec_col]) << " s\n";
    report << "note: wall-clock timings are hardware dependent\n";
    return 0;
}

int cmd_moran(const CommonArgs& args) {
    io::RunConfig cfg = load_config(args);
    io::ensure_dir(args.out_dir);
    const FunctionalSample y = load_curves(cfg.y_path, "response", !args.no_center);
    const SpatialWeights w = load_weights(cfg, y.size());
    const BasisSystem basis = make_basis(cfg.fit.k_y, cfg.fit.degree);
    const Eigen::VectorXd curve = moran_curve(y, basis, w, y.grid.points);
    std::ofstream out(join(args.out_dir, "moran.csv"));
    if (!out) throw IoError("write failed: " + join(args.out_dir, "moran.csv"));
    out << "t,moran_i\n";
    for (Eigen::Index r = 0; r < curve.size(); ++r)
        out << io::format_double(y.grid.points[r]) << ',' << io::format_double(curve[r]) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Penalized spatial function-on-function regression"};
    app.require_subcommand(1);

    CommonArgs sim_args, fit_args, boot_args, bench_args, moran_args;
    std::string fit_dir = ".", truth_beta, truth_rho;
    int bench_reps = 0;

    add_common(app.add_subcommand("simulate", "Generate a synthetic dataset"), sim_args, false);
    add_common(app.add_subcommand("fit", "Fit the model to curve files"), fit_args, true);
    auto* boot = app.add_subcommand("bootstrap", "Residual-bootstrap uncertainty bands");
    add_common(boot, boot_args, true);
    boot->add_option("--fit-dir", fit_dir, "Directory holding theta.json from a previous fit");
    boot->add_option("--truth-beta", truth_beta, "True beta surface CSV for a coverage report");
    boot->add_option("--truth-rho", truth_rho, "True rho surface CSV for a coverage report");
    auto* bench = app.add_subcommand("bench", "Monte Carlo benchmark");
    add_common(bench, bench_args, false);
    bench->add_option("--replications", bench_reps, "Replication count override");
    add_common(app.add_subcommand("moran", "Functional Moran's I curve"), moran_args, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand("simulate")) return cmd_simulate(sim_args);
        if (app.got_subcommand("fit")) return cmd_fit(fit_args);
        if (app.got_subcommand("bootstrap"))
            return cmd_bootstrap(boot_args, fit_dir, truth_beta, truth_rho);
        if (app.got_subcommand("bench")) return cmd_bench(bench_args, bench_reps);
        if (app.got_subcommand("moran")) return cmd_moran(moran_args);
    } catch (const InvalidArgumentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
