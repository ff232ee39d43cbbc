#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sfofr/estimator.hpp"
#include "sfofr/sample.hpp"
#include "sfofr/simulate.hpp"
#include "sfofr/spatial.hpp"

namespace sfofr::io {

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);
double parse_double(const std::string& text);

/// Curve files: first row holds the grid points, each later row one curve.
void write_curves(const std::string& path, const FunctionalSample& sample);
FunctionalSample read_curves(const std::string& path);

/// Surface files: dense grid with the column grid in the header row and the
/// row grid in the first column; the top-left cell is empty.
void write_surface(const std::string& path, const Eigen::MatrixXd& values,
                   const Eigen::VectorXd& row_grid, const Eigen::VectorXd& col_grid);
Eigen::MatrixXd read_surface(const std::string& path, Eigen::VectorXd* row_grid = nullptr,
                             Eigen::VectorXd* col_grid = nullptr);

/// Plain dense matrix, no headers (spatial weight files).
void write_matrix(const std::string& path, const Eigen::MatrixXd& values);
Eigen::MatrixXd read_matrix(const std::string& path);

/// Station coordinate files with header `station,lon,lat`.
void write_coords(const std::string& path, const StationCoords& coords);
StationCoords read_coords(const std::string& path);

/// Metric table: header row of column names, one row per replication, then
/// `mean` and (when defined) `se` summary rows labelled in a leading column.
void write_metric_table(const std::string& path, const MetricTable& table);

/// Coefficients plus fit diagnostics as JSON.
void write_fit_json(const std::string& path, const FitResult& fit);
FitResult read_fit_json(const std::string& path);

/// Run configuration (versioned JSON schema).
struct RunConfig {
    int schema_version = 1;
    FitConfig fit;
    LambdaGrid lambda_grid;       // empty -> default grid for searches
    bool fixed_lambda = false;    // true -> use fit.lambda_* without a search
    int bootstrap_b = 199;
    double alpha = 0.05;
    SimulationConfig simulation;
    // io paths (empty when unused)
    std::string y_path, x_path, w_path, coords_path, truth_beta_path, truth_rho_path;
    int knn_h = 4;
    DistanceMetric metric = DistanceMetric::haversine;

    void validate() const;
};

RunConfig read_run_config(const std::string& path);
void write_run_config(const std::string& path, const RunConfig& config);

void ensure_dir(const std::string& path);

}  // namespace sfofr::io
