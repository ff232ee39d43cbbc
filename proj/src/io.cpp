#include "sfofr/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "sfofr/errors.hpp"
#include "sfofr/logging.hpp"

namespace sfofr::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{})
        throw IoError("cannot parse number from '" + text + "'");
    for (const char* p = res.ptr; p != end; ++p)
        if (*p != ' ' && *p != '\t' && *p != '\r')
            throw IoError("trailing characters after number in '" + text + "'");
    return v;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    return in;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) fields.push_back(cur);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::vector<std::vector<double>> read_numeric_rows(std::istream& in, const std::string& path) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        for (const auto& field : split_csv(line)) {
            try {
                row.push_back(parse_double(field));
            } catch (const IoError& e) {
                throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw IoError(path + ":" + std::to_string(lineno) + ": ragged row (" +
                          std::to_string(row.size()) + " vs " +
                          std::to_string(rows.front().size()) + " fields)");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError(path + ": no data rows");
    return rows;
}

void write_row(std::ostream& out, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    for (Eigen::Index c = 0; c < row.size(); ++c) {
        if (c) out << ',';
        out << format_double(row[c]);
    }
    out << '\n';
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty()) throw IoError("expected a non-empty matrix array");
    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        if (static_cast<Eigen::Index>(row.size()) != m.cols())
            throw IoError("ragged matrix array in JSON");
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

Eigen::VectorXd vector_from_json(const json& arr) {
    Eigen::VectorXd v(arr.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = arr[static_cast<std::size_t>(i)].get<double>();
    return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

}  // namespace

void write_curves(const std::string& path, const FunctionalSample& sample) {
    auto out = open_out(path);
    write_row(out, sample.grid.points.transpose());
    for (Eigen::Index i = 0; i < sample.values.rows(); ++i) write_row(out, sample.values.row(i));
    if (!out) throw IoError("write failed: " + path);
}

FunctionalSample read_curves(const std::string& path) {
    auto in = open_in(path);
    const auto rows = read_numeric_rows(in, path);
    if (rows.size() < 2) throw IoError(path + ": need a grid row plus at least one curve");
    const auto m = rows.front().size();
    Eigen::VectorXd grid(m);
    for (std::size_t c = 0; c < m; ++c) grid[static_cast<Eigen::Index>(c)] = rows[0][c];
    Eigen::MatrixXd values(rows.size() - 1, m);
    for (std::size_t r = 1; r < rows.size(); ++r)
        for (std::size_t c = 0; c < m; ++c)
            values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c)) = rows[r][c];
    try {
        return make_sample(std::move(values), quad_weights(grid));
    } catch (const InvalidArgumentError& e) {
        throw IoError(path + ": " + e.what());
    }
}

void write_surface(const std::string& path, const Eigen::MatrixXd& values,
                   const Eigen::VectorXd& row_grid, const Eigen::VectorXd& col_grid) {
    if (values.rows() != row_grid.size() || values.cols() != col_grid.size())
        throw InvalidArgumentError("write_surface: grid/shape mismatch");
    auto out = open_out(path);
    for (Eigen::Index c = 0; c < col_grid.size(); ++c) out << ',' << format_double(col_grid[c]);
    out << '\n';
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        out << format_double(row_grid[r]);
        for (Eigen::Index c = 0; c < values.cols(); ++c) out << ',' << format_double(values(r, c));
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

Eigen::MatrixXd read_surface(const std::string& path, Eigen::VectorXd* row_grid,
                             Eigen::VectorXd* col_grid) {
    auto in = open_in(path);
    std::string header;
    if (!std::getline(in, header)) throw IoError(path + ": empty file");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    const auto header_fields = split_csv(header);
    if (header_fields.size() < 2 || !header_fields.front().empty())
        throw IoError(path + ": surface header must start with an empty cell");
    Eigen::VectorXd cols(header_fields.size() - 1);
    for (std::size_t c = 1; c < header_fields.size(); ++c)
        cols[static_cast<Eigen::Index>(c - 1)] = parse_double(header_fields[c]);
    const auto rows = read_numeric_rows(in, path);
    if (rows.front().size() != header_fields.size())
        throw IoError(path + ": surface rows must carry a leading row-grid value");
    Eigen::VectorXd row_pts(rows.size());
    Eigen::MatrixXd values(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        row_pts[static_cast<Eigen::Index>(r)] = rows[r][0];
        for (Eigen::Index c = 0; c < cols.size(); ++c)
            values(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c) + 1];
    }
    if (row_grid) *row_grid = std::move(row_pts);
    if (col_grid) *col_grid = std::move(cols);
    return values;
}

void write_matrix(const std::string& path, const Eigen::MatrixXd& values) {
    auto out = open_out(path);
    for (Eigen::Index r = 0; r < values.rows(); ++r) write_row(out, values.row(r));
    if (!out) throw IoError("write failed: " + path);
}

Eigen::MatrixXd read_matrix(const std::string& path) {
    auto in = open_in(path);
    const auto rows = read_numeric_rows(in, path);
    Eigen::MatrixXd values(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows.front().size(); ++c)
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return values;
}

void write_coords(const std::string& path, const StationCoords& coords) {
    auto out = open_out(path);
    out << "station,lon,lat\n";
    for (Eigen::Index i = 0; i < coords.size(); ++i)
        out << (i + 1) << ',' << format_double(coords.longitude[i]) << ','
            << format_double(coords.latitude[i]) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

StationCoords read_coords(const std::string& path) {
    auto in = open_in(path);
    std::string header;
    if (!std::getline(in, header)) throw IoError(path + ": empty file");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != "station,lon,lat")
        throw IoError(path + ": expected header 'station,lon,lat', got '" + header + "'");
    const auto rows = read_numeric_rows(in, path);
    if (rows.front().size() != 3) throw IoError(path + ": expected 3 columns");
    StationCoords coords;
    coords.longitude.resize(rows.size());
    coords.latitude.resize(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        coords.longitude[static_cast<Eigen::Index>(r)] = rows[r][1];
        coords.latitude[static_cast<Eigen::Index>(r)] = rows[r][2];
    }
    coords.validate();
    return coords;
}

void write_metric_table(const std::string& path, const MetricTable& table) {
    auto out = open_out(path);
    out << "row";
    for (const auto& col : table.columns) out << ',' << col;
    out << '\n';
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        out << (r + 1);
        for (double v : table.rows[r]) out << ',' << format_double(v);
        out << '\n';
    }
    out << "mean";
    for (double v : table.means) out << ',' << format_double(v);
    out << '\n';
    if (table.rows.size() > 1) {
        out << "se";
        for (double v : table.ses) out << ',' << format_double(v);
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

void write_fit_json(const std::string& path, const FitResult& fit) {
    json j;
    j["schema_version"] = 1;
    j["bases"] = {{"k_y", fit.config.k_y}, {"k_x", fit.config.k_x}, {"degree", fit.config.degree}};
    j["iv_order"] = fit.config.q;
    j["lambda_rho"] = fit.lambdas.first;
    j["lambda_beta"] = fit.lambdas.second;
    j["sigma2_hat"] = fit.sigma2_hat;
    j["bic"] = fit.bic;
    j["edf"] = fit.edf;
    j["rho_coeffs"] = matrix_to_json(fit.theta.rho_coeffs);
    j["beta_coeffs"] = matrix_to_json(fit.theta.beta_coeffs);
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

FitResult read_fit_json(const std::string& path) {
    auto in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    FitResult fit;
    try {
        fit.config.k_y = j.at("bases").at("k_y").get<int>();
        fit.config.k_x = j.at("bases").at("k_x").get<int>();
        fit.config.degree = j.at("bases").at("degree").get<int>();
        fit.config.q = j.at("iv_order").get<int>();
        fit.lambdas = {j.at("lambda_rho").get<double>(), j.at("lambda_beta").get<double>()};
        fit.config.lambda_rho = fit.lambdas.first;
        fit.config.lambda_beta = fit.lambdas.second;
        fit.sigma2_hat = j.at("sigma2_hat").get<double>();
        fit.bic = j.at("bic").get<double>();
        fit.edf = j.at("edf").get<double>();
        fit.theta.rho_coeffs = matrix_from_json(j.at("rho_coeffs"));
        fit.theta.beta_coeffs = matrix_from_json(j.at("beta_coeffs"));
    } catch (const json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    return fit;
}

void RunConfig::validate() const {
    if (schema_version != 1)
        throw InvalidArgumentError("RunConfig: unsupported schema_version " +
                                   std::to_string(schema_version));
    if (alpha <= 0.0 || alpha >= 1.0) throw InvalidArgumentError("RunConfig: alpha outside (0,1)");
    if (bootstrap_b < 0) throw InvalidArgumentError("RunConfig: negative bootstrap_b");
    if (knn_h < 1) throw InvalidArgumentError("RunConfig: knn_h must be >= 1");
    if (lambda_grid.rho_values.size() > 0) lambda_grid.validate();
}

namespace {

void load_fit_config(const json& j, FitConfig& fit) {
    fit.k_y = j.value("k_y", fit.k_y);
    fit.k_x = j.value("k_x", fit.k_x);
    fit.degree = j.value("degree", fit.degree);
    fit.q = j.value("q", fit.q);
    fit.lambda_rho = j.value("lambda_rho", fit.lambda_rho);
    fit.lambda_beta = j.value("lambda_beta", fit.lambda_beta);
    fit.neumann_tol = j.value("neumann_tol", fit.neumann_tol);
    fit.neumann_max_iter = j.value("neumann_max_iter", fit.neumann_max_iter);
}

json dump_fit_config(const FitConfig& fit) {
    return json{{"k_y", fit.k_y},
                {"k_x", fit.k_x},
                {"degree", fit.degree},
                {"q", fit.q},
                {"lambda_rho", fit.lambda_rho},
                {"lambda_beta", fit.lambda_beta},
                {"neumann_tol", fit.neumann_tol},
                {"neumann_max_iter", fit.neumann_max_iter}};
}

}  // namespace

RunConfig read_run_config(const std::string& path) {
    auto in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidArgumentError(path + ": config parse error: " + e.what());
    }
    RunConfig cfg;
    try {
        cfg.schema_version = j.at("schema_version").get<int>();
        if (j.contains("fit")) load_fit_config(j["fit"], cfg.fit);
        if (j.contains("lambda_grid")) {
            cfg.lambda_grid.rho_values = vector_from_json(j["lambda_grid"].at("rho"));
            cfg.lambda_grid.beta_values = vector_from_json(j["lambda_grid"].at("beta"));
        }
        cfg.fixed_lambda = j.value("fixed_lambda", cfg.fixed_lambda);
        if (j.contains("bootstrap")) {
            cfg.bootstrap_b = j["bootstrap"].value("b", cfg.bootstrap_b);
            cfg.alpha = j["bootstrap"].value("alpha", cfg.alpha);
        }
        if (j.contains("simulation")) {
            const json& s = j["simulation"];
            cfg.simulation.n_train = s.value("n_train", cfg.simulation.n_train);
            cfg.simulation.n_test = s.value("n_test", cfg.simulation.n_test);
            cfg.simulation.eta = s.value("eta", cfg.simulation.eta);
            cfg.simulation.grid_size = s.value("grid_size", cfg.simulation.grid_size);
            cfg.simulation.seed = s.value("seed", cfg.simulation.seed);
            cfg.simulation.replications = s.value("replications", cfg.simulation.replications);
            cfg.simulation.noise_sd = s.value("noise_sd", cfg.simulation.noise_sd);
            cfg.simulation.bootstrap_b = s.value("bootstrap_b", cfg.simulation.bootstrap_b);
            cfg.simulation.alpha = s.value("alpha", cfg.simulation.alpha);
        }
        if (j.contains("io")) {
            const json& io_block = j["io"];
            cfg.y_path = io_block.value("y", std::string{});
            cfg.x_path = io_block.value("x", std::string{});
            cfg.w_path = io_block.value("w", std::string{});
            cfg.coords_path = io_block.value("coords", std::string{});
            cfg.truth_beta_path = io_block.value("truth_beta", std::string{});
            cfg.truth_rho_path = io_block.value("truth_rho", std::string{});
        }
        if (j.contains("spatial")) {
            cfg.knn_h = j["spatial"].value("knn_h", cfg.knn_h);
            const std::string metric = j["spatial"].value("metric", std::string("haversine"));
            if (metric == "haversine")
                cfg.metric = DistanceMetric::haversine;
            else if (metric == "euclidean")
                cfg.metric = DistanceMetric::euclidean;
            else
                throw InvalidArgumentError(path + ": unknown metric '" + metric + "'");
        }
    } catch (const json::exception& e) {
        throw InvalidArgumentError(path + ": config schema error: " + e.what());
    }
    // simulation fit settings follow the top-level fit block
    cfg.simulation.fit = cfg.fit;
    cfg.simulation.lambda_grid = cfg.lambda_grid;
    cfg.validate();
    cfg.simulation.validate();
    return cfg;
}

void write_run_config(const std::string& path, const RunConfig& cfg) {
    json j;
    j["schema_version"] = cfg.schema_version;
    j["fit"] = dump_fit_config(cfg.fit);
    if (cfg.lambda_grid.rho_values.size() > 0)
        j["lambda_grid"] = {{"rho", vector_to_json(cfg.lambda_grid.rho_values)},
                            {"beta", vector_to_json(cfg.lambda_grid.beta_values)}};
    j["fixed_lambda"] = cfg.fixed_lambda;
    j["bootstrap"] = {{"b", cfg.bootstrap_b}, {"alpha", cfg.alpha}};
    j["simulation"] = {{"n_train", cfg.simulation.n_train},
                       {"n_test", cfg.simulation.n_test},
                       {"eta", cfg.simulation.eta},
                       {"grid_size", cfg.simulation.grid_size},
                       {"seed", cfg.simulation.seed},
                       {"replications", cfg.simulation.replications},
                       {"noise_sd", cfg.simulation.noise_sd},
                       {"bootstrap_b", cfg.simulation.bootstrap_b},
                       {"alpha", cfg.simulation.alpha}};
    j["spatial"] = {{"knn_h", cfg.knn_h},
                    {"metric", cfg.metric == DistanceMetric::haversine ? "haversine" : "euclidean"}};
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

void ensure_dir(const std::string& path) {
    std::error_code ec;
    if (fs::exists(path, ec)) {
        if (!fs::is_directory(path, ec)) throw IoError("not a directory: " + path);
        return;
    }
    if (!fs::create_directories(path, ec) || ec)
        throw IoError("cannot create directory: " + path + " (" + ec.message() + ")");
    log::info("created output directory " + path);
}

}  // namespace sfofr::io
