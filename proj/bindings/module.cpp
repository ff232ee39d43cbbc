// Python bindings for the core estimation pipeline.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

#include "sfofr/basis.hpp"
#include "sfofr/errors.hpp"
#include "sfofr/inference.hpp"
#include "sfofr/io.hpp"
#include "sfofr/selection.hpp"
#include "sfofr/simulate.hpp"

namespace py = pybind11;
using namespace sfofr;

namespace {

FunctionalSample sample_from(const Eigen::MatrixXd& values, const Eigen::VectorXd& grid) {
    return make_sample(values, quad_weights(grid));
}

SpatialWeights weights_from(const Eigen::MatrixXd& w) {
    SpatialWeights out{w, true, false};
    out.validate();
    return out;
}

}  // namespace

PYBIND11_MODULE(_sfofr, m) {
    m.doc() = "Penalized spatial function-on-function regression";

    py::register_exception<InvalidArgumentError>(m, "InvalidArgumentError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<IoError>(m, "IoError", PyExc_IOError);

    py::class_<FitConfig>(m, "FitConfig")
        .def(py::init<>())
        .def_readwrite("k_y", &FitConfig::k_y)
        .def_readwrite("k_x", &FitConfig::k_x)
        .def_readwrite("degree", &FitConfig::degree)
        .def_readwrite("q", &FitConfig::q)
        .def_readwrite("lambda_rho", &FitConfig::lambda_rho)
        .def_readwrite("lambda_beta", &FitConfig::lambda_beta)
        .def_readwrite("neumann_tol", &FitConfig::neumann_tol)
        .def_readwrite("neumann_max_iter", &FitConfig::neumann_max_iter);

    py::class_<FitResult>(m, "FitResult")
        .def_property_readonly("rho_coeffs",
                               [](const FitResult& f) { return f.theta.rho_coeffs; })
        .def_property_readonly("beta_coeffs",
                               [](const FitResult& f) { return f.theta.beta_coeffs; })
        .def_property_readonly("lambda_rho", [](const FitResult& f) { return f.lambdas.first; })
        .def_property_readonly("lambda_beta", [](const FitResult& f) { return f.lambdas.second; })
        .def_property_readonly("fitted", [](const FitResult& f) { return f.fitted.values; })
        .def_property_readonly("residuals", [](const FitResult& f) { return f.residuals.values; })
        .def_readonly("sigma2_hat", &FitResult::sigma2_hat)
        .def_readonly("bic", &FitResult::bic)
        .def_readonly("edf", &FitResult::edf)
        .def_readonly("rho_surface", &FitResult::rho_surface)
        .def_readonly("beta_surface", &FitResult::beta_surface);

    py::class_<BootstrapSurfaces>(m, "BootstrapSurfaces")
        .def_readonly("alpha", &BootstrapSurfaces::alpha)
        .def_readonly("num_replicates", &BootstrapSurfaces::num_replicates)
        .def_readonly("lower_beta", &BootstrapSurfaces::lower_beta)
        .def_readonly("upper_beta", &BootstrapSurfaces::upper_beta)
        .def_readonly("lower_rho", &BootstrapSurfaces::lower_rho)
        .def_readonly("upper_rho", &BootstrapSurfaces::upper_rho);

    m.def("inverse_distance_weights",
          [](int n) { return inverse_distance_weights(n).matrix; }, py::arg("n"));

    m.def(
        "knn_bisquare_weights",
        [](const Eigen::VectorXd& lon, const Eigen::VectorXd& lat, int h, bool haversine) {
            StationCoords coords{lon, lat};
            const auto metric =
                haversine ? DistanceMetric::haversine : DistanceMetric::euclidean;
            return knn_bisquare_weights(coords, h, metric).matrix;
        },
        py::arg("lon"), py::arg("lat"), py::arg("h") = 4, py::arg("haversine") = true);

    m.def(
        "moran_curve",
        [](const Eigen::MatrixXd& y, const Eigen::VectorXd& grid, const Eigen::MatrixXd& w,
           int num_funcs, int degree) {
            const BasisSystem basis = make_basis(num_funcs, degree);
            return moran_curve(sample_from(y, grid), basis, weights_from(w), grid);
        },
        py::arg("y"), py::arg("grid"), py::arg("w"), py::arg("num_funcs") = 10,
        py::arg("degree") = 3);

    m.def(
        "fit",
        [](const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, const Eigen::VectorXd& grid,
           const Eigen::MatrixXd& w, const FitConfig& config) {
            return fit(sample_from(y, grid), sample_from(x, grid), weights_from(w), config);
        },
        py::arg("y"), py::arg("x"), py::arg("grid"), py::arg("w"),
        py::arg("config") = FitConfig{});

    m.def(
        "grid_search",
        [](const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, const Eigen::VectorXd& grid,
           const Eigen::MatrixXd& w, const FitConfig& config) {
            GridSearchResult sel = grid_search(sample_from(y, grid), sample_from(x, grid),
                                               weights_from(w), default_lambda_grid(), config);
            return sel.fit;
        },
        py::arg("y"), py::arg("x"), py::arg("grid"), py::arg("w"),
        py::arg("config") = FitConfig{});

    m.def(
        "bootstrap_ci",
        [](const FitResult& fr, const Eigen::MatrixXd& y, const Eigen::MatrixXd& x,
           const Eigen::VectorXd& grid, const Eigen::MatrixXd& w, int b, double alpha,
           std::uint64_t seed, int jobs) {
            return bootstrap_ci(fr, sample_from(y, grid), sample_from(x, grid), weights_from(w),
                                b, alpha, seed, jobs);
        },
        py::arg("fit"), py::arg("y"), py::arg("x"), py::arg("grid"), py::arg("w"),
        py::arg("b") = 199, py::arg("alpha") = 0.05, py::arg("seed") = 1, py::arg("jobs") = 1);

    m.def(
        "simulate",
        [](int n, double eta, int grid_size, std::uint64_t seed, double noise_sd) {
            const QuadratureGrid grid = uniform_grid(grid_size);
            std::mt19937_64 rng(substream_seed(seed, 0));
            const FunctionalSample x = gen_predictor(n, grid, rng);
            const SpatialWeights w = inverse_distance_weights(n);
            const FunctionalSample y = gen_response(x, w, eta, noise_sd, rng);
            return py::make_tuple(y.values, x.values, grid.points, w.matrix);
        },
        py::arg("n") = 100, py::arg("eta") = 0.5, py::arg("grid_size") = 101, py::arg("seed") = 1,
        py::arg("noise_sd") = 0.0125);

    m.def("true_beta_surface", &true_beta_surface, py::arg("t_grid"), py::arg("s_grid"));
    m.def("true_rho_surface", &true_rho_surface, py::arg("t_grid"), py::arg("u_grid"),
          py::arg("eta"));
    m.def(
        "rrispee",
        [](const Eigen::MatrixXd& est, const Eigen::MatrixXd& truth, const Eigen::VectorXd& gr,
           const Eigen::VectorXd& gc) { return rrispee(est, truth, gr, gc); },
        py::arg("estimate"), py::arg("truth"), py::arg("grid_row"), py::arg("grid_col"));

    m.def(
        "basis_eval",
        [](int num_funcs, int degree, const Eigen::VectorXd& points, int deriv) {
            return make_basis(num_funcs, degree).eval(points, deriv);
        },
        py::arg("num_funcs"), py::arg("degree"), py::arg("points"), py::arg("deriv") = 0);
}
