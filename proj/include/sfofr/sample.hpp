#pragma once

#include <Eigen/Dense>

#include "sfofr/basis.hpp"
#include "sfofr/errors.hpp"

namespace sfofr {

/// n discretely observed curves on a shared grid; row i holds curve i.
struct FunctionalSample {
    Eigen::MatrixXd values;  // n x M
    QuadratureGrid grid;

    Eigen::Index size() const { return values.rows(); }
    Eigen::Index num_points() const { return values.cols(); }

    void validate() const {
        if (values.cols() != grid.points.size())
            throw InvalidArgumentError("FunctionalSample: value columns must match grid points");
        if (!values.allFinite())
            throw InvalidArgumentError("FunctionalSample: non-finite curve values");
    }
};

inline FunctionalSample make_sample(Eigen::MatrixXd values, QuadratureGrid grid) {
    FunctionalSample s{std::move(values), std::move(grid)};
    s.validate();
    return s;
}

/// Uniform grid of `size` points spanning [0,1].
inline QuadratureGrid uniform_grid(int size) {
    if (size < 2) throw InvalidArgumentError("uniform_grid: need at least 2 points");
    return quad_weights(Eigen::VectorXd::LinSpaced(size, 0.0, 1.0));
}

}  // namespace sfofr
