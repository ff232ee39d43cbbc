#include "sfofr/basis.hpp"

#include <cmath>
#include <vector>

#include "sfofr/errors.hpp"

namespace sfofr {

namespace {

// Gauss-Legendre nodes/weights on [-1,1], Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& wts) {
    nodes.assign(n, 0.0);
    wts.assign(n, 0.0);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        wts[i] = w;
        wts[n - 1 - i] = w;
    }
}

// Derivatives of the p+1 nonzero basis functions at x on span i
// (NURBS book A2.3). ders(d, j) holds the d-th derivative of function i-p+j.
void ders_basis_funs(int i, double x, int p, int max_deriv, const Eigen::VectorXd& knots,
                     Eigen::MatrixXd& ders) {
    const int du = std::min(max_deriv, p);
    ders.setZero(max_deriv + 1, p + 1);
    Eigen::MatrixXd ndu(p + 1, p + 1);
    std::vector<double> left(p + 1), right(p + 1);
    ndu(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - knots[i + 1 - j];
        right[j] = knots[i + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu(j, r) = right[r + 1] + left[j - r];
            double temp = ndu(r, j - 1) / ndu(j, r);
            ndu(r, j) = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu(j, j) = saved;
    }
    for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);
    Eigen::MatrixXd a(2, p + 1);
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a(0, 0) = 1.0;
        for (int k = 1; k <= du; ++k) {
            double d = 0.0;
            int rk = r - k, pk = p - k;
            if (r >= k) {
                a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
                d = a(s2, 0) * ndu(rk, pk);
            }
            int j1 = (rk >= -1) ? 1 : -rk;
            int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
                d += a(s2, j) * ndu(rk + j, pk);
            }
            if (r <= pk) {
                a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
                d += a(s2, k) * ndu(r, pk);
            }
            ders(k, r) = d;
            std::swap(s1, s2);
        }
    }
    double factor = p;
    for (int k = 1; k <= du; ++k) {
        for (int j = 0; j <= p; ++j) ders(k, j) *= factor;
        factor *= (p - k);
    }
}

}  // namespace

QuadratureGrid quad_weights(const Eigen::VectorXd& points) {
    const Eigen::Index m = points.size();
    if (m < 2) throw InvalidArgumentError("quad_weights: need at least 2 grid points");
    if (points[0] < 0.0 || points[m - 1] > 1.0)
        throw InvalidArgumentError("quad_weights: grid points must lie in [0,1]");
    QuadratureGrid g;
    g.points = points;
    g.weights.resize(m - 1);
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
        double w = points[i + 1] - points[i];
        if (w <= 0.0) throw InvalidArgumentError("quad_weights: grid must be strictly increasing");
        g.weights[i] = w;
    }
    return g;
}

BasisSystem::BasisSystem(int num_funcs, int degree) : degree_(degree), num_funcs_(num_funcs) {
    if (degree < 1) throw InvalidArgumentError("BasisSystem: degree must be >= 1");
    if (num_funcs < degree + 1)
        throw InvalidArgumentError("BasisSystem: num_funcs must be >= degree + 1");
    const int interior = num_funcs - degree - 1;
    knots_.resize(num_funcs + degree + 1);
    for (int i = 0; i <= degree; ++i) knots_[i] = 0.0;
    for (int i = 0; i < interior; ++i)
        knots_[degree + 1 + i] = static_cast<double>(i + 1) / (interior + 1);
    for (int i = 0; i <= degree; ++i) knots_[num_funcs + i] = 1.0;
}

Eigen::MatrixXd BasisSystem::eval(const Eigen::VectorXd& points, int deriv) const {
    const int p = degree_, K = num_funcs_;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(points.size(), K);
    Eigen::MatrixXd ders;
    for (Eigen::Index r = 0; r < points.size(); ++r) {
        const double x = points[r];
        if (x < 0.0 || x > 1.0)
            throw InvalidArgumentError("eval: point outside the [0,1] domain");
        int span;
        if (x >= 1.0) {
            span = K - 1;
        } else {
            span = p;
            while (span < K - 1 && x >= knots_[span + 1]) ++span;
        }
        ders_basis_funs(span, x, p, deriv, knots_, ders);
        for (int j = 0; j <= p; ++j) out(r, span - p + j) = ders(deriv, j);
    }
    return out;
}

Eigen::MatrixXd BasisSystem::gram(int nodes_per_span) const {
    return penalty(0, nodes_per_span);
}

Eigen::MatrixXd BasisSystem::penalty(int deriv_order, int nodes_per_span) const {
    if (deriv_order > degree_)
        throw InvalidArgumentError("penalty: derivative order exceeds the basis degree");
    const int n_nodes = nodes_per_span > 0 ? nodes_per_span : degree_ + 1;
    std::vector<double> gn, gw;
    gauss_legendre(n_nodes, gn, gw);

    const int K = num_funcs_;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(K, K);
    Eigen::MatrixXd ders;
    for (int span = degree_; span < K; ++span) {
        const double a = knots_[span], b = knots_[span + 1];
        if (b <= a) continue;
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (int q = 0; q < n_nodes; ++q) {
            const double x = mid + half * gn[q];
            ders_basis_funs(span, x, degree_, deriv_order, knots_, ders);
            for (int j = 0; j <= degree_; ++j) {
                const double vj = ders(deriv_order, j);
                if (vj == 0.0) continue;
                for (int k = 0; k <= degree_; ++k)
                    out(span - degree_ + j, span - degree_ + k) +=
                        half * gw[q] * vj * ders(deriv_order, k);
            }
        }
    }
    return 0.5 * (out + out.transpose());
}

}  // namespace sfofr
