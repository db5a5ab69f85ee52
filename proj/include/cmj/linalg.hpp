#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmj {

// Dense square matrix, row-major. Sizes here are tiny (p is the number of
// types), so no external linear algebra is pulled in.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

    std::size_t size() const noexcept { return n_; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }

    std::vector<double> mul(const std::vector<double>& x) const {
        std::vector<double> y(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) y[i] += (*this)(i, j) * x[j];
        return y;
    }

    std::vector<double> mul_transpose(const std::vector<double>& x) const {
        std::vector<double> y(n_, 0.0);
        for (std::size_t j = 0; j < n_; ++j)
            for (std::size_t i = 0; i < n_; ++i) y[j] += (*this)(i, j) * x[i];
        return y;
    }

    double max_entry() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, v);
        return m;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

struct PfEigen {
    double rho = 0.0;
    std::vector<double> u;  // left eigenvector, sum(u_i v_i) = 1
    std::vector<double> v;  // right eigenvector, sum(v_i) = 1
    double residual_left = 0.0;
    double residual_right = 0.0;
    std::size_t iterations = 0;
};

class EigenError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Perron-Frobenius eigen-structure of a nonnegative irreducible matrix by
// power iteration. The iteration runs on M + cI (c = max entry): the shift
// makes periodic matrices primitive without changing the eigenvectors, and
// rho(M) = rho(M + cI) - c. One Rayleigh-quotient refinement on M follows.
inline PfEigen pf_eigen(const SquareMatrix& m, double tol = 1e-13,
                        std::size_t max_iter = 100000) {
    const std::size_t p = m.size();
    if (p == 0) throw EigenError("pf_eigen: empty matrix");
    const double shift = m.max_entry();
    if (shift <= 0.0) throw EigenError("pf_eigen: zero matrix");

    auto iterate = [&](bool left) {
        std::vector<double> x(p, 1.0 / static_cast<double>(p));
        double lambda = 0.0;
        std::size_t it = 0;
        for (; it < max_iter; ++it) {
            std::vector<double> y = left ? m.mul_transpose(x) : m.mul(x);
            for (std::size_t i = 0; i < p; ++i) y[i] += shift * x[i];
            double s = 0.0;
            for (double v : y) s += v;
            if (!(s > 0.0)) throw EigenError("pf_eigen: iterate collapsed to zero");
            for (double& v : y) v /= s;
            const double lambda_new = s;  // x was normalized to sum 1
            x = std::move(y);
            if (it > 0 && std::abs(lambda_new - lambda) <= tol * std::max(1.0, std::abs(lambda_new))) {
                lambda = lambda_new;
                ++it;
                break;
            }
            lambda = lambda_new;
        }
        return std::pair<std::vector<double>, std::size_t>(std::move(x), it);
    };

    auto [v, it_r] = iterate(false);
    auto [u, it_l] = iterate(true);
    if (it_r >= max_iter || it_l >= max_iter) {
        // residual of the shifted problem at the last iterate
        std::vector<double> mv = m.mul(v);
        double lam = 0.0;
        for (double y : mv) lam += y;
        double res = 0.0;
        for (std::size_t i = 0; i < p; ++i) res = std::max(res, std::abs(mv[i] - lam * v[i]));
        throw EigenError("pf_eigen: no convergence after " + std::to_string(max_iter) +
                         " iterations (last residual " + std::to_string(res) + ")");
    }

    // Rayleigh-quotient refinement on the unshifted matrix.
    std::vector<double> mv = m.mul(v);
    double uv = 0.0, umv = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        uv += u[i] * v[i];
        umv += u[i] * mv[i];
    }
    PfEigen out;
    out.rho = umv / uv;
    out.iterations = it_r + it_l;

    // normalization: sum v_i = 1, sum u_i v_i = 1
    double vsum = 0.0;
    for (double x : v) vsum += x;
    for (double& x : v) x /= vsum;
    double dot = 0.0;
    for (std::size_t i = 0; i < p; ++i) dot += u[i] * v[i];
    for (double& x : u) x /= dot;
    out.u = std::move(u);
    out.v = std::move(v);

    std::vector<double> rv = m.mul(out.v);
    std::vector<double> lu = m.mul_transpose(out.u);
    for (std::size_t i = 0; i < p; ++i) {
        out.residual_right = std::max(out.residual_right, std::abs(rv[i] - out.rho * out.v[i]));
        out.residual_left = std::max(out.residual_left, std::abs(lu[i] - out.rho * out.u[i]));
    }
    return out;
}

}  // namespace cmj
