#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmj/linalg.hpp"
#include "cmj/model.hpp"

namespace cmj {

// M(theta): entry (i, j) = sum over clutches of weight * count * L(theta) for
// the type-j entries of a type-i parent.
struct ReproMatrix {
    double theta = 0.0;
    SquareMatrix entries;
};

inline ReproMatrix repro_matrix(const ModelSpec& spec, double theta) {
    if (theta < 0.0) throw std::invalid_argument("repro_matrix: theta must be >= 0");
    ReproMatrix m;
    m.theta = theta;
    m.entries = SquareMatrix(static_cast<std::size_t>(spec.num_types));
    for (int i = 0; i < spec.num_types; ++i)
        for (const Clutch& c : spec.laws[i].clutches)
            for (const ClutchEntry& e : c.entries)
                m.entries(i, e.child_type) += c.weight * e.count * laplace(e.displacement, theta);
    return m;
}

// derivative matrix dM/dtheta (entries <= 0)
inline SquareMatrix repro_matrix_derivative(const ModelSpec& spec, double theta) {
    SquareMatrix m(static_cast<std::size_t>(spec.num_types));
    for (int i = 0; i < spec.num_types; ++i)
        for (const Clutch& c : spec.laws[i].clutches)
            for (const ClutchEntry& e : c.entries)
                m(i, e.child_type) += c.weight * e.count * laplace_derivative(e.displacement, theta);
    return m;
}

inline double rho_of_theta(const ModelSpec& spec, double theta) {
    return pf_eigen(repro_matrix(spec, theta).entries).rho;
}

struct SpectralData {
    double alpha = 0.0;
    double rho0 = 0.0;
    std::vector<double> u;  // left eigenvector of M(alpha)
    std::vector<double> v;  // right eigenvector of M(alpha)
    SquareMatrix mprime;    // (-m_ij)'(alpha), all entries > 0 under (A4)
    double embedded_mprime = 0.0;  // -m'(alpha) of the embedded process, type 1
};

class SpectralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// -m'(alpha) of the process embedded at `target` (0-based):
// (u_i v_i)^{-1} sum_{j,k} u_j v_k (-m_jk)'(alpha).
inline double embedded_mprime_for(const SpectralData& s, int target) {
    const std::size_t p = s.u.size();
    double total = 0.0;
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = 0; k < p; ++k) total += s.u[j] * s.v[k] * s.mprime(j, k);
    return total / (s.u[static_cast<std::size_t>(target)] * s.v[static_cast<std::size_t>(target)]);
}

// Solves rho(M(alpha)) = 1: bracket by doubling, bisect, then polish with a
// few Newton steps using drho/dtheta = u M'(theta) v^T / (u v^T).
inline SpectralData malthusian(const ModelSpec& spec) {
    SpectralData out;
    out.rho0 = pf_eigen(repro_matrix(spec, 0.0).entries).rho;
    if (std::abs(out.rho0 - 1.0) <= 1e-12)
        throw SpectralError("malthusian: critical process (rho(0) = 1), no Malthusian parameter");
    if (out.rho0 < 1.0)
        throw SpectralError("malthusian: not supercritical (rho(0) = " + std::to_string(out.rho0) +
                            " <= 1)");

    double lo = 0.0, hi = 1.0;
    for (int step = 0; step < 200 && rho_of_theta(spec, hi) >= 1.0; ++step) {
        lo = hi;
        hi *= 2.0;
    }
    if (rho_of_theta(spec, hi) >= 1.0)
        throw SpectralError("malthusian: failed to bracket the root of rho(theta) = 1");

    while (hi - lo > 1e-14) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // double precision exhausted
        if (rho_of_theta(spec, mid) >= 1.0)
            lo = mid;
        else
            hi = mid;
    }

    double alpha = 0.5 * (lo + hi);
    for (int step = 0; step < 3; ++step) {
        const PfEigen e = pf_eigen(repro_matrix(spec, alpha).entries);
        const SquareMatrix d = repro_matrix_derivative(spec, alpha);
        double uv = 0.0, udv = 0.0;
        for (std::size_t i = 0; i < e.u.size(); ++i) {
            uv += e.u[i] * e.v[i];
            for (std::size_t j = 0; j < e.v.size(); ++j) udv += e.u[i] * d(i, j) * e.v[j];
        }
        const double drho = udv / uv;
        if (drho == 0.0) break;
        alpha -= (e.rho - 1.0) / drho;
    }

    const PfEigen e = pf_eigen(repro_matrix(spec, alpha).entries);
    if (std::abs(e.rho - 1.0) > 1e-12)
        throw SpectralError("malthusian: |rho(alpha) - 1| = " + std::to_string(std::abs(e.rho - 1.0)) +
                            " did not reach 1e-12");

    out.alpha = alpha;
    out.u = e.u;
    out.v = e.v;
    const SquareMatrix d = repro_matrix_derivative(spec, alpha);
    out.mprime = SquareMatrix(d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < d.size(); ++j) out.mprime(i, j) = -d(i, j);
    out.embedded_mprime = embedded_mprime_for(out, 0);
    return out;
}

inline json spectral_to_json(const SpectralData& s) {
    json mprime = json::array();
    for (std::size_t i = 0; i < s.mprime.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < s.mprime.size(); ++j) row.push_back(s.mprime(i, j));
        mprime.push_back(row);
    }
    return json{{"alpha", s.alpha},   {"rho0", s.rho0},
                {"u", s.u},           {"v", s.v},
                {"mprime", mprime},   {"embedded_mprime", s.embedded_mprime}};
}

}  // namespace cmj
