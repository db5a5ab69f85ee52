#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>

#include <boost/math/special_functions/gamma.hpp>

#include "cmj/rng.hpp"

namespace cmj {

// Birth-displacement laws. All four have closed-form Laplace transforms,
// transform derivatives and CDFs, so spectral quantities never need
// quadrature.
struct Deterministic {
    double d;  // >= 0
};
struct Exponential {
    double rate;  // > 0
};
struct GammaLaw {
    double shape;  // > 0
    double rate;   // > 0
};
struct UniformLaw {
    double a;  // >= 0
    double b;  // > a
};

using DisplacementLaw = std::variant<Deterministic, Exponential, GammaLaw, UniformLaw>;

namespace detail {

// (1 - e^{-x}) / x, continuous at 0.
inline double expm1_ratio(double x) noexcept {
    if (std::abs(x) < 1e-5)
        return 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0;
    return -std::expm1(-x) / x;
}

// d/dx of the above.
inline double expm1_ratio_deriv(double x) noexcept {
    if (std::abs(x) < 1e-4)
        return -0.5 + x / 3.0 - x * x / 8.0 + x * x * x / 30.0;
    return ((1.0 + x) * std::exp(-x) - 1.0) / (x * x);
}

}  // namespace detail

// E[e^{-theta X}], exact per closed form; equals 1 at theta = 0.
inline double laplace(const DisplacementLaw& law, double theta) {
    if (theta < 0.0) throw std::invalid_argument("laplace: theta must be >= 0");
    return std::visit(
        [theta](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, Deterministic>) {
                return std::exp(-theta * l.d);
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return l.rate / (l.rate + theta);
            } else if constexpr (std::is_same_v<T, GammaLaw>) {
                return std::pow(l.rate / (l.rate + theta), l.shape);
            } else {
                return std::exp(-theta * l.a) * detail::expm1_ratio(theta * (l.b - l.a));
            }
        },
        law);
}

// d/dtheta E[e^{-theta X}]; always <= 0, equals -E[X] at theta = 0.
inline double laplace_derivative(const DisplacementLaw& law, double theta) {
    if (theta < 0.0) throw std::invalid_argument("laplace_derivative: theta must be >= 0");
    return std::visit(
        [theta](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, Deterministic>) {
                return -l.d * std::exp(-theta * l.d);
            } else if constexpr (std::is_same_v<T, Exponential>) {
                const double s = l.rate + theta;
                return -l.rate / (s * s);
            } else if constexpr (std::is_same_v<T, GammaLaw>) {
                const double s = l.rate + theta;
                return -(l.shape / s) * std::pow(l.rate / s, l.shape);
            } else {
                const double c = l.b - l.a;
                const double x = theta * c;
                return std::exp(-theta * l.a) *
                       (-l.a * detail::expm1_ratio(x) + c * detail::expm1_ratio_deriv(x));
            }
        },
        law);
}

inline double cdf(const DisplacementLaw& law, double t) {
    return std::visit(
        [t](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, Deterministic>) {
                return t >= l.d ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return t <= 0.0 ? 0.0 : -std::expm1(-l.rate * t);
            } else if constexpr (std::is_same_v<T, GammaLaw>) {
                return t <= 0.0 ? 0.0 : boost::math::gamma_p(l.shape, l.rate * t);
            } else {
                if (t <= l.a) return 0.0;
                if (t >= l.b) return 1.0;
                return (t - l.a) / (l.b - l.a);
            }
        },
        law);
}

inline double mean(const DisplacementLaw& law) {
    return std::visit(
        [](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, Deterministic>)
                return l.d;
            else if constexpr (std::is_same_v<T, Exponential>)
                return 1.0 / l.rate;
            else if constexpr (std::is_same_v<T, GammaLaw>)
                return l.shape / l.rate;
            else
                return 0.5 * (l.a + l.b);
        },
        law);
}

inline double sample(const DisplacementLaw& law, RngStream& rng) {
    return std::visit(
        [&rng](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, Deterministic>)
                return l.d;
            else if constexpr (std::is_same_v<T, Exponential>)
                return rng.exponential(l.rate);
            else if constexpr (std::is_same_v<T, GammaLaw>)
                return rng.gamma(l.shape, l.rate);
            else
                return rng.uniform(l.a, l.b);
        },
        law);
}

inline bool is_deterministic(const DisplacementLaw& law) {
    return std::holds_alternative<Deterministic>(law);
}

inline std::string law_name(const DisplacementLaw& law) {
    return std::visit(
        [](const auto& l) -> std::string {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, Deterministic>)
                return "deterministic";
            else if constexpr (std::is_same_v<T, Exponential>)
                return "exponential";
            else if constexpr (std::is_same_v<T, GammaLaw>)
                return "gamma";
            else
                return "uniform";
        },
        law);
}

// ---------------------------------------------------------------------------
// Exponential tilting: the law with density e^{-alpha t} F(dt) / L(alpha).
// Deterministic and Uniform keep their support; Exponential and Gamma shift
// their rate. Used by the spine walk, where all step laws are tilted.

struct TiltedUniform {
    double a;
    double b;
    double alpha;  // > 0
};

using TiltedLaw = std::variant<Deterministic, Exponential, GammaLaw, TiltedUniform>;

inline TiltedLaw tilt(const DisplacementLaw& law, double alpha) {
    return std::visit(
        [alpha](const auto& l) -> TiltedLaw {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, Deterministic>)
                return l;
            else if constexpr (std::is_same_v<T, Exponential>)
                return Exponential{l.rate + alpha};
            else if constexpr (std::is_same_v<T, GammaLaw>)
                return GammaLaw{l.shape, l.rate + alpha};
            else
                return TiltedUniform{l.a, l.b, alpha};
        },
        law);
}

inline double sample(const TiltedLaw& law, RngStream& rng) {
    return std::visit(
        [&rng](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, TiltedUniform>) {
                // inverse CDF of e^{-alpha t} restricted to [a, b]
                const double c = l.b - l.a;
                const double z = -std::expm1(-l.alpha * c);
                return l.a - std::log1p(-rng.uniform01() * z) / l.alpha;
            } else {
                RngStream& r = rng;
                return sample(DisplacementLaw{l}, r);
            }
        },
        law);
}

inline double mean(const TiltedLaw& law) {
    return std::visit(
        [](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, TiltedUniform>) {
                // int_a^b t e^{-at} dt / int_a^b e^{-at} dt
                const double al = l.alpha;
                const double num = (l.a / al + 1.0 / (al * al)) * std::exp(-al * l.a) -
                                   (l.b / al + 1.0 / (al * al)) * std::exp(-al * l.b);
                const double den = (std::exp(-al * l.a) - std::exp(-al * l.b)) / al;
                return num / den;
            } else {
                return mean(DisplacementLaw{l});
            }
        },
        law);
}

}  // namespace cmj
