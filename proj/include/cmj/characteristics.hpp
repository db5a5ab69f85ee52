#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cmj/genealogy.hpp"
#include "cmj/model.hpp"
#include "cmj/stats.hpp"

namespace cmj {

// Scoring rules phi. A closed enumeration: every built-in carries an exact
// discounted mean integral, so limit constants never need quadrature.
struct BornIndicator {};           // phi(t) = 1 for t >= 0
struct Window {                    // phi(t) = 1 for 0 <= t < c
    double c;
};
struct TypeWindow {                // as Window, only for individuals of `type`
    int type;  // 0-based
    double c;
};
struct ChildrenByAge {};           // phi(t) = # own children with displacement <= t

using Characteristic = std::variant<BornIndicator, Window, TypeWindow, ChildrenByAge>;

inline std::string characteristic_name(const Characteristic& phi) {
    return std::visit(
        [](const auto& p) -> std::string {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, BornIndicator>)
                return "born";
            else if constexpr (std::is_same_v<T, Window>)
                return "window:" + std::to_string(p.c);
            else if constexpr (std::is_same_v<T, TypeWindow>)
                return "typewindow:" + std::to_string(p.type + 1) + ":" + std::to_string(p.c);
            else
                return "childrenbyage";
        },
        phi);
}

// CLI syntax: born | window:c | typewindow:j:c | childrenbyage (j 1-based)
inline Characteristic parse_characteristic(const std::string& s) {
    if (s == "born") return BornIndicator{};
    if (s == "childrenbyage") return ChildrenByAge{};
    if (s.rfind("window:", 0) == 0) {
        const double c = std::stod(s.substr(7));
        if (!(c > 0.0)) throw std::invalid_argument("window duration must be > 0");
        return Window{c};
    }
    if (s.rfind("typewindow:", 0) == 0) {
        const std::string rest = s.substr(11);
        const auto colon = rest.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("typewindow syntax: typewindow:j:c");
        const int j = std::stoi(rest.substr(0, colon));
        const double c = std::stod(rest.substr(colon + 1));
        if (j < 1) throw std::invalid_argument("typewindow type must be >= 1");
        if (!(c > 0.0)) throw std::invalid_argument("typewindow duration must be > 0");
        return TypeWindow{j - 1, c};
    }
    throw std::invalid_argument("unknown characteristic: " + s);
}

// [phi]_x evaluated at age = t - S(x) on a realized tree.
inline double eval_characteristic(const Tree& tree, const Characteristic& phi, std::size_t x,
                                  double age) {
    if (age < 0.0) return 0.0;
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, BornIndicator>) {
                return 1.0;
            } else if constexpr (std::is_same_v<T, Window>) {
                return age < p.c ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, TypeWindow>) {
                return (tree.type[x] == p.type && age < p.c) ? 1.0 : 0.0;
            } else {
                if (!tree.expanded[x])
                    throw std::logic_error(
                        "childrenbyage evaluated at nonnegative age on an unexpanded individual");
                double n = 0.0;
                const auto fc = tree.first_child[x];
                for (std::uint32_t k = 0; k < tree.n_children[x]; ++k)
                    if (tree.birth[static_cast<std::size_t>(fc) + k] - tree.birth[x] <= age) n += 1.0;
                return n;
            }
        },
        phi);
}

// Z^phi(t) = sum over individuals of [phi]_x(t - S(x)).
inline double z_phi(const Tree& tree, const Characteristic& phi, double t) {
    if (tree.mode == TreeMode::horizon && t > tree.horizon)
        throw std::invalid_argument("z_phi: t exceeds the tree horizon");
    KahanSum sum;
    for (std::size_t x = 0; x < tree.size(); ++x)
        sum.add(eval_characteristic(tree, phi, x, t - tree.birth[x]));
    return sum.value();
}

// ---------------------------------------------------------------------------
// Mean profiles: t -> E^j[phi(t)] and I_j = int_0^inf e^{-alpha s} E^j[phi(s)] ds,
// both in closed form. ChildrenByAge uses int_0^inf e^{-alpha s} F(s) ds = L(alpha)/alpha.

struct MeanProfile {
    Characteristic phi;
    double alpha = 0.0;
    std::vector<double> integral;           // I_j per type
    std::vector<double> total_mean_count;   // E[# children] per type (ChildrenByAge bound)
    ModelSpec spec;                          // needed to evaluate ChildrenByAge means

    double mean_at(int type, double t) const {
        if (t < 0.0) return 0.0;
        return std::visit(
            [&](const auto& p) -> double {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, BornIndicator>) {
                    return 1.0;
                } else if constexpr (std::is_same_v<T, Window>) {
                    return t < p.c ? 1.0 : 0.0;
                } else if constexpr (std::is_same_v<T, TypeWindow>) {
                    return (type == p.type && t < p.c) ? 1.0 : 0.0;
                } else {
                    double m = 0.0;
                    for (const Clutch& c : spec.laws[type].clutches)
                        for (const ClutchEntry& e : c.entries)
                            m += c.weight * e.count * cdf(e.displacement, t);
                    return m;
                }
            },
            phi);
    }
};

inline MeanProfile mean_profile(const ModelSpec& spec, const Characteristic& phi, double alpha) {
    MeanProfile prof;
    prof.phi = phi;
    prof.alpha = alpha;
    prof.spec = spec;
    prof.integral.assign(static_cast<std::size_t>(spec.num_types), 0.0);
    prof.total_mean_count.assign(static_cast<std::size_t>(spec.num_types), 0.0);
    for (int j = 0; j < spec.num_types; ++j)
        for (const Clutch& c : spec.laws[j].clutches)
            for (const ClutchEntry& e : c.entries)
                prof.total_mean_count[static_cast<std::size_t>(j)] += c.weight * e.count;

    for (int j = 0; j < spec.num_types; ++j) {
        const auto js = static_cast<std::size_t>(j);
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, BornIndicator>) {
                    prof.integral[js] = 1.0 / alpha;
                } else if constexpr (std::is_same_v<T, Window>) {
                    prof.integral[js] = -std::expm1(-alpha * p.c) / alpha;
                } else if constexpr (std::is_same_v<T, TypeWindow>) {
                    prof.integral[js] = j == p.type ? -std::expm1(-alpha * p.c) / alpha : 0.0;
                } else {
                    double total = 0.0;
                    for (const Clutch& c : spec.laws[j].clutches)
                        for (const ClutchEntry& e : c.entries)
                            total += c.weight * e.count * laplace(e.displacement, alpha) / alpha;
                    prof.integral[js] = total;
                }
            },
            phi);
    }
    return prof;
}

// ---------------------------------------------------------------------------
// Tail decay of the discounted mean profile. All built-ins decay like
// e^{-alpha t}, so the polynomial-rate condition holds for every delta > 0.

struct RateConditionReport {
    bool passes = false;
    double delta = 0.0;
    double tail_exponent = 0.0;                 // tail integral <= C e^{-tail_exponent * t}
    std::vector<double> tail_coefficient;       // C per type
    std::vector<double> sup_coefficient;        // sup bound per type
};

inline RateConditionReport check_rate_condition(const MeanProfile& prof, double delta,
                                                double alpha) {
    RateConditionReport rep;
    rep.delta = delta;
    rep.tail_exponent = alpha;
    const std::size_t p = prof.integral.size();
    rep.tail_coefficient.assign(p, 0.0);
    rep.sup_coefficient.assign(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        std::visit(
            [&](const auto& ph) {
                using T = std::decay_t<decltype(ph)>;
                if constexpr (std::is_same_v<T, ChildrenByAge>) {
                    rep.tail_coefficient[j] = prof.total_mean_count[j] / alpha;
                    rep.sup_coefficient[j] = prof.total_mean_count[j];
                } else {
                    rep.tail_coefficient[j] = 1.0 / alpha;
                    rep.sup_coefficient[j] = 1.0;
                }
            },
            prof.phi);
    }
    // exponential tails beat every polynomial weight
    rep.passes = true;
    return rep;
}

}  // namespace cmj
