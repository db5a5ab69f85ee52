#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmj/model.hpp"
#include "cmj/spectral.hpp"
#include "cmj/stats.hpp"

namespace cmj {

struct A5Diagnostic {
    int root_type = 0;       // 0-based
    double estimate = 0.0;   // Monte Carlo mean of X log+ X, X = sum_children e^{-alpha disp}
    double se = 0.0;
    std::size_t samples = 0;
};

struct ValidationReport {
    bool ok = false;
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool irreducible = false;
    bool supercritical = false;
    double rho0 = 0.0;
    bool lattice_warning = false;
    double alpha = 0.0;  // 0 when not supercritical
    std::vector<A5Diagnostic> a5;
};

// Structural and spectral validation. The (A5) diagnostic is a seeded Monte
// Carlo estimate and never blocks a run; everything else is exact.
inline ValidationReport validate(const ModelSpec& spec, std::uint64_t seed = 0x5EEDu,
                                 std::size_t a5_samples = 100000) {
    ValidationReport rep;
    if (spec.num_types < 1) {
        rep.errors.push_back("number of types must be >= 1");
        return rep;
    }
    if (static_cast<int>(spec.laws.size()) != spec.num_types) {
        rep.errors.push_back("one offspring law required per type");
        return rep;
    }
    for (int i = 0; i < spec.num_types; ++i) {
        const OffspringLaw& law = spec.laws[i];
        if (law.clutches.empty()) {
            rep.errors.push_back("type " + std::to_string(i + 1) + ": empty clutch list");
            continue;
        }
        double wsum = 0.0;
        for (const Clutch& c : law.clutches) {
            if (!(c.weight > 0.0))
                rep.errors.push_back("type " + std::to_string(i + 1) + ": nonpositive clutch weight");
            wsum += c.weight;
            for (const ClutchEntry& e : c.entries) {
                if (e.count < 1)
                    rep.errors.push_back("type " + std::to_string(i + 1) + ": clutch count < 1");
                if (e.child_type < 0 || e.child_type >= spec.num_types)
                    rep.errors.push_back("type " + std::to_string(i + 1) + ": child type out of range");
            }
        }
        if (std::abs(wsum - 1.0) > 1e-12)
            rep.errors.push_back("type " + std::to_string(i + 1) + ": clutch weights sum to " +
                                 std::to_string(wsum) + ", expected 1");
    }
    if (!rep.errors.empty()) return rep;

    const auto counts = count_matrix(spec);
    rep.irreducible = support_irreducible(counts);
    if (!rep.irreducible) {
        rep.errors.push_back("mean matrix M(0) is reducible: not every type reaches every type");
        return rep;
    }

    rep.rho0 = pf_eigen(repro_matrix(spec, 0.0).entries).rho;
    rep.supercritical = rep.rho0 > 1.0 + 1e-12;

    rep.lattice_warning = all_displacements_deterministic(spec);
    if (rep.lattice_warning)
        rep.warnings.push_back(
            "all displacements are deterministic: the process may be lattice (nonlattice "
            "assumption possibly violated)");

    if (rep.supercritical) {
        // (A5) diagnostic: E[X log+ X] per root type, X = int e^{-alpha t} Z(dj x dt)
        const SpectralData sd = malthusian(spec);
        rep.alpha = sd.alpha;
        std::vector<SpawnedChild> children;
        for (int i = 0; i < spec.num_types; ++i) {
            RngStream rng(seed, mix_key(0xA5A5A5A5ULL, static_cast<std::uint64_t>(i)));
            std::vector<double> vals;
            vals.reserve(a5_samples);
            for (std::size_t s = 0; s < a5_samples; ++s) {
                spawn_children(spec, i, rng, children);
                double x = 0.0;
                for (const SpawnedChild& c : children) x += std::exp(-sd.alpha * c.displacement);
                vals.push_back(x * log_pos(x));
            }
            const MeanSe ms = mean_se(vals);
            rep.a5.push_back({i, ms.mean, ms.se, a5_samples});
        }
    }

    rep.ok = true;
    return rep;
}

inline json validation_to_json(const ValidationReport& r) {
    json a5 = json::array();
    for (const A5Diagnostic& d : r.a5)
        a5.push_back({{"root_type", d.root_type + 1},
                      {"estimate", d.estimate},
                      {"se", d.se},
                      {"samples", d.samples}});
    return json{{"ok", r.ok},
                {"errors", r.errors},
                {"warnings", r.warnings},
                {"irreducible", r.irreducible},
                {"supercritical", r.supercritical},
                {"rho0", r.rho0},
                {"lattice_warning", r.lattice_warning},
                {"alpha", r.alpha},
                {"a5_diagnostic", a5}};
}

}  // namespace cmj
