#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cmj/characteristics.hpp"
#include "cmj/genealogy.hpp"
#include "cmj/model.hpp"
#include "cmj/stats.hpp"

namespace cmj {

// Streaming generation-by-generation population scan. Produces the same
// numbers as materializing a horizon-mode Tree and evaluating z_phi / V /
// W_n on it (the per-individual RNG streams are keyed by address hash, so
// the realized randomness is identical), but keeps only one generation in
// memory. This is what makes horizon-12+ experiments desk-scale.
//
// Expansion rule: an individual is expanded when its birth time is within
// `z_horizon`, or while whole-generation mode is active (all generations are
// fully expanded until one of them has a member born after `proxy_horizon`;
// that point determines the terminal complete generation for the W proxy).
struct ScanConfig {
    int root_type = 0;
    double alpha = 0.0;
    std::vector<double> v;          // right eigenvector, for W weights
    double z_horizon = 0.0;         // expand individuals born up to here
    std::vector<double> grid;       // ascending, all <= z_horizon
    std::vector<Characteristic> phis;
    double proxy_horizon = 0.0;     // 0 disables W tracking
    bool track_v = false;           // Nerman V(t) on the grid
    double v_final_time = -1.0;     // < 0 disables; else <= z_horizon
    std::size_t cap = kDefaultPopulationCap;
};

struct ScanResult {
    // z[phi][grid index] = Z^phi(t)
    std::vector<std::vector<double>> z;
    std::vector<double> births;     // T_t per grid point
    std::vector<double> v_of_t;     // V(t) per grid point (when track_v)
    double v_final = 0.0;           // V(v_final_time)
    std::vector<double> w;          // W_0..W_{n(T)} over complete generations
    int n_of_t = -1;                // last complete generation within proxy_horizon
    double w_proxy = 0.0;           // W_{n(T)}; 0 on extinction
    bool extinct = false;
    bool truncated = false;
    std::size_t realized = 0;
};

namespace detail {

struct ScanEntry {
    double birth;
    double parent_birth;
    std::uint64_t key;
    std::uint16_t type;
};

}  // namespace detail

inline ScanResult scan_population(const ModelSpec& spec, const ScanConfig& cfg,
                                  std::uint64_t seed) {
    for (double t : cfg.grid)
        if (t > cfg.z_horizon)
            throw std::invalid_argument("scan_population: grid exceeds the expansion horizon");
    if (cfg.v_final_time > cfg.z_horizon)
        throw std::invalid_argument("scan_population: V evaluation time exceeds the horizon");

    const std::size_t g = cfg.grid.size();
    ScanResult res;
    res.z.assign(cfg.phis.size(), std::vector<double>(g, 0.0));
    res.births.assign(g, 0.0);
    res.v_of_t.assign(cfg.track_v ? g : 0, 0.0);

    std::vector<KahanSum> v_sum(cfg.track_v ? g : 0);
    KahanSum v_final_sum;
    std::vector<std::vector<KahanSum>> z_sum(cfg.phis.size(), std::vector<KahanSum>(g));
    std::vector<double> births(g, 0.0);

    const double vroot = cfg.v.empty() ? 1.0 : cfg.v[static_cast<std::size_t>(cfg.root_type)];
    bool whole_gen = cfg.proxy_horizon > 0.0;
    bool proxy_open = whole_gen;

    std::vector<detail::ScanEntry> frontier{
        {0.0, -1.0, kRootKey, static_cast<std::uint16_t>(cfg.root_type)}};
    std::vector<detail::ScanEntry> next;
    std::vector<SpawnedChild> clutch;

    // per-characteristic dispatch data
    struct PhiKind {
        int kind;  // 0 born, 1 window, 2 typewindow, 3 childrenbyage
        double c = 0.0;
        int type = -1;
    };
    std::vector<PhiKind> kinds;
    kinds.reserve(cfg.phis.size());
    for (const Characteristic& phi : cfg.phis)
        kinds.push_back(std::visit(
            [](const auto& p) -> PhiKind {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, BornIndicator>) return {0};
                else if constexpr (std::is_same_v<T, Window>) return {1, p.c};
                else if constexpr (std::is_same_v<T, TypeWindow>) return {2, p.c, p.type};
                else return {3};
            },
            phi));

    while (!frontier.empty()) {
        double gen_max_birth = 0.0;
        KahanSum w_gen;
        next.clear();
        for (const detail::ScanEntry& e : frontier) {
            const bool is_root = e.parent_birth < 0.0;
            ++res.realized;
            if (res.realized > cfg.cap) {
                res.truncated = true;
                return res;
            }
            gen_max_birth = std::max(gen_max_birth, e.birth);
            if (proxy_open)
                w_gen.add((cfg.v.empty() ? 1.0 : cfg.v[e.type]) / vroot *
                          std::exp(-cfg.alpha * e.birth));

            // grid statistics
            for (std::size_t i = 0; i < g; ++i) {
                const double t = cfg.grid[i];
                if (e.birth <= t) births[i] += 1.0;
                for (std::size_t k = 0; k < kinds.size(); ++k) {
                    const PhiKind& pk = kinds[k];
                    switch (pk.kind) {
                        case 0:
                            if (e.birth <= t) z_sum[k][i].add(1.0);
                            break;
                        case 1:
                            if (e.birth <= t && t - e.birth < pk.c) z_sum[k][i].add(1.0);
                            break;
                        case 2:
                            if (e.type == pk.type && e.birth <= t && t - e.birth < pk.c)
                                z_sum[k][i].add(1.0);
                            break;
                        case 3:
                            // each child scores 1 for its parent once born
                            if (!is_root && e.birth <= t) z_sum[k][i].add(1.0);
                            break;
                    }
                }
                if (cfg.track_v && !is_root && e.parent_birth <= t && e.birth > t)
                    v_sum[i].add(std::exp(-cfg.alpha * e.birth));
            }
            if (cfg.v_final_time >= 0.0 && !is_root && e.parent_birth <= cfg.v_final_time &&
                e.birth > cfg.v_final_time)
                v_final_sum.add(std::exp(-cfg.alpha * e.birth));

            const bool expand = e.birth <= cfg.z_horizon || whole_gen;
            if (!expand) continue;
            RngStream rng(seed, e.key);
            spawn_children(spec, e.type, rng, clutch);
            for (std::size_t c = 0; c < clutch.size(); ++c)
                next.push_back({e.birth + clutch[c].displacement, e.birth,
                                mix_key(e.key, c + 1),
                                static_cast<std::uint16_t>(clutch[c].type)});
        }

        if (proxy_open) {
            if (gen_max_birth > cfg.proxy_horizon) {
                // previous generation was the last complete one
                proxy_open = false;
                whole_gen = false;
            } else {
                res.w.push_back(w_gen.value());
            }
        }
        frontier.swap(next);
        if (proxy_open && frontier.empty()) {
            // extinction: the proxy is absorbed at zero
            res.extinct = true;
            proxy_open = false;
            whole_gen = false;
        }
    }

    if (cfg.proxy_horizon > 0.0) {
        res.n_of_t = static_cast<int>(res.w.size()) - 1;
        res.w_proxy = res.extinct ? 0.0 : (res.w.empty() ? 0.0 : res.w.back());
    }
    for (std::size_t i = 0; i < g; ++i) {
        res.births[i] = births[i];
        for (std::size_t k = 0; k < kinds.size(); ++k) res.z[k][i] = z_sum[k][i].value();
        if (cfg.track_v) res.v_of_t[i] = v_sum[i].value();
    }
    res.v_final = v_final_sum.value();
    return res;
}

}  // namespace cmj
