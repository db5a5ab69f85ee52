#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmj/characteristics.hpp"
#include "cmj/genealogy.hpp"
#include "cmj/model.hpp"
#include "cmj/parallel.hpp"
#include "cmj/report.hpp"
#include "cmj/scan.hpp"
#include "cmj/spectral.hpp"
#include "cmj/stats.hpp"

namespace cmj {

struct MartingaleTrace {
    std::string kind;                                    // "W-by-generation" | "V-by-time" | "R-by-birth-index"
    std::vector<std::pair<double, double>> grid;         // (index or time, value)
    double w_proxy = 0.0;
    std::string proxy_rule;
};

// Last generation fully born within the horizon (first-crossing rule);
// an empty generation short-circuits: the proxy is absorbed at zero.
inline int last_complete_generation(const Tree& tree) {
    if (tree.mode != TreeMode::horizon)
        throw std::invalid_argument("last_complete_generation: horizon-mode trees only");
    int last = -1;
    for (std::size_t gen = 0; gen + 1 < tree.gen_offset.size(); ++gen) {
        const std::size_t b = tree.gen_offset[gen], e = tree.gen_offset[gen + 1];
        if (b == e) return static_cast<int>(gen);  // extinct: complete and empty
        double mx = 0.0;
        for (std::size_t i = b; i < e; ++i) mx = std::max(mx, tree.birth[i]);
        if (mx > tree.horizon) break;
        last = static_cast<int>(gen);
    }
    return last;
}

// W_n = sum_{|x|=n} (v_type(x) / v_root) e^{-alpha S(x)}
inline double biggins_w(const Tree& tree, const SpectralData& spectral, int n) {
    if (n < 0) throw std::invalid_argument("biggins_w: n must be >= 0");
    if (static_cast<std::size_t>(n) >= tree.generations()) {
        if (tree.mode == TreeMode::generations && n <= tree.max_generation) return 0.0;  // extinct
        throw std::invalid_argument("biggins_w: generation " + std::to_string(n) +
                                    " not present in the tree");
    }
    if (tree.mode == TreeMode::horizon && n > last_complete_generation(tree))
        throw std::invalid_argument("biggins_w: generation " + std::to_string(n) +
                                    " is incomplete within the horizon");
    const double vroot = spectral.v[static_cast<std::size_t>(tree.root_type)];
    KahanSum sum;
    for (std::size_t i = tree.gen_offset[static_cast<std::size_t>(n)];
         i < tree.gen_offset[static_cast<std::size_t>(n) + 1]; ++i)
        sum.add(spectral.v[tree.type[i]] / vroot * std::exp(-spectral.alpha * tree.birth[i]));
    return sum.value();
}

// J(t): individuals born after t whose strict ancestors are all born <= t.
// Birth times are monotone along lines, so membership reduces to a local
// check against the parent.
inline std::vector<std::int32_t> coming_generation(const Tree& tree, double t) {
    if (tree.mode != TreeMode::horizon)
        throw std::invalid_argument("coming_generation: tree must be in horizon mode");
    if (t > tree.horizon)
        throw std::invalid_argument("coming_generation: t exceeds the tree horizon");
    std::vector<std::int32_t> line;
    if (t < 0.0) {
        line.push_back(0);
        return line;
    }
    for (std::size_t i = 1; i < tree.size(); ++i)
        if (tree.birth[i] > t && tree.birth[static_cast<std::size_t>(tree.parent[i])] <= t)
            line.push_back(static_cast<std::int32_t>(i));
    return line;
}

// V(t) = sum over J(t) of e^{-alpha S(x)}; single-type processes only.
inline double nerman_v(const Tree& tree, const SpectralData& spectral, double t) {
    if (spectral.v.size() != 1)
        throw std::invalid_argument(
            "nerman_v: defined for single-type trees; use the embedded process for multi-type");
    if (t >= 0.0) {
        // completeness: every parent born <= t must have been expanded
        for (std::size_t i = 0; i < tree.size(); ++i)
            if (tree.birth[i] <= t && !tree.expanded[i])
                throw std::invalid_argument("nerman_v: tree horizon too small for t");
    }
    KahanSum sum;
    for (std::int32_t idx : coming_generation(tree, t))
        sum.add(std::exp(-spectral.alpha * tree.birth[static_cast<std::size_t>(idx)]));
    return sum.value();
}

// Birth-ordered decomposition R_n = 1 + sum_{k<=n} e^{-alpha t_k} Y_k with
// Y_k = [V_1]_{x_k} - 1.
struct RSequence {
    std::vector<double> r;              // R_0..R_N (R_0 = 1)
    std::vector<double> birth_times;    // t_1..t_N
};

inline RSequence r_sequence(const Tree& tree, const SpectralData& spectral) {
    if (spectral.v.size() != 1)
        throw std::invalid_argument("r_sequence: single-type trees only");
    if (tree.mode != TreeMode::horizon)
        throw std::invalid_argument("r_sequence: horizon-mode trees only");
    if (tree.truncated)
        throw std::invalid_argument("r_sequence: truncated tree, children of late parents missing");

    const BirthOrder order = births_up_to(tree, tree.horizon);
    RSequence seq;
    seq.r.reserve(order.count + 1);
    seq.birth_times.reserve(order.count);
    KahanSum acc;
    acc.add(1.0);
    seq.r.push_back(1.0);
    for (std::int32_t idx : order.ordered) {
        const auto x = static_cast<std::size_t>(idx);
        if (!tree.expanded[x])
            throw std::invalid_argument("r_sequence: unexpanded individual within the horizon");
        KahanSum y;
        const auto fc = tree.first_child[x];
        for (std::uint32_t k = 0; k < tree.n_children[x]; ++k)
            y.add(std::exp(-spectral.alpha *
                           (tree.birth[static_cast<std::size_t>(fc) + k] - tree.birth[x])));
        const double yk = y.value() - 1.0;
        acc.add(std::exp(-spectral.alpha * tree.birth[x]) * yk);
        seq.r.push_back(acc.value());
        seq.birth_times.push_back(tree.birth[x]);
    }
    return seq;
}

// max relative deviation of V(t) = R_{T_t} over the grid
inline double r_identity_deviation(const Tree& tree, const SpectralData& spectral,
                                   const std::vector<double>& grid) {
    const RSequence seq = r_sequence(tree, spectral);
    double worst = 0.0;
    for (double t : grid) {
        const std::size_t tt = births_up_to(tree, t).count;
        const double v = nerman_v(tree, spectral, t);
        const double r = seq.r[tt];
        const double denom = std::max({std::abs(v), std::abs(r), 1e-300});
        worst = std::max(worst, std::abs(v - r) / denom);
    }
    return worst;
}

inline double w_proxy(const Tree& tree, const SpectralData& spectral) {
    const int n = last_complete_generation(tree);
    if (n < 0) return 1.0;  // the root generation alone; cannot happen with horizon >= 0
    const std::size_t b = tree.gen_offset[static_cast<std::size_t>(n)];
    const std::size_t e = tree.gen_offset[static_cast<std::size_t>(n) + 1];
    if (b == e) return 0.0;
    return biggins_w(tree, spectral, n);
}

// ---------------------------------------------------------------------------
// Rate-of-convergence experiment for V(t): per replicate, t^delta |V(t) - V~|
// with V~ = V(T) on the same path. Trend contract, not a constant.
inline ExperimentReport nerman_rate_experiment(const ModelSpec& spec, const SpectralData& spectral,
                                               double delta, std::vector<double> grid,
                                               double horizon, std::size_t replicates,
                                               std::uint64_t seed, unsigned workers = 0) {
    if (spec.num_types != 1)
        throw std::invalid_argument("nerman_rate_experiment: single-type models only");
    std::sort(grid.begin(), grid.end());
    if (grid.empty() || grid.back() > horizon)
        throw std::invalid_argument("nerman_rate_experiment: grid must lie within the horizon");

    StopWatch watch;
    ScanConfig cfg;
    cfg.root_type = 0;
    cfg.alpha = spectral.alpha;
    cfg.v = spectral.v;
    cfg.z_horizon = horizon;
    cfg.grid = grid;
    cfg.track_v = true;
    cfg.v_final_time = horizon;

    struct Slot {
        std::vector<double> stat;
        double v_hat = 0.0;
        bool truncated = false;
    };
    std::vector<Slot> slots(replicates);
    parallel_for(
        replicates,
        [&](std::size_t r) {
            const ScanResult res = scan_population(spec, cfg, mix_key(seed, r));
            Slot& s = slots[r];
            s.truncated = res.truncated;
            if (res.truncated) return;
            s.v_hat = res.v_final;
            s.stat.resize(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i)
                s.stat[i] = std::pow(grid[i], delta) * std::abs(res.v_of_t[i] - res.v_final);
        },
        workers);

    ExperimentReport rep;
    rep.kind = "nerman-rate";
    rep.model_fingerprint = model_fingerprint(spec);
    rep.seed = seed;
    rep.replicates_requested = replicates;
    rep.params = {{"delta", delta}, {"grid", grid}, {"horizon", horizon}};

    std::vector<std::vector<double>> by_t(grid.size());
    std::vector<double> v_hats;
    for (const Slot& s : slots) {
        if (s.truncated) {
            ++rep.replicates_discarded;
            continue;
        }
        ++rep.replicates_used;
        v_hats.push_back(s.v_hat);
        for (std::size_t i = 0; i < grid.size(); ++i) by_t[i].push_back(s.stat[i]);
    }

    json stats = json::array();
    std::vector<double> logt, logq90;
    std::vector<double> q90s;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const MeanSe ms = mean_se(by_t[i]);
        const double q50 = quantile(by_t[i], 0.5);
        const double q90 = quantile(by_t[i], 0.9);
        q90s.push_back(q90);
        if (q90 > 0.0) {
            logt.push_back(std::log(grid[i]));
            logq90.push_back(std::log(q90));
        }
        stats.push_back({{"t", grid[i]},
                         {"mean", ms.mean},
                         {"se", ms.se},
                         {"q50", q50},
                         {"q90", q90}});
    }
    rep.stats = stats;
    const double slope = fit_slope(logt, logq90);
    rep.params["loglog_slope_q90"] = std::isnan(slope) ? json() : json(slope);
    rep.per_replicate = {{"v_hat", v_hats}};
    for (std::size_t i = 0; i < grid.size(); ++i)
        rep.per_replicate["stat"][std::to_string(grid[i])] = by_t[i];

    const bool all_zero = q90s.front() == 0.0 && q90s.back() == 0.0;
    const bool decays = all_zero || q90s.back() < q90s.front();
    rep.verdicts.push_back(
        {"q90_rate_statistic_decreasing",
         decays,
         "q90 at t=" + std::to_string(grid.back()) + " is " + std::to_string(q90s.back()) +
             " vs " + std::to_string(q90s.front()) + " at t=" + std::to_string(grid.front()) +
             (all_zero ? " (statistic identically zero)" : "")});
    rep.wall_ms = watch.ms();
    return rep;
}

}  // namespace cmj
