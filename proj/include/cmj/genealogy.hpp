#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmj/model.hpp"
#include "cmj/rng.hpp"

namespace cmj {

inline constexpr std::uint64_t kRootKey = 0xC0FFEE0DDBA11ULL;
inline constexpr std::size_t kDefaultPopulationCap = 10'000'000;

enum class TreeMode { horizon, generations };

struct SimulateOptions {
    int root_type = 0;  // 0-based
    TreeMode mode = TreeMode::horizon;
    double horizon = 0.0;
    int max_generation = 0;
    std::uint64_t seed = 0;
    std::size_t cap = kDefaultPopulationCap;
    // When set, individuals other than the root whose path from the root
    // contains `stop_after_hits` individuals of this type are not expanded.
    // Used for the optional-line machinery.
    std::optional<int> stop_at_type;
    int stop_after_hits = 1;
};

// Flat breadth-first genealogy. Within a generation, the storage order is the
// lexicographic order of Ulam-Harris addresses; generation g occupies
// [gen_offset[g], gen_offset[g+1]).
struct Tree {
    TreeMode mode = TreeMode::horizon;
    double horizon = 0.0;
    int max_generation = 0;
    int root_type = 0;
    std::uint64_t seed = 0;
    bool truncated = false;

    std::vector<double> birth;
    std::vector<std::int32_t> parent;       // -1 for the root
    std::vector<std::int32_t> first_child;  // -1 when childless or unexpanded
    std::vector<std::uint32_t> n_children;
    std::vector<std::uint16_t> type;        // 0-based
    std::vector<std::uint8_t> expanded;     // clutch realized
    std::vector<std::size_t> gen_offset;

    std::size_t size() const noexcept { return birth.size(); }
    std::size_t generations() const noexcept { return gen_offset.size() - 1; }

    int generation_of(std::size_t idx) const {
        const auto it = std::upper_bound(gen_offset.begin(), gen_offset.end(), idx);
        return static_cast<int>(it - gen_offset.begin()) - 1;
    }

    // Ulam-Harris address (1-based child ranks); empty for the root.
    std::vector<int> address(std::size_t idx) const {
        std::vector<int> path;
        auto i = static_cast<std::int32_t>(idx);
        while (parent[static_cast<std::size_t>(i)] >= 0) {
            const std::int32_t par = parent[static_cast<std::size_t>(i)];
            path.push_back(i - first_child[static_cast<std::size_t>(par)] + 1);
            i = par;
        }
        std::reverse(path.begin(), path.end());
        return path;
    }
};

inline Tree simulate(const ModelSpec& spec, const SimulateOptions& opt) {
    if (opt.root_type < 0 || opt.root_type >= spec.num_types)
        throw std::invalid_argument("simulate: root type out of range");
    if (opt.mode == TreeMode::horizon && opt.horizon < 0.0)
        throw std::invalid_argument("simulate: horizon must be >= 0");

    Tree tree;
    tree.mode = opt.mode;
    tree.horizon = opt.horizon;
    tree.max_generation = opt.max_generation;
    tree.root_type = opt.root_type;
    tree.seed = opt.seed;

    tree.birth.push_back(0.0);
    tree.parent.push_back(-1);
    tree.first_child.push_back(-1);
    tree.n_children.push_back(0);
    tree.type.push_back(static_cast<std::uint16_t>(opt.root_type));
    tree.expanded.push_back(0);
    tree.gen_offset = {0, 1};

    std::vector<std::uint64_t> keys{kRootKey};
    std::vector<std::uint8_t> hits{0};  // type hits along the path, for stop_at_type
    std::vector<SpawnedChild> clutch;

    std::size_t gen_begin = 0, gen_end = 1;
    int gen = 0;
    bool stopped = false;
    while (gen_begin < gen_end && !stopped) {
        if (opt.mode == TreeMode::generations && gen >= opt.max_generation) break;
        std::vector<std::uint64_t> next_keys;
        std::vector<std::uint8_t> next_hits;
        for (std::size_t i = gen_begin; i < gen_end && !stopped; ++i) {
            const bool within =
                opt.mode == TreeMode::horizon ? tree.birth[i] <= opt.horizon : true;
            const bool line_stopped =
                opt.stop_at_type && i > 0 && hits[i - gen_begin] >= opt.stop_after_hits;
            if (!within || line_stopped) continue;
            if (tree.size() >= opt.cap) {
                tree.truncated = true;
                stopped = true;
                break;
            }
            RngStream rng(opt.seed, keys[i - gen_begin]);
            spawn_children(spec, tree.type[i], rng, clutch);
            tree.expanded[i] = 1;
            if (clutch.empty()) continue;
            tree.first_child[i] = static_cast<std::int32_t>(tree.size());
            tree.n_children[i] = static_cast<std::uint32_t>(clutch.size());
            for (std::size_t c = 0; c < clutch.size(); ++c) {
                tree.birth.push_back(tree.birth[i] + clutch[c].displacement);
                tree.parent.push_back(static_cast<std::int32_t>(i));
                tree.first_child.push_back(-1);
                tree.n_children.push_back(0);
                tree.type.push_back(static_cast<std::uint16_t>(clutch[c].type));
                tree.expanded.push_back(0);
                next_keys.push_back(mix_key(keys[i - gen_begin], c + 1));
                std::uint8_t h = opt.stop_at_type ? hits[i - gen_begin] : std::uint8_t{0};
                if (opt.stop_at_type && clutch[c].type == *opt.stop_at_type && h < 255) ++h;
                next_hits.push_back(h);
            }
        }
        gen_begin = gen_end;
        gen_end = tree.size();
        keys = std::move(next_keys);
        hits = std::move(next_hits);
        ++gen;
        if (gen_end > gen_begin || (opt.mode == TreeMode::generations && gen <= opt.max_generation))
            tree.gen_offset.push_back(gen_end);
    }
    // Generations mode reports empty trailing generations of extinct trees.
    if (opt.mode == TreeMode::generations)
        while (static_cast<int>(tree.generations()) <= opt.max_generation)
            tree.gen_offset.push_back(tree.size());
    return tree;
}

inline std::vector<std::size_t> generation_sizes(const Tree& tree) {
    std::vector<std::size_t> sizes;
    for (std::size_t g = 0; g + 1 < tree.gen_offset.size(); ++g)
        sizes.push_back(tree.gen_offset[g + 1] - tree.gen_offset[g]);
    return sizes;
}

struct BirthOrder {
    std::size_t count = 0;                    // T_t
    std::vector<std::int32_t> ordered;        // indices, by (birth time, generation, lex)
};

// Individuals born up to and including t, in birth order; ties broken first
// by generation, then lexicographically. BFS storage order realizes exactly
// that tie-break, so the index doubles as the tie key.
inline BirthOrder births_up_to(const Tree& tree, double t) {
    if (tree.mode != TreeMode::horizon)
        throw std::invalid_argument("births_up_to: tree must be in horizon mode");
    if (t > tree.horizon) throw std::invalid_argument("births_up_to: t exceeds the tree horizon");
    BirthOrder out;
    for (std::size_t i = 0; i < tree.size(); ++i)
        if (tree.birth[i] <= t) out.ordered.push_back(static_cast<std::int32_t>(i));
    std::sort(out.ordered.begin(), out.ordered.end(), [&tree](std::int32_t a, std::int32_t b) {
        if (tree.birth[static_cast<std::size_t>(a)] != tree.birth[static_cast<std::size_t>(b)])
            return tree.birth[static_cast<std::size_t>(a)] < tree.birth[static_cast<std::size_t>(b)];
        return a < b;
    });
    out.count = out.ordered.size();
    return out;
}

}  // namespace cmj
