#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmj/distributions.hpp"
#include "cmj/rng.hpp"

namespace cmj {

using json = nlohmann::json;

// count children of one type drawn with i.i.d. displacements from one law
struct ClutchEntry {
    int child_type = 0;  // 0-based internally; 1-based in JSON and CLI
    int count = 1;
    DisplacementLaw displacement;
};

struct Clutch {
    double weight = 1.0;
    std::vector<ClutchEntry> entries;  // empty = no offspring
};

struct OffspringLaw {
    std::vector<Clutch> clutches;
};

struct ModelSpec {
    int num_types = 0;
    std::vector<OffspringLaw> laws;  // one per type
};

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// JSON schema (version 1):
// {
//   "schema": 1,
//   "types": p,
//   "laws": [ per type: [ { "weight": w,
//                           "clutch": [ { "type": j (1-based), "count": k,
//                                         "displacement": {"kind": ..., ...} } ] } ] ]
// }
// Displacement kinds: deterministic{d}, exponential{rate},
// gamma{shape, rate}, uniform{a, b}.

namespace detail {

inline const json& field(const json& j, const char* key, const std::string& path) {
    if (!j.is_object() || !j.contains(key))
        throw ModelError("model json: missing field '" + std::string(key) + "' at " + path);
    return j.at(key);
}

inline double num_field(const json& j, const char* key, const std::string& path) {
    const json& v = field(j, key, path);
    if (!v.is_number())
        throw ModelError("model json: field '" + std::string(key) + "' at " + path +
                         " must be a number");
    return v.get<double>();
}

inline DisplacementLaw parse_displacement(const json& j, const std::string& path) {
    const json& kind = field(j, "kind", path);
    const std::string k = kind.get<std::string>();
    if (k == "deterministic") {
        const double d = num_field(j, "d", path);
        if (d < 0.0) throw ModelError("model json: " + path + "/d must be >= 0");
        return Deterministic{d};
    }
    if (k == "exponential") {
        const double rate = num_field(j, "rate", path);
        if (rate <= 0.0) throw ModelError("model json: " + path + "/rate must be > 0");
        return Exponential{rate};
    }
    if (k == "gamma") {
        const double shape = num_field(j, "shape", path);
        const double rate = num_field(j, "rate", path);
        if (shape <= 0.0) throw ModelError("model json: " + path + "/shape must be > 0");
        if (rate <= 0.0) throw ModelError("model json: " + path + "/rate must be > 0");
        return GammaLaw{shape, rate};
    }
    if (k == "uniform") {
        const double a = num_field(j, "a", path);
        const double b = num_field(j, "b", path);
        if (a < 0.0) throw ModelError("model json: " + path + "/a must be >= 0");
        if (b <= a) throw ModelError("model json: " + path + "/b must be > a");
        return UniformLaw{a, b};
    }
    throw ModelError("model json: unknown displacement kind '" + k + "' at " + path);
}

}  // namespace detail

inline ModelSpec parse_model(const json& j) {
    using detail::field;
    if (!j.is_object()) throw ModelError("model json: top level must be an object");
    const json& schema = field(j, "schema", "/");
    if (!schema.is_number_integer() || schema.get<int>() != 1)
        throw ModelError("model json: /schema must be 1");
    const json& types = field(j, "types", "/");
    if (!types.is_number_integer() || types.get<int>() < 1)
        throw ModelError("model json: /types must be an integer >= 1");

    ModelSpec spec;
    spec.num_types = types.get<int>();
    const json& laws = field(j, "laws", "/");
    if (!laws.is_array() || static_cast<int>(laws.size()) != spec.num_types)
        throw ModelError("model json: /laws must be an array of length /types");

    for (int i = 0; i < spec.num_types; ++i) {
        const std::string lpath = "/laws/" + std::to_string(i);
        const json& jl = laws.at(i);
        if (!jl.is_array() || jl.empty())
            throw ModelError("model json: " + lpath + " must be a non-empty array of clutches");
        OffspringLaw law;
        for (std::size_t c = 0; c < jl.size(); ++c) {
            const std::string cpath = lpath + "/" + std::to_string(c);
            const json& jc = jl.at(c);
            Clutch clutch;
            clutch.weight = detail::num_field(jc, "weight", cpath);
            if (!(clutch.weight > 0.0))
                throw ModelError("model json: " + cpath + "/weight must be > 0");
            const json& entries = field(jc, "clutch", cpath);
            if (!entries.is_array())
                throw ModelError("model json: " + cpath + "/clutch must be an array");
            for (std::size_t e = 0; e < entries.size(); ++e) {
                const std::string epath = cpath + "/clutch/" + std::to_string(e);
                const json& je = entries.at(e);
                ClutchEntry entry;
                const double ty = detail::num_field(je, "type", epath);
                if (ty < 1 || ty > spec.num_types || ty != std::floor(ty))
                    throw ModelError("model json: " + epath + "/type must be in 1.." +
                                     std::to_string(spec.num_types));
                entry.child_type = static_cast<int>(ty) - 1;
                const double cnt = detail::num_field(je, "count", epath);
                if (cnt < 1 || cnt != std::floor(cnt))
                    throw ModelError("model json: " + epath + "/count must be a positive integer");
                entry.count = static_cast<int>(cnt);
                entry.displacement =
                    detail::parse_displacement(field(je, "displacement", epath), epath + "/displacement");
                clutch.entries.push_back(std::move(entry));
            }
            law.clutches.push_back(std::move(clutch));
        }
        double wsum = 0.0;
        for (const Clutch& c : law.clutches) wsum += c.weight;
        if (std::abs(wsum - 1.0) > 1e-12)
            throw ModelError("model json: " + lpath + " clutch weights must sum to 1 (got " +
                             std::to_string(wsum) + ")");
        spec.laws.push_back(std::move(law));
    }
    return spec;
}

inline ModelSpec load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ModelError("model json parse error in " + path + ": " + e.what());
    }
    return parse_model(j);
}

inline json displacement_to_json(const DisplacementLaw& law) {
    json j;
    std::visit(
        [&j](const auto& l) {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, Deterministic>) {
                j = {{"kind", "deterministic"}, {"d", l.d}};
            } else if constexpr (std::is_same_v<T, Exponential>) {
                j = {{"kind", "exponential"}, {"rate", l.rate}};
            } else if constexpr (std::is_same_v<T, GammaLaw>) {
                j = {{"kind", "gamma"}, {"shape", l.shape}, {"rate", l.rate}};
            } else {
                j = {{"kind", "uniform"}, {"a", l.a}, {"b", l.b}};
            }
        },
        law);
    return j;
}

inline json model_to_json(const ModelSpec& spec) {
    json laws = json::array();
    for (const OffspringLaw& law : spec.laws) {
        json jl = json::array();
        for (const Clutch& c : law.clutches) {
            json entries = json::array();
            for (const ClutchEntry& e : c.entries)
                entries.push_back({{"type", e.child_type + 1},
                                   {"count", e.count},
                                   {"displacement", displacement_to_json(e.displacement)}});
            jl.push_back({{"weight", c.weight}, {"clutch", entries}});
        }
        laws.push_back(jl);
    }
    return json{{"schema", 1}, {"types", spec.num_types}, {"laws", laws}};
}

// FNV-1a over the canonical (key-sorted, normalized) serialization.
inline std::string model_fingerprint(const ModelSpec& spec) {
    const std::string s = model_to_json(spec).dump();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

// ---------------------------------------------------------------------------
// Structural helpers

// mean offspring counts: entry (i, j) = E[# type-j children of a type-i parent]
inline std::vector<std::vector<double>> count_matrix(const ModelSpec& spec) {
    std::vector<std::vector<double>> m(spec.num_types, std::vector<double>(spec.num_types, 0.0));
    for (int i = 0; i < spec.num_types; ++i)
        for (const Clutch& c : spec.laws[i].clutches)
            for (const ClutchEntry& e : c.entries)
                m[i][e.child_type] += c.weight * e.count;
    return m;
}

// strong connectivity of the support graph of the mean matrix
inline bool support_irreducible(const std::vector<std::vector<double>>& m) {
    const int p = static_cast<int>(m.size());
    if (p == 1) return m[0][0] > 0.0;
    auto reach = [&](bool transpose) {
        std::vector<char> seen(p, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int w = 0; w < p; ++w) {
                const double entry = transpose ? m[w][v] : m[v][w];
                if (entry > 0.0 && !seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
            }
        }
        for (char s : seen)
            if (!s) return false;
        return true;
    };
    return reach(false) && reach(true);
}

inline bool all_displacements_deterministic(const ModelSpec& spec) {
    for (const OffspringLaw& law : spec.laws)
        for (const Clutch& c : law.clutches)
            for (const ClutchEntry& e : c.entries)
                if (!is_deterministic(e.displacement)) return false;
    return true;
}

inline bool has_nondeterministic_displacement(const ModelSpec& spec) {
    return !all_displacements_deterministic(spec);
}

// One realized clutch: draws the mixture component, then i.i.d. displacements
// entry by entry. The draw order is part of the reproducibility contract.
struct SpawnedChild {
    int type;
    double displacement;
};

inline void spawn_children(const ModelSpec& spec, int parent_type, RngStream& rng,
                           std::vector<SpawnedChild>& out) {
    out.clear();
    const OffspringLaw& law = spec.laws[parent_type];
    const double u = rng.uniform01();
    double acc = 0.0;
    const Clutch* chosen = &law.clutches.back();
    for (const Clutch& c : law.clutches) {
        acc += c.weight;
        if (u < acc) {
            chosen = &c;
            break;
        }
    }
    for (const ClutchEntry& e : chosen->entries)
        for (int k = 0; k < e.count; ++k)
            out.push_back({e.child_type, sample(e.displacement, rng)});
}

}  // namespace cmj
