#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cmj {

struct Verdict {
    std::string contract;
    bool pass = false;
    std::string detail;
};

// A seeded, replicated Monte Carlo verification run. Everything inside
// `body` is deterministic for a fixed seed; wall-clock lives outside so that
// re-runs are byte-identical.
struct ExperimentReport {
    std::string name;
    std::string kind;
    std::string model_fingerprint;
    std::uint64_t seed = 0;
    std::size_t replicates_requested = 0;
    std::size_t replicates_used = 0;
    std::size_t replicates_discarded = 0;
    json params;             // experiment-specific settings
    json stats;              // per-grid-point statistics (mean, se, q50, q90)
    json per_replicate;      // raw per-replicate statistics, for recomputation
    std::vector<Verdict> verdicts;
    double wall_ms = 0.0;

    bool all_pass() const {
        for (const Verdict& v : verdicts)
            if (!v.pass) return false;
        return true;
    }

    json body() const {
        json verdicts_json = json::array();
        for (const Verdict& v : verdicts)
            verdicts_json.push_back({{"contract", v.contract}, {"pass", v.pass}, {"detail", v.detail}});
        return json{{"experiment", name},
                    {"kind", kind},
                    {"model_fingerprint", model_fingerprint},
                    {"seed", seed},
                    {"replicates",
                     {{"requested", replicates_requested},
                      {"used", replicates_used},
                      {"discarded_truncated", replicates_discarded}}},
                    {"params", params},
                    {"stats", stats},
                    {"per_replicate", per_replicate},
                    {"verdicts", verdicts_json}};
    }

    json to_json() const { return json{{"body", body()}, {"wall_clock_ms", wall_ms}}; }
};

inline void write_report(const ExperimentReport& rep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << rep.to_json().dump(2) << '\n';
}

class StopWatch {
public:
    StopWatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace cmj
