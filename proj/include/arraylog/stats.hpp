#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace arraylog {

inline constexpr std::array<const char*, 6> kPhaseOrder = {
    "index", "join", "dedup", "difference", "merge", "other"};

// Per-run measurements mirroring the evaluation pipeline's phase
// breakdown: wall time per phase, the delta fed into each iteration per
// recursive relation, allocation counters, and peak tracked bytes.
struct run_stats {
    std::map<std::string, double> phase_seconds;
    double total_seconds = 0.0;
    std::size_t iterations = 0;
    // relation -> delta row count consumed by iteration i (1-based order)
    std::vector<std::pair<std::string, std::vector<std::size_t>>>
        delta_history;
    std::size_t buffer_allocations = 0;
    std::size_t charge_events = 0;
    std::size_t peak_tracked_bytes = 0;
    std::size_t peak_temp_bytes = 0;

    double phase(const std::string& name) const {
        auto it = phase_seconds.find(name);
        return it == phase_seconds.end() ? 0.0 : it->second;
    }

    // `other` is the uncategorized remainder of the run.
    double other_seconds() const {
        double categorized = 0.0;
        for (const char* p : kPhaseOrder)
            if (std::string(p) != "other") categorized += phase(p);
        double rest = total_seconds - categorized;
        return rest > 0.0 ? rest : 0.0;
    }
};

// Fixed-order TSV: the phase table, then one iteration/delta_rows table
// per recursive relation introduced by a `relation` line.
inline std::string to_tsv(const run_stats& s) {
    std::ostringstream out;
    out << "phase\tseconds\n";
    for (const char* p : kPhaseOrder) {
        double v = std::string(p) == "other" ? s.other_seconds() : s.phase(p);
        out << p << "\t" << v << "\n";
    }
    for (const auto& [relation, deltas] : s.delta_history) {
        out << "relation\t" << relation << "\n";
        out << "iteration\tdelta_rows\n";
        for (std::size_t i = 0; i < deltas.size(); ++i)
            out << (i + 1) << "\t" << deltas[i] << "\n";
    }
    return out.str();
}

inline nlohmann::json to_json(const run_stats& s) {
    nlohmann::json phases;
    for (const char* p : kPhaseOrder)
        phases[p] =
            std::string(p) == "other" ? s.other_seconds() : s.phase(p);
    nlohmann::json deltas;
    for (const auto& [relation, history] : s.delta_history)
        deltas[relation] = history;
    return nlohmann::json{{"phases", phases},
                          {"total_seconds", s.total_seconds},
                          {"iterations", s.iterations},
                          {"delta_history", deltas},
                          {"buffer_allocations", s.buffer_allocations},
                          {"charge_events", s.charge_events},
                          {"peak_tracked_bytes", s.peak_tracked_bytes},
                          {"peak_temp_bytes", s.peak_temp_bytes}};
}

}  // namespace arraylog
