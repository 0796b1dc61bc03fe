#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>

#include "blunderfit/exclusion.hpp"
#include "blunderfit/simulation.hpp"

namespace blunderfit {

struct InputDigest {
    std::string path;
    std::int64_t n = 0;
    std::int64_t p = 0;
};

/// Everything `fit` knows about one run; serializes to the documented
/// report schema (input / config / iterations / final / timing_ms).
struct RunReport {
    InputDigest input;
    ExclusionConfig config;
    ExclusionOutcome outcome;
    double timing_ms = 0.0;
};

nlohmann::ordered_json to_json(const RunReport& report);
nlohmann::ordered_json to_json(const SimulationReport& report);

/// Canonical serialization: 2-space indent, keys in insertion order,
/// integers plain, every double as %.11e (12 significant digits, enough
/// that parse + re-serialize is byte-identical). Throws on non-finite
/// numbers; reports must not contain them.
std::string canonical_json(const nlohmann::ordered_json& value);

/// parse + canonical_json; the round-trip the schema guarantees.
std::string reserialize_json(const std::string& text);

}  // namespace blunderfit
