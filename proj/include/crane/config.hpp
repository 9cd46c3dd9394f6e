#pragma once

#include <cstdint>
#include <string>

#include "crane/simulate.hpp"

namespace crane::config {

/// Settings for the stability-certificate search.
struct StabilitySettings {
    double radius_max = 1.0;
    int samples = 2000;
    std::uint64_t seed = 1;
};

struct RunConfig {
    sim::Scenario scenario;
    StabilitySettings stability;
};

/// Parse a config document. Sections: [params], [scenario], [poles],
/// [integration], [stability]. Unknown sections/keys, malformed values
/// and invariant violations raise ConfigError naming the line.
RunConfig parse(const std::string& text);

RunConfig load_file(const std::string& path);

/// Canonical text form; parse(serialize(c)) reproduces c exactly.
std::string serialize(const RunConfig& cfg);

bool semantically_equal(const RunConfig& a, const RunConfig& b);

} // namespace crane::config
