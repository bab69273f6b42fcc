#pragma once

#include <cstdint>
#include <string>

#include "tanglekit/detect.hpp"
#include "tanglekit/evaluate.hpp"
#include "tanglekit/synth.hpp"
#include "tanglekit/track.hpp"
#include "tanglekit/wormsim.hpp"

namespace tanglekit {

// Bundle of every tunable the pipeline consumes, parsed from one JSON
// document.  Each section is optional and falls back to the defaults of the
// corresponding struct; unknown keys anywhere in the document are rejected so
// a typo cannot silently revert a knob to its default.
struct RunConfig {
    std::uint64_t seed = 1;

    wormsim::SimConfig sim;
    synth::RenderConfig render;
    synth::NoiseConfig noise;
    detect::OracleDetectorConfig oracle;
    detect::Thresholds thresholds;
    track::LinkConfig link;
    evaluate::EvalConfig eval;

    // Validates every section; throws std::invalid_argument on the first
    // violated constraint.
    void validate() const;
};

// Parses a RunConfig from JSON text.  Throws std::runtime_error on malformed
// JSON (message carries the byte offset) and std::invalid_argument on unknown
// keys, wrong types, or out-of-range values.
RunConfig parse_run_config(const std::string& text);

// Reads `path` and parses it with parse_run_config.  Throws
// std::runtime_error if the file cannot be read.
RunConfig load_run_config(const std::string& path);

// Serializes `config` back to a JSON document (round-trips through
// parse_run_config).
std::string dump_run_config(const RunConfig& config);

}  // namespace tanglekit
