#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pancake {

// Torque curve classified entirely as air: there is nothing to measure.
struct NoBatterDetected : std::runtime_error {
    explicit NoBatterDetected(const std::string& what) : std::runtime_error(what) {}
};

// Probe never cleared the surface, so the air side of the curve is missing.
struct ProbeRangeTooShallow : std::runtime_error {
    explicit ProbeRangeTooShallow(const std::string& what) : std::runtime_error(what) {}
};

// Too few immersed samples to fit; refusing to extrapolate.
struct ProbeRangeTooCoarse : std::runtime_error {
    explicit ProbeRangeTooCoarse(const std::string& what) : std::runtime_error(what) {}
};

// Drip monitor saw no extent growth in the whole frame sequence.
struct NoFlowDetected : std::runtime_error {
    explicit NoFlowDetected(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file; offset is the byte position of the problem.
struct ParseError : std::runtime_error {
    ParseError(const std::string& what, std::size_t byte_offset)
        : std::runtime_error(what + " (byte " + std::to_string(byte_offset) + ")"),
          offset(byte_offset) {}
    std::size_t offset;
};

// Bad key or value in a run configuration.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pancake
