#pragma once

#include <cstdint>
#include <string>

#include "pancake/perception.hpp"
#include "pancake/sim.hpp"

namespace pancake {

// Run-wide settings. Every field has a usable default so the CLI works
// with no config file at all; a config file overrides selectively.
struct RunConfig {
    SurrogateParams sim;
    double uniformity_threshold_fraction = 0.05;  // of the first trial's torque
    double jump_threshold_sigmas = 6.0;           // air/batter split, in sigma_air units
    WeightingMode weighting_mode = WeightingMode::InverseMse;
    std::uint64_t seed = 0;
    std::string units = "m";  // unit for bare numbers at the CLI: mm | cm | m
    std::string dataset_dir = "data";
    std::string model_dir = ".";
    std::string output_dir = "reports";

    double jump_threshold() const { return jump_threshold_sigmas * sim.sigma_air; }
};

// Flat key=value text with [section] headers; '#' starts a comment.
// Unknown keys or sections are hard errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

// "30mm", "2.5cm", "0.03m" or a bare number in `default_unit`.
double parse_length(const std::string& text, const std::string& default_unit = "m");

}  // namespace pancake
