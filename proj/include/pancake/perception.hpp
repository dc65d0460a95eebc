#pragma once

#include <string>
#include <vector>

#include "pancake/geom.hpp"
#include "pancake/sim.hpp"

namespace pancake {

// ---------------------------------------------------------------------------
// Uniformity stopping rule

struct UniformityMonitor {
    std::vector<double> trial_torques;  // mean push torque per stirring trial
    double threshold = 0.0;             // N*m, absolute change threshold
};

// True once the change between the two most recent trials is below the
// threshold. Needs at least two recorded trials.
bool is_uniform(const UniformityMonitor& monitor);

// ---------------------------------------------------------------------------
// Liquid level

struct LinePair {
    double slope = 0.0;
    double intercept = 0.0;
};

struct LevelEstimate {
    double level = 0.0;
    LinePair batter_line;  // torque vs tip height while immersed (negative slope)
    LinePair air_line;     // torque vs tip height in air (about zero)
    int split_index = 0;   // index of the first air-side sample
};

// Splits the curve into an immersed part and an air part at the point
// where readings settle to zero, fits a line to each side, and reports
// the intersection abscissa as the liquid level.
//
// jump_threshold separates "within noise of zero" from real readings; the
// conventional choice is 6 * sigma_air.
LevelEstimate estimate_level(const TorqueCurve& curve, double jump_threshold);

// ---------------------------------------------------------------------------
// Water-flour ratio

enum class WeightingMode { InverseMse, PaperLiteral };

struct RatioEntry {
    double ratio = 0.0;  // training label
    double slope = 0.0;  // fitted torque per metre of immersion
};

struct RatioModel {
    std::vector<RatioEntry> entries;  // sorted by ratio
    WeightingMode weighting_mode = WeightingMode::InverseMse;
};

struct RatioTrainingBatch {
    double ratio_label = 0.0;
    TorqueCurve curve;
    double level = 0.0;
};

// Fits one torque-vs-immersion line through the origin per labelled batch.
RatioModel fit_ratio_model(const std::vector<RatioTrainingBatch>& training);

// Mean squared error between a model entry's predicted torques and the
// measured immersed samples of `curve`.
double ratio_entry_mse(const RatioEntry& entry, const TorqueCurve& curve, double level);

// Ratio estimate from the two best-matching entries. InverseMse weights
// each candidate by the other's error (closer curve dominates);
// PaperLiteral applies the weights the other way round.
double estimate_ratio(const TorqueCurve& curve, double level, const RatioModel& model);

std::string to_string(WeightingMode mode);
WeightingMode weighting_mode_from_string(const std::string& name);

void save_ratio_model(const RatioModel& model, const std::string& path);
RatioModel load_ratio_model(const std::string& path);

void save_torque_curve(const TorqueCurve& curve, const std::string& path);
TorqueCurve load_torque_curve(const std::string& path);

// ---------------------------------------------------------------------------
// Bowl localization

struct CircleFit {
    Vec2 center;
    double radius = 0.0;
};

// Algebraic least-squares circle through >= 3 non-collinear points.
CircleFit fit_circle(const std::vector<Vec2>& points);

}  // namespace pancake
