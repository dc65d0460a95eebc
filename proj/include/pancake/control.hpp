#pragma once

#include <cstdint>
#include <vector>

#include "pancake/geom.hpp"
#include "pancake/mask.hpp"
#include "pancake/mlp.hpp"
#include "pancake/planner.hpp"
#include "pancake/sim.hpp"

namespace pancake {

inline constexpr double kTiltRate = 0.007;        // rad/s while pouring
inline constexpr double kInitialAngleMargin = 0.05;  // rad below the expected threshold
inline constexpr double kPenUpSpeed = 0.05;       // m/s travel between strokes

// Arm speed for a desired stroke width at a given ratio. Clamped to the
// rig's usable range; warns on stderr when asked to extrapolate more than
// 10% beyond the training range.
double predict_speed(const MlpModel& speed_model, double ratio, double target_width);

// Stationary pour duration for a desired pancake diameter.
double predict_pour_time(const MlpModel& time_model, double ratio, double target_diameter);

// ---------------------------------------------------------------------------
// KMeans (Lloyd iterations with deterministic kmeans++ style seeding)

struct KmeansResult {
    std::vector<int> labels;
    std::vector<std::vector<double>> centroids;
    std::vector<double> inertia_history;  // nonincreasing
};

KmeansResult kmeans(const std::vector<std::vector<double>>& points, int k, int max_iters,
                    std::uint64_t seed);

// ---------------------------------------------------------------------------
// Drip detection from spout frames

struct DripEvents {
    int flow_start_frame = -1;  // extent first exceeds the running baseline
    int spout_end_frame = -1;   // first frame of the post-growth plateau
};

// Vertical extent (max_row - min_row) of the foreground per frame.
std::vector<int> vertical_extents(const std::vector<BinaryMask>& frames);

DripEvents detect_drip(const std::vector<BinaryMask>& frames);

// ---------------------------------------------------------------------------
// Initial angle and pour start

// Deliberate underestimate of the pour threshold for this fill level.
double initial_angle(double level, const SurrogateParams& p);

struct PourStart {
    double start_angle = 0.0;  // tilt angle when the motion begins
    double elapsed = 0.0;      // seconds spent tilting and watching
    DripEvents events;
};

// Closed loop against the simulator: tilt from the initial angle at the
// standard rate, watch the spout frames, and begin once the batter has
// reached the spout tip.
PourStart start_pour(const BatterTruth& truth, const SurrogateParams& p, std::uint64_t rng_seed,
                     double frame_dt = 0.25);

// ---------------------------------------------------------------------------
// Execution plan

enum class PenState { Down, Up };

struct PlanWaypoint {
    Vec2 position;
    double speed = 0.0;
    PenState pen = PenState::Down;
};

struct PourPlan {
    double initial_tilt = 0.0;  // rad, starting angle before drip search
    double tilt_rate = kTiltRate;
    std::vector<PlanWaypoint> waypoints;
};

// Times a planned trajectory: every pen-down segment moves at the model
// speed for this batter and stroke width; travel between strokes is pen-up
// with the flow cut.
PourPlan plan_execution(const Trajectory& traj, double ratio, double level,
                        const MlpModel& speed_model, const SurrogateParams& p);

double plan_pen_down_duration(const PourPlan& plan);

}  // namespace pancake
