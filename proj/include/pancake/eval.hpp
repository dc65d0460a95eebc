#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pancake/control.hpp"
#include "pancake/mask.hpp"
#include "pancake/mlp.hpp"
#include "pancake/perception.hpp"
#include "pancake/planner.hpp"
#include "pancake/sim.hpp"

namespace pancake {

// ---------------------------------------------------------------------------
// Reports

struct ReportRow {
    std::string method;
    double ratio = 0.0;     // batter ratio of the trial (0 when not applicable)
    double target = 0.0;    // commanded quantity
    double measured = 0.0;  // achieved quantity
    double abs_error = 0.0;
    double pct_error = 0.0;  // abs_error / target
};

struct MethodAggregate {
    std::string method;
    double mean_abs_error = 0.0;
    double mean_pct_error = 0.0;
    double mean_variance = 0.0;      // mean over target groups of measured-value variance
    double mean_pct_variance = 0.0;  // mean over groups of std/target
};

struct ExperimentReport {
    std::string name;
    std::vector<ReportRow> rows;
    std::vector<MethodAggregate> aggregates;
};

std::vector<MethodAggregate> recompute_aggregates(const std::vector<ReportRow>& rows);
const MethodAggregate& aggregate_for(const ExperimentReport& report, const std::string& method);
void save_report_csv(const ExperimentReport& report, const std::string& path);
void save_report_json(const ExperimentReport& report, const std::string& path);

// ---------------------------------------------------------------------------
// Deposit measurements

// Mean and variance of the deposited width, sampled on perpendicular
// cross-sections every 2 mm along the stroke, skipping half a nominal
// width at each end.
struct WidthMeasurement {
    double mean = 0.0;
    double variance = 0.0;
};

WidthMeasurement measure_stroke_width(const DepositionGrid& grid, const std::vector<Vec2>& stroke,
                                      double nominal_width);

struct DiskMeasurement {
    double area = 0.0;      // m^2 of cells above the deposit threshold
    double diameter = 0.0;  // equivalent circular diameter
};

DiskMeasurement measure_disk(const DepositionGrid& grid);

inline constexpr double kDepositThreshold = 1e-4;  // 0.1 mm counts as covered

// Intersection-over-union between a target mask and the deposited cells.
double deposit_iou(const BinaryMask& target, const DepositionGrid& grid);

// ---------------------------------------------------------------------------
// Pipeline helpers

// Noise scaled to the individual batter: sigma_batter becomes `relative`
// times that batter's full-immersion torque, sigma_air a quarter of that.
SurrogateParams with_relative_noise(SurrogateParams p, const BatterTruth& truth, double relative);

struct StirProtocol {
    double preliminary_duration = 90.0;  // split evenly over the four motions
    double trial_stir_duration = 40.0;   // one burst of quick stirring
    double probe_height = 0.003;         // push height for uniformity trials
    double threshold_fraction = 0.05;    // of the first trial's torque
    int max_trials = 50;
};

struct StirSession {
    std::vector<double> trial_torques;
    double threshold = 0.0;
    int stop_trial = 0;  // 1-based trial at which the batter read as uniform
    BatterTruth final_truth;
};

// Preliminary stirring followed by perceptive trials until uniform.
// Uniformity pushes within a session reuse one noise seed: repeated pushes
// at the same pose share their systematic error, so consecutive-trial
// differences see only the decay.
StirSession stir_to_uniform(const BatterTruth& truth, const SurrogateParams& p,
                            std::uint64_t seed, const StirProtocol& protocol = {});

// Brute force over the noise-free decay curve: the trial where the change
// first drops below the threshold fraction.
int ground_truth_stop_trial(const SurrogateParams& p, const StirProtocol& protocol = {});

// Speed that lays down the requested width given the batter's spread.
double analytic_speed_for_width(double width, const BatterTruth& truth, const SurrogateParams& p);

// Deposits every stroke of a trajectory; speeds come from the model when
// given, otherwise from the analytic inverse of the deposition law.
void pour_trajectory(DepositionGrid& grid, const Trajectory& traj, const BatterTruth& truth,
                     const SurrogateParams& p, const MlpModel* speed_model = nullptr);

// ---------------------------------------------------------------------------
// Synthetic training data (the collection protocols of the two pour tasks
// and the ratio model)

Dataset synth_speed_dataset(const SurrogateParams& p, std::uint64_t seed);
Dataset synth_time_dataset(const SurrogateParams& p, std::uint64_t seed);
std::vector<RatioTrainingBatch> synth_ratio_training(const SurrogateParams& p, std::uint64_t seed,
                                                     double noise_relative = 0.02);

MlpModel train_speed_model(const SurrogateParams& p, std::uint64_t seed);
MlpModel train_time_model(const SurrogateParams& p, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Experiments

// Straight 15 cm lines in four widths, five held-out ratios; "ours" uses
// the trained speed model, "simple" one calibrated speed scaled by width
// only, blind to the ratio. A non-empty snapshot_dir gets one deposit PGM
// per cell for visual inspection.
ExperimentReport run_line_experiment(const SurrogateParams& p, std::uint64_t seed,
                                     const std::string& snapshot_dir = "");

// Stationary round pours in four diameters; "ours" uses the trained
// pour-time model, "baseline" jumps to a volume-derived angle and holds,
// discharging a ratio-dependent residual it does not account for.
ExperimentReport run_round_experiment(const SurrogateParams& p, std::uint64_t seed,
                                      const std::string& snapshot_dir = "");

// Full stir -> uniformity -> level -> ratio pipeline on freshly generated
// batters; the ratio model is trained on small-bowl batches only.
ExperimentReport run_perception_experiment(int n_small, int n_large, std::uint64_t seed,
                                           const SurrogateParams& p);

}  // namespace pancake
