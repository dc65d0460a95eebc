#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pancake/geom.hpp"
#include "pancake/mask.hpp"

namespace pancake {

// Mixing bowl geometry. Units are metres throughout the library.
struct BowlSpec {
    Vec2 center{0.0, 0.0};
    double radius = 0.083;           // default small bowl
    double interior_height = 0.080;
};

inline BowlSpec small_bowl() { return {{0.0, 0.0}, 0.083, 0.080}; }
inline BowlSpec large_bowl() { return {{0.0, 0.0}, 0.105, 0.100}; }

// Hidden ground-truth state of one batch of batter. Estimators never see
// this directly; they only see torque readings derived from it.
struct BatterTruth {
    double ratio = 1.25;        // water mass / flour mass
    double level = 0.030;       // batter surface height above bowl bottom (m)
    double stir_progress = 0.0; // accumulated effective stirring time (s)
    BowlSpec bowl;
};

// Constants of the surrogate batter model. All free parameters of the
// simulation live here so experiments can override them in one place.
struct SurrogateParams {
    double kappa = 1.2;           // N*m per metre of immersion at ratio 0, fresh batter
    double beta = 1.5;            // exponential decay of torque with ratio
    double tau_u = 120.0;         // stirring decay time scale (s)
    double alpha = 0.35;          // stirring decay exponent
    double sigma_batter = 4e-4;   // torque noise std for immersed pushes (N*m)
    double sigma_air = 2e-4;      // torque noise std for air pushes (N*m)
    double thickness0 = 0.003;    // pancake thickness at ratio 1 (m)
    double gamma = 0.8;           // thickness decay with ratio
    double flow_rate = 1.5e-6;    // spout discharge once flowing (m^3/s)
    double theta_max = 1.2;       // tilt angle at which an empty bowl pours (rad)
    double c_theta = 8.0;         // pour-threshold reduction per metre of level (rad/m)
};

void validate(const SurrogateParams& p);
void validate(const BatterTruth& t);

// Stirring attenuation U(u) = (1 + u/tau_u)^(-alpha). Decreasing, never 0.
double uniformity_factor(double stir_progress, const SurrogateParams& p);

// Noise-free mean torque of one horizontal push with the whisk tip at
// `tip_height` above the bowl bottom. Linear in immersion depth.
double torque_noise_free(const BatterTruth& truth, const SurrogateParams& p, double tip_height);

// One push reading: the noise-free torque plus seeded Gaussian noise
// (sigma_batter when immersed, sigma_air in air). Same seed, same reading.
double torque_for_push(const BatterTruth& truth, const SurrogateParams& p, double tip_height,
                       std::uint64_t rng_seed);

struct TorqueSample {
    double tip_height = 0.0;
    double torque = 0.0;
};

struct TorqueCurve {
    std::vector<TorqueSample> samples;  // ordered by strictly increasing tip_height
};

TorqueCurve run_push_sequence(const BatterTruth& truth, const SurrogateParams& p,
                              const std::vector<double>& heights, std::uint64_t rng_seed);

// Equally spaced probe heights [start, stop] inclusive.
std::vector<double> probe_heights(double start, double stop, double step);

enum class StirKind { QuickStir, FineStir, EdgeScrape, WhiskShake };

// One of the four stirring motions. speed is rad/s for the circular
// motions and Hz for shaking; depth_offset/radius_offset are relative to
// the liquid level h and bowl radius r.
struct StirMotion {
    StirKind kind = StirKind::QuickStir;
    double speed = 15.7;
    double depth_offset = -0.002;
    double radius_offset = -0.002;
    bool rotation = false;
    double uniformity_rate = 1.0;  // effective stirring seconds per wall second
};

StirMotion quick_stir();
StirMotion fine_stir();
StirMotion edge_scrape();
StirMotion whisk_shake();

BatterTruth apply_stir_motion(const BatterTruth& truth, const StirMotion& motion, double duration);

// Contact point where an outward horizontal probe from `start` meets the
// bowl wall (where a real force threshold would trip). `direction` must be
// a unit vector; `start` must be strictly inside the bowl circle.
Vec2 probe_bowl_contact(const BowlSpec& bowl, Vec2 start, Vec2 direction);

// Pour threshold angle for a given fill level: fuller bowls pour sooner.
double pour_threshold_angle(double level, const SurrogateParams& p);

// Quasi-static flow: zero below the threshold angle, flow_rate at or above it.
double pour_flow(double angle, const BatterTruth& truth, const SurrogateParams& p);

// Pancake thickness on the plate as a function of ratio (wetter spreads thinner).
double spread_thickness(double ratio, const SurrogateParams& p);

// Virtual griddle: accumulated batter thickness per cell.
struct DepositionGrid {
    double resolution = 0.001;   // metres per cell
    Vec2 origin{0.0, 0.0};       // world position of cell (0,0)'s corner
    int width = 0;
    int height = 0;
    std::vector<double> cells;   // thickness (m), row-major

    double at(int ix, int iy) const {
        if (ix < 0 || iy < 0 || ix >= width || iy >= height) return 0.0;
        return cells[static_cast<size_t>(iy) * width + ix];
    }
    double total_volume() const;
};

DepositionGrid make_grid(double resolution, Vec2 origin, double world_width, double world_height);

// Swath width laid down when moving at `speed` with the standard flow.
double swath_width(double speed, const BatterTruth& truth, const SurrogateParams& p);

// Deposits one stroke polyline as a rectangular swath per segment.
// Cells covered more than once by the same call are filled once
// (joints do not double-deposit); separate calls accumulate.
void deposit_polyline(DepositionGrid& grid, const std::vector<Vec2>& points, double speed,
                      const BatterTruth& truth, const SurrogateParams& p);

// Single-segment convenience with value semantics.
DepositionGrid deposit_stroke(const DepositionGrid& grid, const Segment& segment, double speed,
                              const BatterTruth& truth, const SurrogateParams& p);

// Stationary pour: a disk of the ratio's spread thickness holding `volume`.
void deposit_point(DepositionGrid& grid, Vec2 center, double volume, const BatterTruth& truth,
                   const SurrogateParams& p);

// Grey PGM snapshot of a grid; full white at `full_scale_thickness`.
void save_grid_pgm(const DepositionGrid& grid, const std::string& path,
                   double full_scale_thickness = 0.005);

// Synthetic spout-camera frames for a tilt profile. The batter segment's
// vertical pixel extent is constant before flow starts, grows while the
// batter advances down the spout, and is constant once it reaches the tip.
struct SpoutFrameLayout {
    int frame_width = 48;
    int frame_height = 64;
    int baseline_extent = 10;   // px, batter segment before any flow
    int spout_length = 24;      // px of extra extent when batter reaches the tip
    int advance_per_frame = 8;  // px of extent growth per frame while flowing
};

std::vector<BinaryMask> spout_mask_sequence(const std::vector<double>& angle_profile,
                                            const BatterTruth& truth, const SurrogateParams& p,
                                            std::uint64_t rng_seed,
                                            const SpoutFrameLayout& layout = {});

}  // namespace pancake
