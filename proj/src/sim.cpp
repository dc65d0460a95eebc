#include "pancake/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "pancake/rng.hpp"

namespace pancake {

void validate(const SurrogateParams& p) {
    const double vals[] = {p.kappa, p.beta,       p.tau_u,     p.alpha,   p.thickness0,
                           p.gamma, p.flow_rate,  p.theta_max, p.c_theta};
    for (const double v : vals)
        if (!(v > 0.0)) throw std::invalid_argument("surrogate parameters must be positive");
    if (p.sigma_batter < 0.0 || p.sigma_air < 0.0)
        throw std::invalid_argument("noise levels must be non-negative");
    if (p.sigma_batter > 0.0 && !(p.sigma_air < p.sigma_batter))
        throw std::invalid_argument("sigma_air must be below sigma_batter");
}

void validate(const BatterTruth& t) {
    if (t.ratio < 0.8 || t.ratio > 2.0)
        throw std::invalid_argument("water-flour ratio outside [0.8, 2.0]");
    if (!(t.level > 0.0) || t.level > t.bowl.interior_height)
        throw std::invalid_argument("liquid level outside (0, interior_height]");
    if (t.stir_progress < 0.0) throw std::invalid_argument("stir progress must be >= 0");
    if (!(t.bowl.radius > 0.0) || !(t.bowl.interior_height > 0.0))
        throw std::invalid_argument("bowl dimensions must be positive");
}

double uniformity_factor(double stir_progress, const SurrogateParams& p) {
    return std::pow(1.0 + stir_progress / p.tau_u, -p.alpha);
}

double torque_noise_free(const BatterTruth& truth, const SurrogateParams& p, double tip_height) {
    if (tip_height < 0.0) throw std::invalid_argument("tip height must be >= 0");
    if (tip_height >= truth.level) return 0.0;
    const double immersion = truth.level - tip_height;
    return p.kappa * std::exp(-p.beta * truth.ratio) * immersion *
           uniformity_factor(truth.stir_progress, p);
}

double torque_for_push(const BatterTruth& truth, const SurrogateParams& p, double tip_height,
                       std::uint64_t rng_seed) {
    Rng rng(rng_seed);
    const double sigma = tip_height >= truth.level ? p.sigma_air : p.sigma_batter;
    return torque_noise_free(truth, p, tip_height) + gaussian(rng, 0.0, sigma);
}

TorqueCurve run_push_sequence(const BatterTruth& truth, const SurrogateParams& p,
                              const std::vector<double>& heights, std::uint64_t rng_seed) {
    if (heights.empty()) throw std::invalid_argument("push sequence needs at least one height");
    for (size_t i = 1; i < heights.size(); ++i)
        if (!(heights[i] > heights[i - 1]))
            throw std::invalid_argument("push heights must be strictly increasing");

    Rng rng(rng_seed);
    TorqueCurve curve;
    curve.samples.reserve(heights.size());
    for (const double h : heights) {
        const double sigma = h >= truth.level ? p.sigma_air : p.sigma_batter;
        curve.samples.push_back({h, torque_noise_free(truth, p, h) + gaussian(rng, 0.0, sigma)});
    }
    return curve;
}

std::vector<double> probe_heights(double start, double stop, double step) {
    if (!(step > 0.0) || stop < start) throw std::invalid_argument("bad probe height range");
    std::vector<double> out;
    for (int i = 0;; ++i) {
        const double h = start + i * step;
        if (h > stop + 1e-12) break;
        out.push_back(h);
    }
    return out;
}

StirMotion quick_stir() { return {StirKind::QuickStir, 15.7, -0.002, -0.002, false, 1.0}; }
StirMotion fine_stir() { return {StirKind::FineStir, 6.28, -0.005, 0.0, true, 0.5}; }
StirMotion edge_scrape() { return {StirKind::EdgeScrape, 3.14, -0.015, 0.002, true, 0.3}; }
StirMotion whisk_shake() { return {StirKind::WhiskShake, 8.0, -0.005, 0.0, false, 0.4}; }

BatterTruth apply_stir_motion(const BatterTruth& truth, const StirMotion& motion, double duration) {
    if (!(duration > 0.0)) throw std::invalid_argument("stir duration must be positive");
    BatterTruth out = truth;
    out.stir_progress += duration * motion.uniformity_rate;
    return out;
}

Vec2 probe_bowl_contact(const BowlSpec& bowl, Vec2 start, Vec2 direction) {
    const Vec2 m = start - bowl.center;
    const double inside = dot(m, m) - bowl.radius * bowl.radius;
    if (!(inside < 0.0)) throw std::invalid_argument("probe must start inside the bowl");
    const double dlen = norm(direction);
    if (std::abs(dlen - 1.0) > 1e-9) throw std::invalid_argument("direction must be a unit vector");
    const double b = dot(direction, m);
    const double t = -b + std::sqrt(b * b - inside);
    return start + t * direction;
}

double pour_threshold_angle(double level, const SurrogateParams& p) {
    return p.theta_max - p.c_theta * level;
}

double pour_flow(double angle, const BatterTruth& truth, const SurrogateParams& p) {
    if (angle < 0.0 || angle > 1.5707963267948966)
        throw std::invalid_argument("tilt angle outside [0, pi/2]");
    return angle >= pour_threshold_angle(truth.level, p) ? p.flow_rate : 0.0;
}

double spread_thickness(double ratio, const SurrogateParams& p) {
    return p.thickness0 * std::exp(-p.gamma * (ratio - 1.0));
}

double DepositionGrid::total_volume() const {
    double v = 0.0;
    for (const double t : cells) v += t;
    return v * resolution * resolution;
}

DepositionGrid make_grid(double resolution, Vec2 origin, double world_width, double world_height) {
    if (!(resolution > 0.0)) throw std::invalid_argument("grid resolution must be positive");
    DepositionGrid g;
    g.resolution = resolution;
    g.origin = origin;
    g.width = static_cast<int>(std::ceil(world_width / resolution));
    g.height = static_cast<int>(std::ceil(world_height / resolution));
    if (g.width <= 0 || g.height <= 0) throw std::invalid_argument("grid extent must be positive");
    g.cells.assign(static_cast<size_t>(g.width) * g.height, 0.0);
    return g;
}

double swath_width(double speed, const BatterTruth& truth, const SurrogateParams& p) {
    if (!(speed > 0.0)) throw std::invalid_argument("speed must be positive");
    return p.flow_rate / (speed * spread_thickness(truth.ratio, p));
}

namespace {

// Stamps thickness into every cell whose centre projects perpendicularly
// onto the segment within half a width. No end caps: the poured volume is
// flow_rate * traverse_time, and caps would add volume that was never poured.
void stamp_segment(DepositionGrid& grid, std::vector<std::uint8_t>& covered, Vec2 a, Vec2 b,
                   double width, double thickness) {
    const Vec2 ab = b - a;
    const double len = norm(ab);
    if (len == 0.0) return;
    const Vec2 u{ab.x / len, ab.y / len};
    const double half = width / 2.0;

    const double x_lo = std::min(a.x, b.x) - half, x_hi = std::max(a.x, b.x) + half;
    const double y_lo = std::min(a.y, b.y) - half, y_hi = std::max(a.y, b.y) + half;
    const int ix_lo = std::max(0, static_cast<int>(std::floor((x_lo - grid.origin.x) / grid.resolution)));
    const int ix_hi = std::min(grid.width - 1,
                               static_cast<int>(std::ceil((x_hi - grid.origin.x) / grid.resolution)));
    const int iy_lo = std::max(0, static_cast<int>(std::floor((y_lo - grid.origin.y) / grid.resolution)));
    const int iy_hi = std::min(grid.height - 1,
                               static_cast<int>(std::ceil((y_hi - grid.origin.y) / grid.resolution)));

    for (int iy = iy_lo; iy <= iy_hi; ++iy) {
        for (int ix = ix_lo; ix <= ix_hi; ++ix) {
            const Vec2 c{grid.origin.x + (ix + 0.5) * grid.resolution,
                         grid.origin.y + (iy + 0.5) * grid.resolution};
            const Vec2 ac = c - a;
            const double along = dot(ac, u);
            if (along < 0.0 || along > len) continue;
            const double across = std::abs(ac.x * u.y - ac.y * u.x);
            if (across > half) continue;
            const std::size_t idx = static_cast<size_t>(iy) * grid.width + ix;
            if (!covered[idx]) {
                covered[idx] = 1;
                grid.cells[idx] += thickness;
            }
        }
    }
}

}  // namespace

void deposit_polyline(DepositionGrid& grid, const std::vector<Vec2>& points, double speed,
                      const BatterTruth& truth, const SurrogateParams& p) {
    if (points.size() < 2) throw std::invalid_argument("stroke needs at least two points");
    const double width = swath_width(speed, truth, p);
    const double thickness = spread_thickness(truth.ratio, p);
    std::vector<std::uint8_t> covered(grid.cells.size(), 0);
    for (size_t i = 1; i < points.size(); ++i)
        stamp_segment(grid, covered, points[i - 1], points[i], width, thickness);
}

DepositionGrid deposit_stroke(const DepositionGrid& grid, const Segment& segment, double speed,
                              const BatterTruth& truth, const SurrogateParams& p) {
    DepositionGrid out = grid;
    deposit_polyline(out, {segment.a, segment.b}, speed, truth, p);
    return out;
}

void deposit_point(DepositionGrid& grid, Vec2 center, double volume, const BatterTruth& truth,
                   const SurrogateParams& p) {
    if (!(volume > 0.0)) throw std::invalid_argument("poured volume must be positive");
    const double thickness = spread_thickness(truth.ratio, p);
    const double radius = std::sqrt(volume / (3.141592653589793 * thickness));
    const int ix_lo = std::max(0, static_cast<int>(std::floor((center.x - radius - grid.origin.x) / grid.resolution)));
    const int ix_hi = std::min(grid.width - 1,
                               static_cast<int>(std::ceil((center.x + radius - grid.origin.x) / grid.resolution)));
    const int iy_lo = std::max(0, static_cast<int>(std::floor((center.y - radius - grid.origin.y) / grid.resolution)));
    const int iy_hi = std::min(grid.height - 1,
                               static_cast<int>(std::ceil((center.y + radius - grid.origin.y) / grid.resolution)));
    for (int iy = iy_lo; iy <= iy_hi; ++iy) {
        for (int ix = ix_lo; ix <= ix_hi; ++ix) {
            const Vec2 c{grid.origin.x + (ix + 0.5) * grid.resolution,
                         grid.origin.y + (iy + 0.5) * grid.resolution};
            if (dist(c, center) <= radius)
                grid.cells[static_cast<size_t>(iy) * grid.width + ix] += thickness;
        }
    }
}

void save_grid_pgm(const DepositionGrid& grid, const std::string& path,
                   double full_scale_thickness) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "P5\n" << grid.width << " " << grid.height << "\n255\n";
    std::vector<char> row(static_cast<size_t>(grid.width));
    for (int y = 0; y < grid.height; ++y) {
        for (int x = 0; x < grid.width; ++x) {
            const double g = 255.0 * grid.at(x, y) / full_scale_thickness;
            row[static_cast<size_t>(x)] =
                static_cast<char>(static_cast<unsigned char>(std::clamp(g, 0.0, 255.0)));
        }
        out.write(row.data(), grid.width);
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<BinaryMask> spout_mask_sequence(const std::vector<double>& angle_profile,
                                            const BatterTruth& truth, const SurrogateParams& p,
                                            std::uint64_t rng_seed,
                                            const SpoutFrameLayout& layout) {
    for (size_t i = 1; i < angle_profile.size(); ++i)
        if (angle_profile[i] < angle_profile[i - 1])
            throw std::invalid_argument("angle profile must be nondecreasing");

    Rng rng(rng_seed);
    // the seed perturbs horizontal placement only; vertical extent is the signal
    const int x0 = 8 + static_cast<int>(rng() % 8);
    const int blob_w = 10 + static_cast<int>(rng() % 6);
    const int y0 = 6;

    const double threshold = pour_threshold_angle(truth.level, p);
    std::vector<BinaryMask> frames;
    frames.reserve(angle_profile.size());
    int advance = 0;
    for (const double angle : angle_profile) {
        if (angle >= threshold && advance < layout.spout_length)
            advance = std::min(layout.spout_length, advance + layout.advance_per_frame);
        const int extent = layout.baseline_extent + advance;
        BinaryMask f = make_mask(layout.frame_width, layout.frame_height);
        for (int y = y0; y < std::min(layout.frame_height, y0 + extent); ++y)
            for (int x = x0; x < std::min(layout.frame_width, x0 + blob_w); ++x) f.set(x, y, true);
        frames.push_back(std::move(f));
    }
    return frames;
}

}  // namespace pancake
