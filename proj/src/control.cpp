#include "pancake/control.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "pancake/errors.hpp"
#include "pancake/rng.hpp"

namespace pancake {

namespace {

void warn_if_extrapolating(const MlpModel& model, const std::vector<double>& x, const char* what) {
    for (size_t j = 0; j < x.size(); ++j) {
        const double span = model.feat_hi[j] - model.feat_lo[j];
        const double slack = 0.1 * (span > 0.0 ? span : std::abs(model.feat_hi[j]));
        if (x[j] < model.feat_lo[j] - slack || x[j] > model.feat_hi[j] + slack)
            std::cerr << "warning: " << what << " input " << j
                      << " is more than 10% outside the training range\n";
    }
}

}  // namespace

double predict_speed(const MlpModel& speed_model, double ratio, double target_width) {
    if (!speed_model.trained) throw std::runtime_error("speed model is untrained");
    const std::vector<double> x{ratio, target_width};
    warn_if_extrapolating(speed_model, x, "speed model");
    const double v = mlp_forward(speed_model, x);
    return std::clamp(v, 0.001, 0.1);
}

double predict_pour_time(const MlpModel& time_model, double ratio, double target_diameter) {
    if (!time_model.trained) throw std::runtime_error("pour-time model is untrained");
    const std::vector<double> x{ratio, target_diameter};
    warn_if_extrapolating(time_model, x, "pour-time model");
    const double t = mlp_forward(time_model, x);
    return std::clamp(t, 0.5, 120.0);
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace

KmeansResult kmeans(const std::vector<std::vector<double>>& points, int k, int max_iters,
                    std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (points.size() < static_cast<size_t>(k))
        throw std::invalid_argument("need at least k points");
    const size_t dim = points.front().size();
    for (const auto& p : points)
        if (p.size() != dim) throw std::invalid_argument("inconsistent point dimensions");

    Rng rng(seed);
    KmeansResult res;

    // kmeans++ style seeding: spread the initial centroids out
    res.centroids.push_back(points[rng() % points.size()]);
    std::vector<double> d2(points.size());
    while (res.centroids.size() < static_cast<size_t>(k)) {
        double total = 0.0;
        for (size_t i = 0; i < points.size(); ++i) {
            double best = std::numeric_limits<double>::max();
            for (const auto& c : res.centroids) best = std::min(best, sq_dist(points[i], c));
            d2[i] = best;
            total += best;
        }
        size_t pick = 0;
        if (total > 0.0) {
            double r = uniform01(rng) * total;
            for (; pick + 1 < points.size(); ++pick) {
                r -= d2[pick];
                if (r <= 0.0) break;
            }
        } else {
            pick = rng() % points.size();
        }
        res.centroids.push_back(points[pick]);
    }

    res.labels.assign(points.size(), 0);
    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        double inertia = 0.0;
        for (size_t i = 0; i < points.size(); ++i) {
            int best = 0;
            double best_d = sq_dist(points[i], res.centroids[0]);
            for (int c = 1; c < k; ++c) {
                const double d = sq_dist(points[i], res.centroids[static_cast<size_t>(c)]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            inertia += best_d;
            if (res.labels[i] != best) {
                res.labels[i] = best;
                changed = true;
            }
        }
        res.inertia_history.push_back(inertia);

        std::vector<std::vector<double>> sums(static_cast<size_t>(k), std::vector<double>(dim, 0.0));
        std::vector<int> counts(static_cast<size_t>(k), 0);
        for (size_t i = 0; i < points.size(); ++i) {
            ++counts[static_cast<size_t>(res.labels[i])];
            for (size_t j = 0; j < dim; ++j) sums[static_cast<size_t>(res.labels[i])][j] += points[i][j];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] == 0) continue;  // keep the stale centroid
            for (size_t j = 0; j < dim; ++j)
                res.centroids[static_cast<size_t>(c)][j] =
                    sums[static_cast<size_t>(c)][j] / counts[static_cast<size_t>(c)];
        }
        if (!changed && iter > 0) break;
    }
    return res;
}

std::vector<int> vertical_extents(const std::vector<BinaryMask>& frames) {
    std::vector<int> extents;
    extents.reserve(frames.size());
    for (const auto& f : frames) {
        int lo = f.height, hi = -1;
        for (int y = 0; y < f.height; ++y)
            for (int x = 0; x < f.width; ++x)
                if (f.at(x, y)) {
                    lo = std::min(lo, y);
                    hi = std::max(hi, y);
                }
        extents.push_back(hi >= lo ? hi - lo : 0);
    }
    return extents;
}

DripEvents detect_drip(const std::vector<BinaryMask>& frames) {
    if (frames.size() < 3) throw std::invalid_argument("drip detection needs at least 3 frames");
    const auto extents = vertical_extents(frames);

    DripEvents ev;
    int baseline = extents[0];
    for (size_t i = 1; i < extents.size(); ++i) {
        if (extents[i] >= baseline + 2) {  // 2 px hysteresis against pixel noise
            ev.flow_start_frame = static_cast<int>(i);
            break;
        }
        baseline = std::min(baseline, extents[i]);
    }
    if (ev.flow_start_frame < 0) throw NoFlowDetected("vertical extent never grew");

    for (size_t j = static_cast<size_t>(ev.flow_start_frame); j + 2 < extents.size(); ++j) {
        if (extents[j] == extents[j + 1] && extents[j] == extents[j + 2]) {
            ev.spout_end_frame = static_cast<int>(j);
            return ev;
        }
    }
    throw NoFlowDetected("no stable plateau after flow start");
}

double initial_angle(double level, const SurrogateParams& p) {
    if (!(level > 0.0)) throw std::invalid_argument("level must be positive");
    return std::max(0.0, pour_threshold_angle(level, p) - kInitialAngleMargin);
}

PourStart start_pour(const BatterTruth& truth, const SurrogateParams& p, std::uint64_t rng_seed,
                     double frame_dt) {
    const double theta0 = initial_angle(truth.level, p);
    // tilt until well past the worst-case threshold, then a tail for the plateau
    const int n_frames =
        static_cast<int>(std::ceil((p.theta_max - theta0) / (kTiltRate * frame_dt))) + 8;
    std::vector<double> profile;
    profile.reserve(static_cast<size_t>(n_frames));
    for (int i = 0; i < n_frames; ++i) profile.push_back(theta0 + kTiltRate * frame_dt * i);

    const auto frames = spout_mask_sequence(profile, truth, p, rng_seed);
    PourStart ps;
    try {
        ps.events = detect_drip(frames);
    } catch (const NoFlowDetected&) {
        throw std::runtime_error("no drip detected before reaching the maximum tilt angle");
    }
    ps.start_angle = profile[static_cast<size_t>(ps.events.spout_end_frame)];
    ps.elapsed = ps.events.spout_end_frame * frame_dt;
    return ps;
}

PourPlan plan_execution(const Trajectory& traj, double ratio, double level,
                        const MlpModel& speed_model, const SurrogateParams& p) {
    if (traj.strokes.empty()) throw std::invalid_argument("empty trajectory");
    if (!speed_model.trained) throw std::runtime_error("speed model is untrained");

    PourPlan plan;
    plan.initial_tilt = initial_angle(level, p);
    const double v = predict_speed(speed_model, ratio, traj.stroke_width);
    for (const auto& stroke : traj.strokes) {
        plan.waypoints.push_back({stroke.points.front(), kPenUpSpeed, PenState::Up});
        for (size_t i = 1; i < stroke.points.size(); ++i)
            plan.waypoints.push_back({stroke.points[i], v, PenState::Down});
        if (stroke.closed)
            plan.waypoints.push_back({stroke.points.front(), v, PenState::Down});
    }
    return plan;
}

double plan_pen_down_duration(const PourPlan& plan) {
    double total = 0.0;
    for (size_t i = 1; i < plan.waypoints.size(); ++i) {
        const auto& w = plan.waypoints[i];
        if (w.pen == PenState::Down)
            total += dist(plan.waypoints[i - 1].position, w.position) / w.speed;
    }
    return total;
}

}  // namespace pancake
