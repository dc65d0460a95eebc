#include "pancake/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "pancake/errors.hpp"
#include "pancake/rng.hpp"

namespace pancake {

std::vector<MethodAggregate> recompute_aggregates(const std::vector<ReportRow>& rows) {
    std::map<std::string, std::vector<const ReportRow*>> by_method;
    for (const auto& r : rows) by_method[r.method].push_back(&r);

    std::vector<MethodAggregate> out;
    for (const auto& [method, mrows] : by_method) {
        MethodAggregate agg;
        agg.method = method;
        for (const auto* r : mrows) {
            agg.mean_abs_error += r->abs_error;
            agg.mean_pct_error += r->pct_error;
        }
        agg.mean_abs_error /= static_cast<double>(mrows.size());
        agg.mean_pct_error /= static_cast<double>(mrows.size());

        std::map<double, std::vector<double>> by_target;
        for (const auto* r : mrows) by_target[r->target].push_back(r->measured);
        int groups = 0;
        for (const auto& [target, vals] : by_target) {
            double mean = 0.0;
            for (const double v : vals) mean += v;
            mean /= static_cast<double>(vals.size());
            double var = 0.0;
            for (const double v : vals) var += (v - mean) * (v - mean);
            var /= static_cast<double>(vals.size());
            agg.mean_variance += var;
            agg.mean_pct_variance += std::sqrt(var) / target;
            ++groups;
        }
        agg.mean_variance /= groups;
        agg.mean_pct_variance /= groups;
        out.push_back(std::move(agg));
    }
    return out;
}

const MethodAggregate& aggregate_for(const ExperimentReport& report, const std::string& method) {
    for (const auto& a : report.aggregates)
        if (a.method == method) return a;
    throw std::invalid_argument("no aggregate for method " + method);
}

void save_report_csv(const ExperimentReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "method,ratio,target,measured,abs_error,pct_error\n";
    char buf[160];
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%s,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.method.c_str(),
                      r.ratio, r.target, r.measured, r.abs_error, r.pct_error);
        out << buf;
    }
}

void save_report_json(const ExperimentReport& report, const std::string& path) {
    nlohmann::json j;
    j["experiment"] = report.name;
    auto& rows = j["rows"] = nlohmann::json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"method", r.method},
                        {"ratio", r.ratio},
                        {"target", r.target},
                        {"measured", r.measured},
                        {"abs_error", r.abs_error},
                        {"pct_error", r.pct_error}});
    auto& aggs = j["aggregates"] = nlohmann::json::array();
    for (const auto& a : report.aggregates)
        aggs.push_back({{"method", a.method},
                        {"mean_abs_error", a.mean_abs_error},
                        {"mean_pct_error", a.mean_pct_error},
                        {"mean_variance", a.mean_variance},
                        {"mean_pct_variance", a.mean_pct_variance}});
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

WidthMeasurement measure_stroke_width(const DepositionGrid& grid, const std::vector<Vec2>& stroke,
                                      double nominal_width) {
    if (stroke.size() < 2) throw std::invalid_argument("stroke needs at least two points");
    const double total_len = polyline_length(stroke);
    const double skip = nominal_width / 2.0;
    if (total_len <= 2.0 * skip)
        throw std::invalid_argument("stroke too short to measure inside its end caps");

    const double grid_x_max = grid.origin.x + grid.width * grid.resolution;
    const double grid_y_max = grid.origin.y + grid.height * grid.resolution;
    for (const auto& pt : stroke)
        if (pt.x < grid.origin.x || pt.y < grid.origin.y || pt.x > grid_x_max || pt.y > grid_y_max)
            throw std::invalid_argument("stroke lies outside the deposit grid");

    auto thickness_at = [&](Vec2 p) {
        const int ix = static_cast<int>(std::floor((p.x - grid.origin.x) / grid.resolution));
        const int iy = static_cast<int>(std::floor((p.y - grid.origin.y) / grid.resolution));
        return grid.at(ix, iy);
    };

    const double step = grid.resolution / 4.0;
    const double max_march = 10.0 * nominal_width + 5.0 * grid.resolution;
    std::vector<double> widths;

    double walked = 0.0;
    double next_sample = skip;
    for (size_t i = 1; i < stroke.size(); ++i) {
        const Vec2 a = stroke[i - 1], b = stroke[i];
        const double seg_len = dist(a, b);
        if (seg_len == 0.0) continue;
        const Vec2 u{(b.x - a.x) / seg_len, (b.y - a.y) / seg_len};
        const Vec2 n{-u.y, u.x};
        while (next_sample <= walked + seg_len && next_sample <= total_len - skip) {
            const Vec2 s = a + (next_sample - walked) * u;
            double reach[2] = {0.0, 0.0};
            for (int side = 0; side < 2; ++side) {
                const double sign = side == 0 ? 1.0 : -1.0;
                double t = 0.0;
                while (t < max_march && thickness_at(s + (sign * (t + step)) * n) > kDepositThreshold)
                    t += step;
                reach[side] = t;
            }
            if (thickness_at(s) > kDepositThreshold)
                widths.push_back(reach[0] + reach[1] + step);  // cell straddling both edges
            else
                widths.push_back(0.0);
            next_sample += 0.002;  // cross-section every 2 mm
        }
        walked += seg_len;
    }
    if (widths.empty()) throw std::invalid_argument("no cross-sections inside the stroke");

    WidthMeasurement wm;
    for (const double w : widths) wm.mean += w;
    wm.mean /= static_cast<double>(widths.size());
    if (wm.mean <= 0.0) throw std::runtime_error("no deposit found under the stroke");
    for (const double w : widths) wm.variance += (w - wm.mean) * (w - wm.mean);
    wm.variance /= static_cast<double>(widths.size());
    return wm;
}

DiskMeasurement measure_disk(const DepositionGrid& grid) {
    std::size_t covered = 0;
    for (const double t : grid.cells) covered += t > kDepositThreshold;
    if (covered == 0) throw std::runtime_error("empty deposit");
    DiskMeasurement m;
    m.area = static_cast<double>(covered) * grid.resolution * grid.resolution;
    m.diameter = 2.0 * std::sqrt(m.area / 3.141592653589793);
    return m;
}

double deposit_iou(const BinaryMask& target, const DepositionGrid& grid) {
    std::size_t inter = 0, uni = 0;
    const int w = std::max(target.width, grid.width);
    const int h = std::max(target.height, grid.height);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const bool a = target.at(x, y);
            const bool b = grid.at(x, y) > kDepositThreshold;
            inter += a && b;
            uni += a || b;
        }
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// ---------------------------------------------------------------------------

SurrogateParams with_relative_noise(SurrogateParams p, const BatterTruth& truth, double relative) {
    const double t_max = p.kappa * std::exp(-p.beta * truth.ratio) * truth.level *
                         uniformity_factor(truth.stir_progress, p);
    p.sigma_batter = relative * t_max;
    p.sigma_air = p.sigma_batter / 4.0;
    return p;
}

StirSession stir_to_uniform(const BatterTruth& truth, const SurrogateParams& p,
                            std::uint64_t seed, const StirProtocol& protocol) {
    StirSession session;
    BatterTruth state = truth;

    const double quarter = protocol.preliminary_duration / 4.0;
    state = apply_stir_motion(state, quick_stir(), quarter);
    state = apply_stir_motion(state, edge_scrape(), quarter);
    state = apply_stir_motion(state, fine_stir(), quarter);
    state = apply_stir_motion(state, whisk_shake(), quarter);

    const std::uint64_t probe_seed = derive_seed(seed, "uniformity-probe");
    UniformityMonitor monitor;
    for (int trial = 1; trial <= protocol.max_trials; ++trial) {
        state = apply_stir_motion(state, quick_stir(), protocol.trial_stir_duration);
        const double reading = torque_for_push(state, p, protocol.probe_height, probe_seed);
        monitor.trial_torques.push_back(reading);
        session.trial_torques.push_back(reading);
        if (trial == 1) {
            monitor.threshold = protocol.threshold_fraction * reading;
            session.threshold = monitor.threshold;
            continue;
        }
        if (is_uniform(monitor)) {
            session.stop_trial = trial;
            session.final_truth = state;
            return session;
        }
    }
    throw std::runtime_error("stirring never reached uniformity within the trial budget");
}

int ground_truth_stop_trial(const SurrogateParams& p, const StirProtocol& protocol) {
    // torque scale cancels out of the relative threshold rule
    const double rates[] = {quick_stir().uniformity_rate, edge_scrape().uniformity_rate,
                            fine_stir().uniformity_rate, whisk_shake().uniformity_rate};
    double u = 0.0;
    for (const double r : rates) u += r * protocol.preliminary_duration / 4.0;

    double prev = 0.0, first = 0.0;
    for (int trial = 1; trial <= protocol.max_trials; ++trial) {
        u += quick_stir().uniformity_rate * protocol.trial_stir_duration;
        const double torque = uniformity_factor(u, p);
        if (trial == 1) {
            first = torque;
        } else if (std::abs(torque - prev) < protocol.threshold_fraction * first) {
            return trial;
        }
        prev = torque;
    }
    throw std::runtime_error("decay never crossed the uniformity threshold");
}

double analytic_speed_for_width(double width, const BatterTruth& truth, const SurrogateParams& p) {
    if (!(width > 0.0)) throw std::invalid_argument("width must be positive");
    return p.flow_rate / (width * spread_thickness(truth.ratio, p));
}

void pour_trajectory(DepositionGrid& grid, const Trajectory& traj, const BatterTruth& truth,
                     const SurrogateParams& p, const MlpModel* speed_model) {
    if (traj.strokes.empty()) throw std::invalid_argument("empty trajectory");
    const double speed = speed_model != nullptr
                             ? predict_speed(*speed_model, truth.ratio, traj.stroke_width)
                             : analytic_speed_for_width(traj.stroke_width, truth, p);
    const double w = traj.stroke_width;
    for (const auto& stroke : traj.strokes) {
        std::vector<Vec2> pts = stroke.points;
        if (stroke.closed) pts.push_back(stroke.points.front());
        if (polyline_length(pts) < 0.5 * w) {
            // a dot in the artwork: the arm dwells, leaving a stroke-wide dab
            Vec2 c{0, 0};
            for (const auto& pt : pts) c = c + pt;
            c = (1.0 / pts.size()) * c;
            deposit_point(grid, c, 3.141592653589793 * (w / 2) * (w / 2) *
                                       spread_thickness(truth.ratio, p),
                          truth, p);
        } else {
            deposit_polyline(grid, pts, speed, truth, p);
        }
    }
}

// ---------------------------------------------------------------------------

namespace {

const std::vector<double> kTrainRatios{1.25, 1.30, 1.35, 1.40, 1.45};
const std::vector<double> kTestRatios{1.27, 1.32, 1.37, 1.42, 1.44};
constexpr double kMidRatio = 1.35;

}  // namespace

Dataset synth_speed_dataset(const SurrogateParams& p, std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds;
    BatterTruth truth;
    for (const double r : kTrainRatios) {
        truth.ratio = r;
        // command speeds that span widths from 8 mm to 59 mm
        const double v_lo = analytic_speed_for_width(0.059, truth, p);
        const double v_hi = analytic_speed_for_width(0.008, truth, p);
        const int steps = 12;
        for (int i = 0; i < steps; ++i) {
            const double v = v_lo * std::pow(v_hi / v_lo, i / static_cast<double>(steps - 1));
            const double width = (p.flow_rate / (v * spread_thickness(r, p))) *
                                 (1.0 + gaussian(rng, 0.0, 0.02));  // camera measurement scatter
            ds.features.push_back({r, width});
            ds.targets.push_back(v);
        }
    }
    return ds;
}

Dataset synth_time_dataset(const SurrogateParams& p, std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds;
    for (const double r : kTrainRatios) {
        const double tau = spread_thickness(r, p);
        // pour times that span diameters from 2 cm to 22.5 cm
        const double t_lo = 3.141592653589793 * 0.01 * 0.01 * tau / p.flow_rate;
        const double t_hi = 3.141592653589793 * 0.1125 * 0.1125 * tau / p.flow_rate;
        const int steps = 12;
        for (int i = 0; i < steps; ++i) {
            const double t = t_lo * std::pow(t_hi / t_lo, i / static_cast<double>(steps - 1));
            const double d = 2.0 * std::sqrt(p.flow_rate * t / (3.141592653589793 * tau)) *
                             (1.0 + gaussian(rng, 0.0, 0.02));
            ds.features.push_back({r, d});
            ds.targets.push_back(t);
        }
    }
    return ds;
}

std::vector<RatioTrainingBatch> synth_ratio_training(const SurrogateParams& p, std::uint64_t seed,
                                                     double noise_relative) {
    std::vector<RatioTrainingBatch> batches;
    const auto heights = probe_heights(0.003, 0.063, 0.003);
    for (int i = 0; i <= 10; ++i) {
        const double ratio = 1.0 + 0.05 * i;
        const std::uint64_t s = derive_seed(seed, "ratio-batch", static_cast<std::uint64_t>(i));
        Rng rng(s);
        BatterTruth truth;
        truth.bowl = small_bowl();
        truth.ratio = ratio;
        truth.level = uniform_range(rng, 0.025, 0.045);
        const SurrogateParams noisy = with_relative_noise(p, truth, noise_relative);
        const StirSession session = stir_to_uniform(truth, noisy, s);
        const TorqueCurve curve =
            run_push_sequence(session.final_truth, noisy, heights, derive_seed(s, "batch-curve"));
        batches.push_back({ratio, curve, truth.level});
    }
    return batches;
}

MlpModel train_speed_model(const SurrogateParams& p, std::uint64_t seed) {
    MlpModel model = make_mlp({2, 32, 64, 1}, derive_seed(seed, "speed-init"));
    TrainConfig cfg;
    cfg.seed = seed;
    train(model, synth_speed_dataset(p, derive_seed(seed, "speed-data")), cfg);
    return model;
}

MlpModel train_time_model(const SurrogateParams& p, std::uint64_t seed) {
    MlpModel model = make_mlp({2, 32, 64, 1}, derive_seed(seed, "time-init"));
    TrainConfig cfg;
    cfg.seed = seed;
    train(model, synth_time_dataset(p, derive_seed(seed, "time-data")), cfg);
    return model;
}

ExperimentReport run_line_experiment(const SurrogateParams& p, std::uint64_t seed,
                                     const std::string& snapshot_dir) {
    const MlpModel speed_model = train_speed_model(p, derive_seed(seed, "line-model"));

    ExperimentReport report;
    report.name = "line_strokes";
    const std::vector<double> widths{0.01, 0.02, 0.03, 0.04};
    BatterTruth mid;
    mid.ratio = kMidRatio;
    const double simple_v1 = analytic_speed_for_width(0.01, mid, p);

    for (const std::string method : {"ours", "simple"}) {
        for (const double ratio : kTestRatios) {
            BatterTruth truth;
            truth.ratio = ratio;
            truth.level = 0.035;
            for (const double width : widths) {
                const double v = method == "ours"
                                     ? predict_speed(speed_model, ratio, width)
                                     : simple_v1 * (0.01 / width);  // scaled from the 1 cm speed
                DepositionGrid grid = make_grid(0.0005, {0.0, 0.0}, 0.20, 0.08);
                const std::vector<Vec2> line{{0.025, 0.04}, {0.175, 0.04}};
                deposit_polyline(grid, line, v, truth, p);
                const auto wm = measure_stroke_width(grid, line, width);
                if (!snapshot_dir.empty()) {
                    char name[96];
                    std::snprintf(name, sizeof name, "/line_%s_r%.2f_w%.0fmm.pgm", method.c_str(),
                                  ratio, width * 1000);
                    save_grid_pgm(grid, snapshot_dir + name);
                }
                ReportRow row;
                row.method = method;
                row.ratio = ratio;
                row.target = width;
                row.measured = wm.mean;
                row.abs_error = std::abs(wm.mean - width);
                row.pct_error = row.abs_error / width;
                report.rows.push_back(row);
            }
        }
    }
    report.aggregates = recompute_aggregates(report.rows);
    return report;
}

ExperimentReport run_round_experiment(const SurrogateParams& p, std::uint64_t seed,
                                      const std::string& snapshot_dir) {
    const MlpModel time_model = train_time_model(p, derive_seed(seed, "round-model"));

    ExperimentReport report;
    report.name = "round_shapes";
    const std::vector<double> diameters{0.05, 0.10, 0.15, 0.20};
    const double pi = 3.141592653589793;
    const double bowl_area = pi * small_bowl().radius * small_bowl().radius;

    // Residual discharge when holding at a fixed angle: wetter batter keeps
    // creeping past the lip after the geometric volume is out.
    const double residual_depth0 = 1.5e-4;
    const double residual_gamma = 1.0;

    Rng rng(derive_seed(seed, "round-levels"));
    for (const std::string method : {"ours", "baseline"}) {
        for (const double ratio : kTestRatios) {
            for (const double d : diameters) {
                BatterTruth truth;
                truth.ratio = ratio;
                truth.level = uniform_range(rng, 0.030, 0.045);
                const double target_area = pi * (d / 2.0) * (d / 2.0);

                double poured = 0.0;
                if (method == "ours") {
                    const double t = predict_pour_time(time_model, ratio, d);
                    poured = p.flow_rate * t;
                } else {
                    // volume from the desired size at a nominal spread,
                    // blind to this batter's ratio
                    const double v_nominal = target_area * spread_thickness(kMidRatio, p);
                    poured = v_nominal +
                             bowl_area * residual_depth0 * std::exp(residual_gamma * (ratio - 1.0));
                }

                DepositionGrid grid = make_grid(0.001, {0.0, 0.0}, 0.30, 0.30);
                deposit_point(grid, {0.15, 0.15}, poured, truth, p);
                const auto dm = measure_disk(grid);
                if (!snapshot_dir.empty()) {
                    char name[96];
                    std::snprintf(name, sizeof name, "/round_%s_r%.2f_d%.0fcm.pgm", method.c_str(),
                                  ratio, d * 100);
                    save_grid_pgm(grid, snapshot_dir + name);
                }

                ReportRow row;
                row.method = method;
                row.ratio = ratio;
                row.target = target_area;
                row.measured = dm.area;
                row.abs_error = std::abs(dm.area - target_area);
                row.pct_error = row.abs_error / target_area;
                report.rows.push_back(row);
            }
        }
    }
    report.aggregates = recompute_aggregates(report.rows);
    return report;
}

ExperimentReport run_perception_experiment(int n_small, int n_large, std::uint64_t seed,
                                           const SurrogateParams& p) {
    if (n_small < 0 || n_large < 0) throw std::invalid_argument("negative trial counts");

    // Ratio model training: eleven labelled small-bowl batches, stirred to
    // uniformity first so training and test slopes share the stirring state.
    std::vector<RatioTrainingBatch> training;
    const auto heights = probe_heights(0.003, 0.063, 0.003);
    for (int i = 0; i <= 10; ++i) {
        const double ratio = 1.0 + 0.05 * i;
        const std::uint64_t s = derive_seed(seed, "ratio-train", static_cast<std::uint64_t>(i));
        Rng rng(s);
        BatterTruth truth;
        truth.bowl = small_bowl();
        truth.ratio = ratio;
        truth.level = uniform_range(rng, 0.025, 0.045);
        const SurrogateParams noisy = with_relative_noise(p, truth, 0.02);
        const StirSession session = stir_to_uniform(truth, noisy, s);
        const TorqueCurve curve =
            run_push_sequence(session.final_truth, noisy, heights, derive_seed(s, "train-curve"));
        const auto est = estimate_level(curve, 6.0 * noisy.sigma_air);
        training.push_back({ratio, curve, est.level});
    }
    RatioModel model = fit_ratio_model(training);

    ExperimentReport report;
    report.name = "perception";
    const int gt_trial = ground_truth_stop_trial(p);

    const int total = n_small + n_large;
    for (int i = 0; i < total; ++i) {
        const bool small = i < n_small;
        const std::uint64_t s = derive_seed(seed, "perception-test", static_cast<std::uint64_t>(i));
        Rng rng(s);
        BatterTruth truth;
        truth.bowl = small ? small_bowl() : large_bowl();
        truth.ratio = uniform_range(rng, 1.0, 1.5);
        truth.level = uniform_range(rng, 0.020, 0.050);
        const SurrogateParams noisy = with_relative_noise(p, truth, 0.02);

        const StirSession session = stir_to_uniform(truth, noisy, s);
        const TorqueCurve curve =
            run_push_sequence(session.final_truth, noisy, heights, derive_seed(s, "test-curve"));
        const auto level_est = estimate_level(curve, 6.0 * noisy.sigma_air);
        const double ratio_est = estimate_ratio(curve, level_est.level, model);

        const char* suffix = small ? "_small" : "_large";
        ReportRow level_row;
        level_row.method = std::string("level") + suffix;
        level_row.ratio = truth.ratio;
        level_row.target = truth.level;
        level_row.measured = level_est.level;
        level_row.abs_error = std::abs(level_est.level - truth.level);
        level_row.pct_error = level_row.abs_error / truth.level;
        report.rows.push_back(level_row);

        ReportRow ratio_row;
        ratio_row.method = std::string("ratio") + suffix;
        ratio_row.ratio = truth.ratio;
        ratio_row.target = truth.ratio;
        ratio_row.measured = ratio_est;
        ratio_row.abs_error = std::abs(ratio_est - truth.ratio);
        ratio_row.pct_error = ratio_row.abs_error / truth.ratio;
        report.rows.push_back(ratio_row);

        ReportRow stop_row;
        stop_row.method = "uniformity_stop";
        stop_row.ratio = truth.ratio;
        stop_row.target = gt_trial;
        stop_row.measured = session.stop_trial;
        stop_row.abs_error = std::abs(stop_row.measured - stop_row.target);
        stop_row.pct_error = stop_row.abs_error / stop_row.target;
        report.rows.push_back(stop_row);
    }
    report.aggregates = recompute_aggregates(report.rows);
    return report;
}

}  // namespace pancake
