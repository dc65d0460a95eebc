// Acceptance suite: runs every exit criterion at its stated tolerance and
// prints one pass/fail line each. Exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pancake/config.hpp"
#include "pancake/control.hpp"
#include "pancake/errors.hpp"
#include "pancake/eval.hpp"
#include "pancake/mask.hpp"
#include "pancake/mlp.hpp"
#include "pancake/perception.hpp"
#include "pancake/planner.hpp"
#include "pancake/rng.hpp"
#include "pancake/sim.hpp"

namespace fs = std::filesystem;
using namespace pancake;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// fixtures

BinaryMask disk_fixture(int size = 100, double radius = 40.0) {
    BinaryMask m = make_mask(size, size);
    const double c = size / 2.0;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            if (std::hypot(x - c, y - c) <= radius) m.set(x, y, true);
    return m;
}

BinaryMask annulus_fixture() {
    BinaryMask m = make_mask(120, 120);
    for (int y = 0; y < 120; ++y)
        for (int x = 0; x < 120; ++x) {
            const double d = std::hypot(x - 60, y - 60);
            if (d <= 45.0 && d >= 22.0) m.set(x, y, true);
        }
    return m;
}

BinaryMask star_fixture() {
    // five-pointed star, filled by even-odd test against the outline polygon
    std::vector<Vec2> poly;
    const double cx = 70, cy = 70;
    for (int k = 0; k < 10; ++k) {
        const double r = (k % 2 == 0) ? 55.0 : 30.0;
        const double a = -1.5707963 + k * 0.62831853;
        poly.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
    }
    BinaryMask m = make_mask(140, 140);
    for (int y = 0; y < 140; ++y) {
        for (int x = 0; x < 140; ++x) {
            bool in = false;
            for (size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
                if ((poly[i].y > y) != (poly[j].y > y) &&
                    x < (poly[j].x - poly[i].x) * (y - poly[i].y) / (poly[j].y - poly[i].y) +
                            poly[i].x)
                    in = !in;
            }
            if (in) m.set(x, y, true);
        }
    }
    return m;
}

BinaryMask letter_fixture() {
    // block capital E, strokes 22 px thick
    BinaryMask m = make_mask(120, 140);
    auto rect = [&](int x0, int y0, int x1, int y1) {
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x) m.set(x, y, true);
    };
    rect(20, 10, 42, 130);    // spine
    rect(20, 10, 105, 32);    // top arm
    rect(20, 59, 90, 81);     // middle arm
    rect(20, 108, 105, 130);  // bottom arm
    return m;
}

BinaryMask smiley_fixture() {
    // stroke-width line art: outline circle, two eye dots, mouth arc
    BinaryMask m = make_mask(140, 140);
    const double cx = 70, cy = 70;
    for (int y = 0; y < 140; ++y) {
        for (int x = 0; x < 140; ++x) {
            const double d = std::hypot(x - cx, y - cy);
            if (std::abs(d - 60.0) <= 4.5) m.set(x, y, true);  // outline ring
            if (std::hypot(x - 48, y - 52) <= 4.5) m.set(x, y, true);
            if (std::hypot(x - 92, y - 52) <= 4.5) m.set(x, y, true);
            const double angle = std::atan2(y - cy, x - cx);
            if (std::abs(d - 40.0) <= 4.5 && angle > 0.5 && angle < 2.64) m.set(x, y, true);
        }
    }
    return m;
}

// ---------------------------------------------------------------------------

void criterion_level(Check& c) {
    const auto heights = probe_heights(0.001, 0.063, 0.001);

    // exactness on noise-free curves
    SurrogateParams quiet;
    quiet.sigma_batter = 0.0;
    quiet.sigma_air = 0.0;
    double worst_exact = 0.0;
    for (int i = 0; i < 20; ++i) {
        BatterTruth t;
        t.ratio = 1.0 + 0.025 * i;
        t.level = 0.005 + i * (0.050 / 19.0);
        t.stir_progress = 170.0;
        const TorqueCurve curve = run_push_sequence(t, quiet, heights, 0);
        const LevelEstimate est = estimate_level(curve, 0.0);
        worst_exact = std::max(worst_exact, std::abs(est.level - t.level));
    }
    c.require(worst_exact <= 1e-9, "noise-free worst error " + fmt(worst_exact) + " m > 1e-9");

    // 2% torque noise, 20 seeded batters
    double rel = 0.0;
    for (int i = 0; i < 20; ++i) {
        Rng rng(derive_seed(2024, "level", static_cast<std::uint64_t>(i)));
        BatterTruth t;
        t.ratio = uniform_range(rng, 1.0, 1.5);
        t.level = uniform_range(rng, 0.005, 0.055);
        t.stir_progress = 170.0;
        SurrogateParams p;
        const SurrogateParams noisy = with_relative_noise(p, t, 0.02);
        const TorqueCurve curve = run_push_sequence(t, noisy, heights, rng());
        const LevelEstimate est = estimate_level(curve, 6.0 * noisy.sigma_air);
        rel += std::abs(est.level - t.level) / t.level;
    }
    rel /= 20.0;
    c.require(rel <= 0.05, "mean relative error " + fmt(rel) + " > 5%");
    c.detail = c.detail.empty()
                   ? "exact<=" + fmt(worst_exact) + " m, noisy mean rel err " + fmt(100 * rel) + "%"
                   : c.detail;
}

void criterion_ratio(Check& c) {
    SurrogateParams p;
    const auto heights = probe_heights(0.003, 0.063, 0.003);

    // zero-noise training curves: the estimator must return exact labels
    SurrogateParams quiet = p;
    quiet.sigma_batter = 0.0;
    quiet.sigma_air = 0.0;
    std::vector<RatioTrainingBatch> clean;
    for (int i = 0; i <= 10; ++i) {
        const double r = 1.0 + 0.05 * i;
        BatterTruth t;
        t.ratio = r;
        t.level = 0.035;
        t.stir_progress = 170.0;
        clean.push_back({r, run_push_sequence(t, quiet, heights, 0), 0.035});
    }
    const RatioModel clean_model = fit_ratio_model(clean);
    for (const auto& batch : clean) {
        const double est = estimate_ratio(batch.curve, batch.level, clean_model);
        c.require(est == batch.ratio_label,
                  "training-curve query returned " + fmt(est) + " for " + fmt(batch.ratio_label));
    }

    // noisy held-out batters against a noisily trained small-bowl model
    const ExperimentReport report = run_perception_experiment(10, 5, 2024, p);
    double mae = 0.0;
    int n = 0;
    for (const auto& row : report.rows)
        if (row.method.rfind("ratio", 0) == 0) {
            mae += row.abs_error;
            ++n;
        }
    mae /= n;
    c.require(n == 15, "expected 15 ratio rows");
    c.require(mae <= 0.05, "mean absolute ratio error " + fmt(mae) + " > 0.05");
    if (c.ok) c.detail = "exact labels on clean queries, noisy MAE " + fmt(mae);
}

void criterion_uniformity(Check& c) {
    SurrogateParams p;
    const int gt = ground_truth_stop_trial(p);

    // noise-free per-trial torque strictly decreases
    BatterTruth t0;
    t0.ratio = 1.2;
    t0.level = 0.03;
    double prev = 1e18;
    BatterTruth t = t0;
    for (int k = 0; k < 20; ++k) {
        t = apply_stir_motion(t, quick_stir(), 40.0);
        const double torque = torque_noise_free(t, p, 0.003);
        c.require(torque < prev, "per-trial torque not strictly decreasing");
        prev = torque;
    }

    int worst = 0;
    for (int i = 0; i < 15; ++i) {
        Rng rng(derive_seed(2024, "stir", static_cast<std::uint64_t>(i)));
        BatterTruth truth;
        truth.ratio = uniform_range(rng, 1.0, 1.5);
        truth.level = uniform_range(rng, 0.020, 0.050);
        const SurrogateParams noisy = with_relative_noise(p, truth, 0.02);
        const StirSession session = stir_to_uniform(truth, noisy, rng());
        worst = std::max(worst, std::abs(session.stop_trial - gt));
    }
    c.require(worst <= 1, "stop trial off by " + std::to_string(worst));
    if (c.ok)
        c.detail = "reference trial " + std::to_string(gt) + ", worst deviation " +
                   std::to_string(worst);
}

void criterion_mlp(Check& c) {
    // gradient check
    MlpModel m = make_mlp({2, 32, 64, 1}, 321);
    Rng rng(2024);
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int i = 0; i < 12; ++i) {
        x.push_back({uniform_range(rng, -1, 1), uniform_range(rng, -1, 1)});
        y.push_back(uniform_range(rng, -1, 1));
    }
    const MlpGradients grads = mlp_gradients(m, x, y);
    double worst_rel = 0.0;
    const double h = 1e-5;
    for (int probe = 0; probe < 120; ++probe) {
        const size_t layer = rng() % m.weights.size();
        const bool bias = (rng() % 4) == 0;
        auto& params = bias ? m.biases[layer] : m.weights[layer];
        const auto& g = bias ? grads.biases[layer] : grads.weights[layer];
        const size_t idx = rng() % params.size();
        const double keep = params[idx];
        params[idx] = keep + h;
        const double up = mlp_loss(m, x, y);
        params[idx] = keep - h;
        const double down = mlp_loss(m, x, y);
        params[idx] = keep;
        const double fd = (up - down) / (2 * h);
        worst_rel = std::max(worst_rel,
                             std::abs(fd - g[idx]) / std::max({std::abs(fd), std::abs(g[idx]), 1e-8}));
    }
    c.require(worst_rel <= 1e-4, "gradient check relative error " + fmt(worst_rel));

    // stated config on both pour datasets
    SurrogateParams p;
    for (const char* task : {"speed", "time"}) {
        Dataset ds = std::string(task) == "speed" ? synth_speed_dataset(p, 1)
                                                  : synth_time_dataset(p, 1);
        MlpModel model = make_mlp({2, 32, 64, 1}, 7);
        const auto history = train(model, ds, TrainConfig{});  // 1000 epochs, lr 0.06, Adam, MSE
        c.require(history.size() == 1000, "loss history length");
        c.require(history.back() <= 0.1 * history.front(),
                  std::string(task) + " final MSE " + fmt(history.back()) + " > 10% of initial " +
                      fmt(history.front()));
    }
    if (c.ok) c.detail = "worst gradient rel err " + fmt(worst_rel) + ", both datasets converged";
}

void criterion_lines(Check& c) {
    SurrogateParams p;
    const ExperimentReport report = run_line_experiment(p, 2024);
    const auto& ours = aggregate_for(report, "ours");
    const auto& simple = aggregate_for(report, "simple");
    c.require(ours.mean_pct_error <= 0.10,
              "ours pct error " + fmt(100 * ours.mean_pct_error) + "% > 10%");
    c.require(ours.mean_pct_variance <= 0.12,
              "ours pct variance " + fmt(100 * ours.mean_pct_variance) + "% > 12%");
    c.require(simple.mean_pct_error > ours.mean_pct_error, "baseline did not lose");
    if (c.ok)
        c.detail = "ours " + fmt(100 * ours.mean_pct_error) + "% vs simple " +
                   fmt(100 * simple.mean_pct_error) + "%";
}

void criterion_round(Check& c) {
    SurrogateParams p;
    const ExperimentReport report = run_round_experiment(p, 2024);
    const auto& ours = aggregate_for(report, "ours");
    const auto& baseline = aggregate_for(report, "baseline");
    c.require(ours.mean_pct_error <= 0.05,
              "ours area pct error " + fmt(100 * ours.mean_pct_error) + "% > 5%");
    c.require(baseline.mean_pct_error > 3.0 * ours.mean_pct_error,
              "baseline " + fmt(100 * baseline.mean_pct_error) + "% not 3x ours");
    if (c.ok)
        c.detail = "ours " + fmt(100 * ours.mean_pct_error) + "% vs baseline " +
                   fmt(100 * baseline.mean_pct_error) + "%";
}

void criterion_planner(Check& c) {
    // disk loops within a pixel of the analytic radii
    const BinaryMask disk = disk_fixture();
    const auto loops = concentric_loops(disk, 10);
    c.require(loops.size() == 4, "expected 4 loops, got " + std::to_string(loops.size()));
    const double expected[] = {35.0, 25.0, 15.0, 5.0};
    for (size_t k = 0; k < loops.size() && k < 4; ++k) {
        double mean_r = 0.0;
        for (const auto& px : loops[k]) mean_r += std::hypot(px.x - 50.0, px.y - 50.0);
        mean_r /= loops[k].size();
        c.require(std::abs(mean_r - expected[k]) <= 1.0,
                  "loop " + std::to_string(k) + " radius " + fmt(mean_r));
    }

    // skeleton idempotence and spanning-forest shape on every fixture
    const std::vector<std::pair<std::string, BinaryMask>> fixtures{
        {"disk", disk},
        {"annulus", annulus_fixture()},
        {"star", star_fixture()},
        {"letter", letter_fixture()},
        {"smiley", smiley_fixture()}};

    for (const auto& [name, mask] : fixtures) {
        const BinaryMask skel = skeletonize(mask);
        const BinaryMask twice = skeletonize(skel);
        c.require(skel.pixels == twice.pixels, name + ": thinning not idempotent");

        const SkeletonGraph tree = mst_refine(build_graph(skel));
        std::map<int, std::pair<int, int>> comp;  // root -> (nodes, edges)
        std::vector<int> parent(tree.nodes.size());
        for (size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
        std::function<int(int)> find = [&](int v) {
            while (parent[v] != v) v = parent[v] = parent[parent[v]];
            return v;
        };
        bool acyclic = true;
        for (const auto& e : tree.edges) {
            const int ra = find(e.a), rb = find(e.b);
            if (ra == rb) acyclic = false;
            else parent[rb] = ra;
        }
        c.require(acyclic, name + ": spanning forest has a cycle");
        for (size_t i = 0; i < tree.nodes.size(); ++i) ++comp[find(static_cast<int>(i))].first;
        for (const auto& e : tree.edges) ++comp[find(e.a)].second;
        for (const auto& [root, counts] : comp)
            c.require(counts.second == counts.first - 1,
                      name + ": component with " + std::to_string(counts.first) + " nodes has " +
                          std::to_string(counts.second) + " edges");
    }

    // end-to-end pour IoU on the fixture corpus
    SurrogateParams p;
    BatterTruth t;
    t.ratio = 1.3;
    t.level = 0.03;
    std::string ious;
    for (const auto& [name, mask] : fixtures) {
        const int stroke_px = name == "star" ? 8 : 10;
        const Trajectory traj = plan_trajectory(mask, stroke_px);
        DepositionGrid grid = make_grid(mask.scale, {0, 0}, mask.width * mask.scale,
                                        mask.height * mask.scale);
        pour_trajectory(grid, traj, t, p);
        const double iou = deposit_iou(mask, grid);
        c.require(iou >= 0.80, name + " IoU " + fmt(iou) + " < 0.80");
        ious += (ious.empty() ? "" : " ") + name + "=" + fmt(iou);
    }
    if (c.ok) c.detail = "IoU " + ious;
}

void criterion_circle(Check& c) {
    BowlSpec bowl;
    bowl.center = {0.012, -0.004};
    bowl.radius = 0.083;

    double worst_exact = 0.0;
    for (int k = 0; k < 20; ++k) {
        std::vector<Vec2> pts;
        for (int j = 0; j < 4; ++j) {
            const double a = 0.3 + k * 0.1 + j * 1.57;
            pts.push_back(probe_bowl_contact(bowl, bowl.center, {std::cos(a), std::sin(a)}));
        }
        const CircleFit fit = fit_circle(pts);
        worst_exact = std::max({worst_exact, std::abs(fit.radius - bowl.radius),
                                norm(fit.center - bowl.center)});
    }
    c.require(worst_exact <= 1e-9, "exact-contact recovery error " + fmt(worst_exact));

    double worst_noise = 0.0;
    for (int seed = 0; seed < 100; ++seed) {
        Rng rng(derive_seed(2024, "circle", static_cast<std::uint64_t>(seed)));
        std::vector<Vec2> pts;
        const double phase = uniform_range(rng, 0.0, 6.283185307);
        for (int j = 0; j < 8; ++j) {  // probes spaced around the bowl
            const double a = phase + j * 0.785398163;
            Vec2 pt = probe_bowl_contact(bowl, bowl.center, {std::cos(a), std::sin(a)});
            pt.x += gaussian(rng, 0.0, 0.0005);
            pt.y += gaussian(rng, 0.0, 0.0005);
            pts.push_back(pt);
        }
        worst_noise = std::max(worst_noise, std::abs(fit_circle(pts).radius - bowl.radius));
    }
    c.require(worst_noise <= 0.001, "radius error under jitter " + fmt(worst_noise) + " m");
    if (c.ok)
        c.detail = "exact " + fmt(worst_exact) + " m, worst jittered radius error " +
                   fmt(worst_noise) + " m";
}

void criterion_cli_determinism(Check& c) {
    const char* bin = std::getenv("PANCAKE_BIN");
    if (bin == nullptr) {
        c.require(false, "PANCAKE_BIN not set");
        return;
    }
    const fs::path root = fs::temp_directory_path() / "pancake_acceptance_cli";
    fs::remove_all(root);
    fs::create_directories(root);
    save_pgm(disk_fixture(), (root / "disk.pgm").string());

    auto sh = [&](const std::string& cmd) {
        const int rc = std::system(cmd.c_str());
        return WEXITSTATUS(rc) == 0;
    };

    // both passes use identical relative paths from their own directory so
    // stdout (which echos paths) must match byte for byte too
    for (const std::string run : {"a", "b"}) {
        const fs::path dir = root / run;
        fs::create_directories(dir);
        fs::copy_file(root / "disk.pgm", dir / "disk.pgm");
        const std::string B = "cd " + dir.string() + " && " + std::string(bin);
        bool ok = true;
        ok &= sh(B + " gen-data --ratios 1.0:1.2:0.1 --out data --seed 9 > gen.txt 2>&1");
        ok &= sh(B + " stir --ratio 1.25 --level 30mm --seed 9 > stir.txt 2>&1");
        ok &= sh(B + " estimate --live --ratio 1.3 --level 32mm --seed 9 > estimate.txt 2>&1");
        ok &= sh(B + " train --task speed --data data/speed_train.csv --out speed.json"
                     " --epochs 80 --seed 9 > train.txt 2>&1");
        ok &= sh(B + " plan --image disk.pgm --stroke-width 10mm --seed 9 --out traj.json"
                     " --svg traj.svg > plan.txt 2>&1");
        ok &= sh(B + " pour --traj traj.json --ratio 1.3 --level 30mm --seed 9"
                     " --out deposit.pgm > pour.txt 2>&1");
        ok &= sh(B + " eval --experiment lines --seed 9 --out reports > eval.txt 2>&1");
        c.require(ok, "a subcommand failed on run " + run);
    }

    // every produced file must be byte-identical between the two runs
    int compared = 0;
    for (auto it = fs::recursive_directory_iterator(root / "a");
         it != fs::recursive_directory_iterator(); ++it) {
        if (!it->is_regular_file()) continue;
        const fs::path rel = fs::relative(it->path(), root / "a");
        const fs::path other = root / "b" / rel;
        std::ifstream fa(it->path(), std::ios::binary), fb(other, std::ios::binary);
        std::ostringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        if (sa.str() != sb.str()) c.require(false, rel.string() + " differs between runs");
        ++compared;
    }
    c.require(compared >= 14, "only compared " + std::to_string(compared) + " files");
    if (c.ok) c.detail = std::to_string(compared) + " files byte-identical across reruns";
    fs::remove_all(root);
}

void criterion_drip(Check& c) {
    SurrogateParams p;
    int worst_start = 0, worst_end = 0;
    const SpoutFrameLayout layout;
    const int frames_to_tip =
        (layout.spout_length + layout.advance_per_frame - 1) / layout.advance_per_frame;

    for (int i = 0; i < 50; ++i) {
        Rng rng(derive_seed(2024, "drip", static_cast<std::uint64_t>(i)));
        BatterTruth t;
        t.ratio = uniform_range(rng, 1.0, 1.5);
        t.level = uniform_range(rng, 0.015, 0.055);
        const double threshold = pour_threshold_angle(t.level, p);
        const int pre = 3 + static_cast<int>(rng() % 7);
        std::vector<double> profile;
        for (int k = 0; k < pre + 12; ++k) profile.push_back(threshold + (k - pre) * 0.0018);

        const auto frames = spout_mask_sequence(profile, t, p, rng());
        const DripEvents ev = detect_drip(frames);
        worst_start = std::max(worst_start, std::abs(ev.flow_start_frame - pre));
        worst_end =
            std::max(worst_end, std::abs(ev.spout_end_frame - (pre + frames_to_tip - 1)));
    }
    c.require(worst_start <= 1, "flow start off by " + std::to_string(worst_start));
    c.require(worst_end <= 2, "spout end off by " + std::to_string(worst_end));

    // constant sequences must refuse
    BatterTruth t;
    t.ratio = 1.3;
    t.level = 0.03;
    const std::vector<double> flat(10, 0.1);
    const auto frames = spout_mask_sequence(flat, t, p, 1);
    bool threw = false;
    try {
        detect_drip(frames);
    } catch (const NoFlowDetected&) {
        threw = true;
    }
    c.require(threw, "constant sequence did not raise NoFlowDetected");
    if (c.ok)
        c.detail = "worst start offset " + std::to_string(worst_start) + ", worst end offset " +
                   std::to_string(worst_end);
}

}  // namespace

int main() {
    struct Criterion {
        std::string name;
        double time_limit;  // seconds; 0 = none stated
        std::function<void(Check&)> fn;
    };
    const std::vector<Criterion> criteria{
        {"level estimator exact + 5% under noise", 1.0, criterion_level},
        {"ratio estimation 0.05 MAE + exact-match short circuit", 5.0, criterion_ratio},
        {"uniformity stop within +-1 of decay-law trial", 2.0, criterion_uniformity},
        {"mlp gradients 1e-4 + stated-config convergence", 30.0, criterion_mlp},
        {"line strokes <=10% error, <=12% variance, beats simple", 30.0, criterion_lines},
        {"round shapes <=5% error, baseline >3x worse", 30.0, criterion_round},
        {"planner loops/skeleton/forest + pour IoU >= 0.80", 20.0, criterion_planner},
        {"circle fit exact + <=1mm under 0.5mm jitter", 0.0, criterion_circle},
        {"CLI byte-identical reruns for every subcommand", 0.0, criterion_cli_determinism},
        {"drip detection +-1 start, +-2 end, NoFlowDetected", 0.0, criterion_drip},
    };

    int failures = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        Check check;
        const auto start = std::chrono::steady_clock::now();
        try {
            criteria[i].fn(check);
        } catch (const std::exception& e) {
            check.require(false, std::string("exception: ") + e.what());
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (criteria[i].time_limit > 0.0 && elapsed > criteria[i].time_limit)
            check.require(false, "took " + fmt(elapsed) + " s > " + fmt(criteria[i].time_limit) +
                                     " s budget");

        char line[512];
        std::snprintf(line, sizeof line, "C%-2zu %-4s (%6.2f s) %s%s%s\n", i + 1,
                      check.ok ? "PASS" : "FAIL", elapsed, criteria[i].name.c_str(),
                      check.detail.empty() ? "" : " -- ", check.detail.c_str());
        std::cout << line;
        failures += !check.ok;
    }
    if (failures > 0) std::cout << failures << " criterion(s) failed\n";
    return failures;
}
