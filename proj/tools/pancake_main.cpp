// Command-line front end: data generation, stirring, estimation, training,
// planning, pouring and the experiment suites.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pancake/config.hpp"
#include "pancake/control.hpp"
#include "pancake/errors.hpp"
#include "pancake/eval.hpp"
#include "pancake/mask.hpp"
#include "pancake/mlp.hpp"
#include "pancake/perception.hpp"
#include "pancake/planner.hpp"
#include "pancake/sim.hpp"
#include "pancake/rng.hpp"

namespace fs = std::filesystem;
using namespace pancake;

namespace {

struct CommonOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

RunConfig resolve_config(const CommonOpts& common) {
    RunConfig cfg;
    if (!common.config_path.empty()) cfg = load_config(common.config_path);
    if (common.seed_given) cfg.seed = common.seed;
    return cfg;
}

void add_common(CLI::App* sub, CommonOpts& common) {
    sub->add_option("--config", common.config_path, "run configuration file (key=value sections)");
    sub->add_option("--seed", common.seed, "random seed (default 0)")
        ->each([&common](const std::string&) { common.seed_given = true; });
}

std::vector<double> parse_ratio_spec(const std::string& spec) {
    std::vector<double> ratios;
    if (spec.find(':') != std::string::npos) {
        double start, stop, step;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 || step <= 0.0)
            throw std::invalid_argument("--ratios expects start:stop:step or a comma list");
        for (double r = start; r <= stop + 1e-9; r += step) ratios.push_back(r);
    } else {
        std::string cur;
        std::istringstream ss(spec);
        while (std::getline(ss, cur, ',')) ratios.push_back(std::stod(cur));
    }
    if (ratios.empty()) throw std::invalid_argument("no ratios given");
    return ratios;
}

BowlSpec bowl_from_name(const std::string& name) {
    if (name == "small") return small_bowl();
    if (name == "large") return large_bowl();
    throw std::invalid_argument("--bowl must be small or large");
}

void print(const char* fmt, double v) {
    char buf[96];
    std::snprintf(buf, sizeof buf, fmt, v);
    std::cout << buf;
}

// ---------------------------------------------------------------------------

int run_gen_data(const CommonOpts& common, const std::string& ratio_spec, int pushes,
                 std::string out_dir) {
    const RunConfig cfg = resolve_config(common);
    if (out_dir.empty()) out_dir = cfg.dataset_dir;
    if (pushes < 4) throw std::invalid_argument("--pushes must be at least 4");
    const auto ratios = parse_ratio_spec(ratio_spec);
    fs::create_directories(fs::path(out_dir) / "ratio_train");

    const auto heights = probe_heights(0.003, 0.003 * pushes, 0.003);
    std::ofstream levels((fs::path(out_dir) / "ratio_train" / "levels.csv").string());
    levels << "ratio,level_m\n";
    std::vector<RatioTrainingBatch> batches;
    int i = 0;
    for (const double ratio : ratios) {
        const std::uint64_t s = derive_seed(cfg.seed, "gen-ratio", static_cast<std::uint64_t>(i++));
        Rng rng(s);
        BatterTruth truth;
        truth.bowl = small_bowl();
        truth.ratio = ratio;
        truth.level = uniform_range(rng, 0.025, 0.045);
        const SurrogateParams noisy = with_relative_noise(cfg.sim, truth, 0.02);
        const StirSession session = stir_to_uniform(truth, noisy, s);
        const TorqueCurve curve =
            run_push_sequence(session.final_truth, noisy, heights, derive_seed(s, "gen-curve"));
        const LevelEstimate level_est = estimate_level(curve, 6.0 * noisy.sigma_air);
        batches.push_back({ratio, curve, level_est.level});

        char name[64];
        std::snprintf(name, sizeof name, "ratio_%.2f.csv", ratio);
        save_torque_curve(curve, (fs::path(out_dir) / "ratio_train" / name).string());
        char row[64];
        std::snprintf(row, sizeof row, "%.12g,%.12g\n", ratio, truth.level);
        levels << row;
    }
    levels.close();

    if (batches.size() >= 2) {
        RatioModel model = fit_ratio_model(batches);
        model.weighting_mode = cfg.weighting_mode;
        save_ratio_model(model, (fs::path(out_dir) / "ratio_model.json").string());
    }

    save_dataset_csv(synth_speed_dataset(cfg.sim, derive_seed(cfg.seed, "speed-data")),
                     "ratio,width_m,speed_mps", (fs::path(out_dir) / "speed_train.csv").string());
    save_dataset_csv(synth_time_dataset(cfg.sim, derive_seed(cfg.seed, "time-data")),
                     "ratio,diameter_m,time_s", (fs::path(out_dir) / "time_train.csv").string());

    std::cout << "wrote " << ratios.size() << " torque curves and 2 pour datasets to " << out_dir
              << "\n";
    return 0;
}

int run_stir(const CommonOpts& common, double ratio, const std::string& level_text,
             const std::string& bowl_name) {
    const RunConfig cfg = resolve_config(common);
    BatterTruth truth;
    truth.bowl = bowl_from_name(bowl_name);
    truth.ratio = ratio;
    truth.level = parse_length(level_text, cfg.units);
    validate(truth);

    const SurrogateParams noisy = with_relative_noise(cfg.sim, truth, 0.02);
    StirProtocol protocol;
    protocol.threshold_fraction = cfg.uniformity_threshold_fraction;
    const StirSession session = stir_to_uniform(truth, noisy, cfg.seed, protocol);
    const int gt = ground_truth_stop_trial(cfg.sim, protocol);

    std::cout << "trial,mean_torque_nm\n";
    for (size_t i = 0; i < session.trial_torques.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%zu,%.6g\n", i + 1, session.trial_torques[i]);
        std::cout << buf;
    }
    std::cout << "uniform after trial " << session.stop_trial << " (decay-law reference: " << gt
              << ")\n";
    return 0;
}

int run_estimate(const CommonOpts& common, const std::string& curve_path,
                 const std::string& model_path, bool live, double ratio,
                 const std::string& level_text, const std::string& bowl_name) {
    const RunConfig cfg = resolve_config(common);

    TorqueCurve curve;
    double jump = cfg.jump_threshold();
    if (live) {
        BatterTruth truth;
        truth.bowl = bowl_from_name(bowl_name);
        truth.ratio = ratio;
        truth.level = parse_length(level_text, cfg.units);
        validate(truth);
        const SurrogateParams noisy = with_relative_noise(cfg.sim, truth, 0.02);
        const StirSession session = stir_to_uniform(truth, noisy, cfg.seed);
        curve = run_push_sequence(session.final_truth, noisy, probe_heights(0.003, 0.063, 0.003),
                                  derive_seed(cfg.seed, "estimate-curve"));
        jump = 6.0 * noisy.sigma_air;
    } else {
        if (curve_path.empty())
            throw std::invalid_argument("estimate needs --curve FILE or --live");
        curve = load_torque_curve(curve_path);
    }

    const LevelEstimate level_est = estimate_level(curve, jump);
    print("liquid level: %.6g m\n", level_est.level);
    if (!model_path.empty()) {
        RatioModel model = load_ratio_model(model_path);
        model.weighting_mode = cfg.weighting_mode;
        print("water-flour ratio: %.6g\n", estimate_ratio(curve, level_est.level, model));
    }
    return 0;
}

int run_train(const CommonOpts& common, const std::string& task, const std::string& data_path,
              std::string out_path, int epochs, double lr) {
    const RunConfig cfg = resolve_config(common);
    if (out_path.empty()) out_path = (fs::path(cfg.model_dir) / (task + "_model.json")).string();
    if (task != "speed" && task != "time")
        throw std::invalid_argument("--task must be speed or time");

    const Dataset ds = load_dataset_csv(data_path);
    MlpModel model = make_mlp({2, 32, 64, 1}, derive_seed(cfg.seed, task + "-init"));
    TrainConfig tc;
    tc.epochs = epochs;
    tc.learning_rate = lr;
    tc.seed = cfg.seed;
    const auto history = train(model, ds, tc);
    save_mlp(model, out_path);

    std::ofstream loss_out(out_path + ".loss.csv");
    loss_out << "epoch,mse\n";
    for (size_t i = 0; i < history.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%zu,%.12g\n", i + 1, history[i]);
        loss_out << buf;
    }
    print("initial mse: %.6g\n", history.front());
    print("final mse: %.6g\n", history.back());
    std::cout << "model written to " << out_path << "\n";
    return 0;
}

PlanMode mode_from_name(const std::string& name) {
    if (name == "auto") return PlanMode::Auto;
    if (name == "enclosed") return PlanMode::Enclosed;
    if (name == "open") return PlanMode::OpenLines;
    throw std::invalid_argument("--mode must be auto, enclosed or open");
}

int run_plan(const CommonOpts& common, const std::string& image, const std::string& width_text,
             const std::string& scale_text, const std::string& mode_name, const std::string& out,
             const std::string& svg) {
    const RunConfig cfg = resolve_config(common);
    const double scale = parse_length(scale_text, "mm");
    const double width = parse_length(width_text, cfg.units);
    const int width_px = std::max(1, static_cast<int>(std::lround(width / scale)));

    const BinaryMask mask = load_pgm(image, scale);
    const Trajectory traj = plan_trajectory(mask, width_px, mode_from_name(mode_name));
    save_trajectory(traj, out);
    if (!svg.empty()) save_trajectory_svg(traj, svg);
    std::cout << "planned " << traj.strokes.size() << " strokes at stroke width ";
    print("%.6g m\n", traj.stroke_width);
    return 0;
}

int run_pour(const CommonOpts& common, const std::string& traj_path, const std::string& image,
             const std::string& width_text, double ratio, const std::string& level_text,
             const std::string& model_path, const std::string& out,
             const std::string& scale_text) {
    const RunConfig cfg = resolve_config(common);
    const double scale = parse_length(scale_text, "mm");

    Trajectory traj;
    std::optional<BinaryMask> mask;
    if (!traj_path.empty()) {
        traj = load_trajectory(traj_path);
    } else if (!image.empty()) {
        if (width_text.empty())
            throw std::invalid_argument("pour --image needs --stroke-width");
        mask = load_pgm(image, scale);
        const double width = parse_length(width_text, cfg.units);
        const int width_px = std::max(1, static_cast<int>(std::lround(width / scale)));
        traj = plan_trajectory(*mask, width_px);
    } else {
        throw std::invalid_argument("pour needs --traj or --image");
    }

    BatterTruth truth;
    truth.ratio = ratio;
    truth.level = parse_length(level_text, cfg.units);
    validate(truth);

    const PourStart start = start_pour(truth, cfg.sim, derive_seed(cfg.seed, "pour-start"));
    print("flow established at tilt angle %.6g rad\n", start.start_angle);

    std::optional<MlpModel> model;
    if (!model_path.empty()) model = load_mlp(model_path);

    // grid sized to the trajectory footprint plus a margin
    double max_x = 0.0, max_y = 0.0;
    for (const auto& s : traj.strokes)
        for (const auto& pt : s.points) {
            max_x = std::max(max_x, pt.x);
            max_y = std::max(max_y, pt.y);
        }
    const double margin = 2.0 * traj.stroke_width + 0.01;
    DepositionGrid grid = make_grid(scale, {0.0, 0.0}, max_x + margin, max_y + margin);
    pour_trajectory(grid, traj, truth, cfg.sim, model ? &*model : nullptr);
    save_grid_pgm(grid, out);

    print("deposited volume: %.6g m^3\n", grid.total_volume());
    if (mask) print("target IoU: %.4g\n", deposit_iou(*mask, grid));
    std::cout << "deposit written to " << out << "\n";
    return 0;
}

int run_eval(const CommonOpts& common, const std::string& experiment, std::string out_dir,
             bool snapshots) {
    const RunConfig cfg = resolve_config(common);
    if (out_dir.empty()) out_dir = cfg.output_dir;
    fs::create_directories(out_dir);
    const std::string snapshot_dir = snapshots ? out_dir : "";

    ExperimentReport report;
    if (experiment == "lines") {
        report = run_line_experiment(cfg.sim, cfg.seed, snapshot_dir);
    } else if (experiment == "round") {
        report = run_round_experiment(cfg.sim, cfg.seed, snapshot_dir);
    } else if (experiment == "perception") {
        report = run_perception_experiment(10, 5, cfg.seed, cfg.sim);
    } else {
        throw std::invalid_argument("--experiment must be lines, round or perception");
    }

    save_report_csv(report, (fs::path(out_dir) / (report.name + ".csv")).string());
    save_report_json(report, (fs::path(out_dir) / (report.name + ".json")).string());
    for (const auto& a : report.aggregates) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s: mean_abs_error=%.6g mean_pct_error=%.4g%%\n",
                      a.method.c_str(), a.mean_abs_error, 100.0 * a.mean_pct_error);
        std::cout << buf;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale batter stirring, perception, planning and pouring sandbox"};
    app.require_subcommand(1);

    CommonOpts common;
    int exit_code = 0;

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate training CSVs (torque curves, pour data)");
    std::string gen_ratios = "1.0:1.5:0.05", gen_out;
    int gen_pushes = 21;
    add_common(gen, common);
    gen->add_option("--ratios", gen_ratios, "ratio labels, start:stop:step or comma list");
    gen->add_option("--pushes", gen_pushes, "push heights per batch (3 mm spacing)");
    gen->add_option("--out", gen_out, "output directory (default: configured dataset dir)");
    gen->callback([&] { exit_code = run_gen_data(common, gen_ratios, gen_pushes, gen_out); });

    // stir
    auto* stir = app.add_subcommand("stir", "stir a simulated batter to uniformity");
    double stir_ratio = 1.25;
    std::string stir_level = "30mm", stir_bowl = "small";
    add_common(stir, common);
    stir->add_option("--ratio", stir_ratio, "water-flour ratio")->required();
    stir->add_option("--level", stir_level, "liquid level, e.g. 30mm")->required();
    stir->add_option("--bowl", stir_bowl, "small | large");
    stir->callback([&] { exit_code = run_stir(common, stir_ratio, stir_level, stir_bowl); });

    // estimate
    auto* est = app.add_subcommand("estimate", "estimate liquid level and water-flour ratio");
    std::string est_curve, est_model, est_level = "30mm", est_bowl = "small";
    bool est_live = false;
    double est_ratio = 1.25;
    add_common(est, common);
    est->add_option("--curve", est_curve, "torque curve CSV");
    est->add_option("--model", est_model, "ratio model JSON");
    est->add_flag("--live", est_live, "simulate a batter instead of reading a curve");
    est->add_option("--ratio", est_ratio, "true ratio for --live");
    est->add_option("--level", est_level, "true level for --live");
    est->add_option("--bowl", est_bowl, "bowl for --live: small | large");
    est->callback([&] {
        exit_code = run_estimate(common, est_curve, est_model, est_live, est_ratio, est_level,
                                 est_bowl);
    });

    // train
    auto* tr = app.add_subcommand("train", "train a pour model from a CSV dataset");
    std::string tr_task, tr_data, tr_out;
    int tr_epochs = 1000;
    double tr_lr = 0.06;
    add_common(tr, common);
    tr->add_option("--task", tr_task, "speed | time")->required();
    tr->add_option("--data", tr_data, "training CSV")->required();
    tr->add_option("--out", tr_out, "output model JSON (default: <model dir>/<task>_model.json)");
    tr->add_option("--epochs", tr_epochs, "training epochs");
    tr->add_option("--lr", tr_lr, "learning rate");
    tr->callback([&] { exit_code = run_train(common, tr_task, tr_data, tr_out, tr_epochs, tr_lr); });

    // plan
    auto* plan = app.add_subcommand("plan", "decompose a binary image into a pour trajectory");
    std::string plan_image, plan_width = "10mm", plan_scale = "1mm", plan_mode = "auto";
    std::string plan_out = "traj.json", plan_svg;
    add_common(plan, common);
    plan->add_option("--image", plan_image, "input PGM (P2/P5)")->required();
    plan->add_option("--stroke-width", plan_width, "target stroke width, e.g. 10mm");
    plan->add_option("--scale", plan_scale, "world size of one pixel (default 1mm)");
    plan->add_option("--mode", plan_mode, "auto | enclosed | open");
    plan->add_option("--out", plan_out, "output trajectory JSON");
    plan->add_option("--svg", plan_svg, "optional SVG preview");
    plan->callback([&] {
        exit_code = run_plan(common, plan_image, plan_width, plan_scale, plan_mode, plan_out,
                             plan_svg);
    });

    // pour
    auto* pour = app.add_subcommand("pour", "simulate pouring a trajectory onto the plate");
    std::string pour_traj, pour_image, pour_width, pour_level = "30mm", pour_model;
    std::string pour_out = "deposit.pgm", pour_scale = "1mm";
    double pour_ratio = 1.3;
    add_common(pour, common);
    pour->add_option("--traj", pour_traj, "trajectory JSON from `plan`");
    pour->add_option("--image", pour_image, "or plan directly from a PGM");
    pour->add_option("--stroke-width", pour_width, "stroke width when planning from --image");
    pour->add_option("--ratio", pour_ratio, "water-flour ratio")->required();
    pour->add_option("--level", pour_level, "liquid level, e.g. 30mm");
    pour->add_option("--model", pour_model, "trained speed model JSON (default: exact inverse)");
    pour->add_option("--out", pour_out, "output deposit PGM");
    pour->add_option("--scale", pour_scale, "grid resolution / pixel size");
    pour->callback([&] {
        exit_code = run_pour(common, pour_traj, pour_image, pour_width, pour_ratio, pour_level,
                             pour_model, pour_out, pour_scale);
    });

    // eval
    auto* ev = app.add_subcommand("eval", "run an experiment suite and write reports");
    std::string ev_experiment, ev_out;
    bool ev_snapshots = false;
    add_common(ev, common);
    ev->add_option("--experiment", ev_experiment, "lines | round | perception")->required();
    ev->add_option("--out", ev_out, "report output directory (default: configured output dir)");
    ev->add_flag("--snapshots", ev_snapshots, "also write a deposit PGM per experiment cell");
    ev->callback([&] { exit_code = run_eval(common, ev_experiment, ev_out, ev_snapshots); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return exit_code;
}
