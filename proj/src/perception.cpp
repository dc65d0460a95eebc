#include "pancake/perception.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pancake/errors.hpp"

namespace pancake {

bool is_uniform(const UniformityMonitor& monitor) {
    if (monitor.trial_torques.size() < 2)
        throw std::invalid_argument("uniformity check needs at least two trials");
    if (!(monitor.threshold > 0.0))
        throw std::invalid_argument("uniformity threshold must be positive");
    const auto& t = monitor.trial_torques;
    return std::abs(t[t.size() - 1] - t[t.size() - 2]) < monitor.threshold;
}

namespace {

LinePair fit_line(const std::vector<TorqueSample>& samples, int begin, int end) {
    const int n = end - begin;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = begin; i < end; ++i) {
        sx += samples[i].tip_height;
        sy += samples[i].torque;
        sxx += samples[i].tip_height * samples[i].tip_height;
        sxy += samples[i].tip_height * samples[i].torque;
    }
    const double det = n * sxx - sx * sx;
    LinePair line;
    line.slope = (n * sxy - sx * sy) / det;
    line.intercept = (sy - line.slope * sx) / n;
    return line;
}

}  // namespace

LevelEstimate estimate_level(const TorqueCurve& curve, double jump_threshold) {
    const auto& s = curve.samples;
    if (s.size() < 4) throw std::invalid_argument("level estimation needs at least 4 samples");
    if (jump_threshold < 0.0) throw std::invalid_argument("jump threshold must be >= 0");
    for (size_t i = 1; i < s.size(); ++i)
        if (!(s[i].tip_height > s[i - 1].tip_height))
            throw std::invalid_argument("curve heights must be strictly increasing");

    // The air side is the maximal trailing run of readings within noise of
    // zero; everything before it was pushed through batter.
    int split = static_cast<int>(s.size());
    while (split > 0 && std::abs(s[split - 1].torque) <= jump_threshold) --split;

    const int n = static_cast<int>(s.size());
    const int batter_count = split;
    const int air_count = n - split;
    if (batter_count == 0) throw NoBatterDetected("all pushes read as air");
    if (air_count < 2) throw ProbeRangeTooShallow("curve never flattens to zero");
    if (batter_count < 3) throw ProbeRangeTooCoarse("fewer than 3 immersed samples");

    LevelEstimate est;
    est.split_index = split;
    est.batter_line = fit_line(s, 0, split);
    est.air_line = fit_line(s, split, n);

    const double slope_diff = est.batter_line.slope - est.air_line.slope;
    if (std::abs(slope_diff) < 1e-9) {
        est.level = s[split].tip_height;  // parallel fallback: boundary sample height
    } else {
        est.level = (est.air_line.intercept - est.batter_line.intercept) / slope_diff;
    }
    return est;
}

namespace {

std::vector<std::pair<double, double>> immersed_pairs(const TorqueCurve& curve, double level) {
    std::vector<std::pair<double, double>> out;  // (immersion depth, torque)
    for (const auto& s : curve.samples)
        if (s.tip_height < level) out.push_back({level - s.tip_height, s.torque});
    return out;
}

}  // namespace

RatioModel fit_ratio_model(const std::vector<RatioTrainingBatch>& training) {
    if (training.size() < 2)
        throw std::invalid_argument("ratio model needs at least 2 labelled batches");
    std::set<double> labels;
    RatioModel model;
    for (const auto& batch : training) {
        if (!labels.insert(batch.ratio_label).second)
            throw std::invalid_argument("duplicate ratio label in training data");
        const auto pairs = immersed_pairs(batch.curve, batch.level);
        if (pairs.size() < 3)
            throw ProbeRangeTooCoarse("fewer than 3 immersed samples in training batch");
        double sdd = 0, sdt = 0;
        for (const auto& [d, t] : pairs) {
            sdd += d * d;
            sdt += d * t;
        }
        const double slope = sdt / sdd;
        if (!(slope > 0.0))
            throw std::runtime_error("non-positive torque slope fitted; data violates physics");
        model.entries.push_back({batch.ratio_label, slope});
    }
    std::sort(model.entries.begin(), model.entries.end(),
              [](const RatioEntry& a, const RatioEntry& b) { return a.ratio < b.ratio; });
    return model;
}

double ratio_entry_mse(const RatioEntry& entry, const TorqueCurve& curve, double level) {
    const auto pairs = immersed_pairs(curve, level);
    if (pairs.size() < 3) throw ProbeRangeTooCoarse("fewer than 3 immersed samples");
    double acc = 0.0;
    for (const auto& [d, t] : pairs) {
        const double err = entry.slope * d - t;
        acc += err * err;
    }
    return acc / static_cast<double>(pairs.size());
}

double estimate_ratio(const TorqueCurve& curve, double level, const RatioModel& model) {
    if (model.entries.size() < 2)
        throw std::invalid_argument("ratio model needs at least 2 entries");

    std::vector<std::pair<double, double>> scored;  // (mse, ratio)
    scored.reserve(model.entries.size());
    for (const auto& e : model.entries) scored.push_back({ratio_entry_mse(e, curve, level), e.ratio});
    std::sort(scored.begin(), scored.end());

    const double m1 = scored[0].first, r1 = scored[0].second;
    const double m2 = scored[1].first, r2 = scored[1].second;
    if (m1 < 1e-12) return r1;  // exact match short-circuit

    if (model.weighting_mode == WeightingMode::InverseMse)
        return (m2 * r1 + m1 * r2) / (m1 + m2);
    return (m1 * r1 + m2 * r2) / (m1 + m2);
}

std::string to_string(WeightingMode mode) {
    return mode == WeightingMode::InverseMse ? "inverse_mse" : "paper_literal";
}

WeightingMode weighting_mode_from_string(const std::string& name) {
    if (name == "inverse_mse") return WeightingMode::InverseMse;
    if (name == "paper_literal") return WeightingMode::PaperLiteral;
    throw std::invalid_argument("unknown weighting mode: " + name);
}

void save_ratio_model(const RatioModel& model, const std::string& path) {
    nlohmann::json j;
    j["weighting_mode"] = to_string(model.weighting_mode);
    j["fit"] = "least_squares_through_origin";
    auto& entries = j["entries"] = nlohmann::json::array();
    for (const auto& e : model.entries) entries.push_back({{"ratio", e.ratio}, {"slope", e.slope}});
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

RatioModel load_ratio_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    RatioModel model;
    model.weighting_mode = weighting_mode_from_string(j.at("weighting_mode").get<std::string>());
    for (const auto& e : j.at("entries"))
        model.entries.push_back({e.at("ratio").get<double>(), e.at("slope").get<double>()});
    return model;
}

void save_torque_curve(const TorqueCurve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "tip_height_m,mean_torque_nm\n";
    char buf[64];
    for (const auto& s : curve.samples) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", s.tip_height, s.torque);
        out << buf;
    }
}

TorqueCurve load_torque_curve(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("tip_height_m,", 0) != 0)
        throw std::runtime_error(path + ": expected torque curve header");
    TorqueCurve curve;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b))
            throw std::runtime_error(path + ": malformed row '" + line + "'");
        curve.samples.push_back({std::stod(a), std::stod(b)});
    }
    return curve;
}

CircleFit fit_circle(const std::vector<Vec2>& points) {
    if (points.size() < 3) throw std::invalid_argument("circle fit needs at least 3 points");

    // Centre the data first; the algebraic fit is then rigid-invariant to
    // floating-point precision.
    Vec2 mean{0, 0};
    for (const auto& p : points) mean = mean + p;
    mean = (1.0 / points.size()) * mean;

    double sxx = 0, sxy = 0, syy = 0, sxz = 0, syz = 0, sz = 0;
    for (const auto& p : points) {
        const double x = p.x - mean.x, y = p.y - mean.y;
        const double z = x * x + y * y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        sxz += x * z;
        syz += y * z;
        sz += z;
    }
    const double n = static_cast<double>(points.size());
    // normal equations for z + D x + E y + F = 0 with centred coordinates
    // (sum x = sum y = 0 drops the cross terms with F)
    const double det = sxx * syy - sxy * sxy;
    double scale = (sxx + syy) / n;
    if (scale == 0.0 || std::abs(det) < 1e-12 * scale * scale * n * n)
        throw std::invalid_argument("circle fit is degenerate (collinear points)");
    const double d = (-sxz * syy + syz * sxy) / det;
    const double e = (-syz * sxx + sxz * sxy) / det;
    const double f = -sz / n;  // from the F normal equation: n*F + sum z = 0

    CircleFit fit;
    fit.center = {mean.x - d / 2.0, mean.y - e / 2.0};
    const double r2 = (d * d + e * e) / 4.0 - f;
    if (!(r2 > 0.0)) throw std::invalid_argument("circle fit produced non-positive radius");
    fit.radius = std::sqrt(r2);
    return fit;
}

}  // namespace pancake
