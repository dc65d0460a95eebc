#include "pancake/mlp.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pancake/rng.hpp"

namespace pancake {

MlpModel make_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed) {
    if (layer_sizes.size() < 2) throw std::invalid_argument("need at least input and output layers");
    for (const int n : layer_sizes)
        if (n <= 0) throw std::invalid_argument("layer sizes must be positive");

    MlpModel m;
    m.layer_sizes = layer_sizes;
    Rng rng(seed);
    for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int in = layer_sizes[l], out = layer_sizes[l + 1];
        const double bound = std::sqrt(6.0 / (in + out));  // Glorot uniform
        std::vector<double> w(static_cast<size_t>(in) * out);
        for (auto& v : w) v = uniform_range(rng, -bound, bound);
        m.weights.push_back(std::move(w));
        m.biases.push_back(std::vector<double>(static_cast<size_t>(out), 0.0));
    }
    m.in_mean.assign(static_cast<size_t>(layer_sizes.front()), 0.0);
    m.in_std.assign(static_cast<size_t>(layer_sizes.front()), 1.0);
    return m;
}

namespace {

// activations per layer for one sample; returns the raw output unit
double forward_normalized(const MlpModel& m, const std::vector<double>& x,
                          std::vector<std::vector<double>>* acts) {
    std::vector<double> cur = x;
    if (acts) acts->push_back(cur);
    const size_t n_layers = m.weights.size();
    for (size_t l = 0; l < n_layers; ++l) {
        const int in = m.layer_sizes[l], out = m.layer_sizes[l + 1];
        std::vector<double> next(static_cast<size_t>(out));
        for (int o = 0; o < out; ++o) {
            double acc = m.biases[l][static_cast<size_t>(o)];
            const double* row = &m.weights[l][static_cast<size_t>(o) * in];
            for (int i = 0; i < in; ++i) acc += row[i] * cur[static_cast<size_t>(i)];
            next[static_cast<size_t>(o)] = (l + 1 < n_layers) ? std::tanh(acc) : acc;
        }
        cur = std::move(next);
        if (acts) acts->push_back(cur);
    }
    return cur[0];
}

}  // namespace

double mlp_forward(const MlpModel& model, const std::vector<double>& x) {
    if (x.size() != static_cast<size_t>(model.layer_sizes.front()))
        throw std::invalid_argument("feature vector has the wrong dimension");
    for (const double v : x)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");

    std::vector<double> xn(x.size());
    for (size_t i = 0; i < x.size(); ++i) xn[i] = (x[i] - model.in_mean[i]) / model.in_std[i];
    return forward_normalized(model, xn, nullptr) * model.out_std + model.out_mean;
}

double mlp_loss(const MlpModel& model, const std::vector<std::vector<double>>& x_norm,
                const std::vector<double>& y_norm) {
    double acc = 0.0;
    for (size_t i = 0; i < x_norm.size(); ++i) {
        const double err = forward_normalized(model, x_norm[i], nullptr) - y_norm[i];
        acc += err * err;
    }
    return acc / static_cast<double>(x_norm.size());
}

MlpGradients mlp_gradients(const MlpModel& model, const std::vector<std::vector<double>>& x_norm,
                           const std::vector<double>& y_norm) {
    MlpGradients g;
    for (size_t l = 0; l < model.weights.size(); ++l) {
        g.weights.push_back(std::vector<double>(model.weights[l].size(), 0.0));
        g.biases.push_back(std::vector<double>(model.biases[l].size(), 0.0));
    }

    const size_t n_layers = model.weights.size();
    const double n = static_cast<double>(x_norm.size());
    for (size_t s = 0; s < x_norm.size(); ++s) {
        std::vector<std::vector<double>> acts;
        const double pred = forward_normalized(model, x_norm[s], &acts);

        // dL/dout for the squared error term of this sample
        std::vector<double> delta{2.0 * (pred - y_norm[s]) / n};
        for (size_t l = n_layers; l-- > 0;) {
            const int in = model.layer_sizes[l], out = model.layer_sizes[l + 1];
            const auto& a_in = acts[l];
            std::vector<double> delta_prev(static_cast<size_t>(in), 0.0);
            for (int o = 0; o < out; ++o) {
                const double d = delta[static_cast<size_t>(o)];
                g.biases[l][static_cast<size_t>(o)] += d;
                double* grow = &g.weights[l][static_cast<size_t>(o) * in];
                const double* wrow = &model.weights[l][static_cast<size_t>(o) * in];
                for (int i = 0; i < in; ++i) {
                    grow[i] += d * a_in[static_cast<size_t>(i)];
                    delta_prev[static_cast<size_t>(i)] += d * wrow[i];
                }
            }
            if (l > 0) {
                // tanh'(z) = 1 - tanh(z)^2, and acts[l] holds tanh(z)
                const auto& a = acts[l];
                for (int i = 0; i < in; ++i)
                    delta_prev[static_cast<size_t>(i)] *= 1.0 - a[static_cast<size_t>(i)] * a[static_cast<size_t>(i)];
            }
            delta = std::move(delta_prev);
        }
    }
    return g;
}

std::vector<double> train(MlpModel& model, const Dataset& dataset, const TrainConfig& config) {
    if (dataset.features.empty()) throw std::invalid_argument("empty training dataset");
    if (dataset.features.size() != dataset.targets.size())
        throw std::invalid_argument("features/targets size mismatch");
    const size_t dim = static_cast<size_t>(model.layer_sizes.front());
    for (const auto& row : dataset.features) {
        if (row.size() != dim) throw std::invalid_argument("feature row has the wrong dimension");
        for (const double v : row)
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
    }
    for (const double v : dataset.targets)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite target value");
    if (config.epochs <= 0 || !(config.learning_rate > 0.0))
        throw std::invalid_argument("bad training config");

    const size_t n = dataset.features.size();

    // z-score features and targets; the stated learning rate assumes it
    model.in_mean.assign(dim, 0.0);
    model.in_std.assign(dim, 0.0);
    model.feat_lo.assign(dim, 1e300);
    model.feat_hi.assign(dim, -1e300);
    for (const auto& row : dataset.features)
        for (size_t j = 0; j < dim; ++j) {
            model.in_mean[j] += row[j];
            model.feat_lo[j] = std::min(model.feat_lo[j], row[j]);
            model.feat_hi[j] = std::max(model.feat_hi[j], row[j]);
        }
    for (size_t j = 0; j < dim; ++j) model.in_mean[j] /= static_cast<double>(n);
    for (const auto& row : dataset.features)
        for (size_t j = 0; j < dim; ++j) {
            const double d = row[j] - model.in_mean[j];
            model.in_std[j] += d * d;
        }
    for (size_t j = 0; j < dim; ++j) {
        model.in_std[j] = std::sqrt(model.in_std[j] / static_cast<double>(n));
        if (model.in_std[j] < 1e-12) model.in_std[j] = 1.0;  // constant feature
    }
    model.out_mean = 0.0;
    for (const double t : dataset.targets) model.out_mean += t;
    model.out_mean /= static_cast<double>(n);
    model.out_std = 0.0;
    for (const double t : dataset.targets) {
        const double d = t - model.out_mean;
        model.out_std += d * d;
    }
    model.out_std = std::sqrt(model.out_std / static_cast<double>(n));
    if (model.out_std < 1e-12) model.out_std = 1.0;

    std::vector<std::vector<double>> xn(n, std::vector<double>(dim));
    std::vector<double> yn(n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < dim; ++j)
            xn[i][j] = (dataset.features[i][j] - model.in_mean[j]) / model.in_std[j];
        yn[i] = (dataset.targets[i] - model.out_mean) / model.out_std;
    }

    // Adam state
    MlpGradients m1, m2;
    for (size_t l = 0; l < model.weights.size(); ++l) {
        m1.weights.push_back(std::vector<double>(model.weights[l].size(), 0.0));
        m1.biases.push_back(std::vector<double>(model.biases[l].size(), 0.0));
        m2.weights.push_back(std::vector<double>(model.weights[l].size(), 0.0));
        m2.biases.push_back(std::vector<double>(model.biases[l].size(), 0.0));
    }

    std::vector<double> history;
    history.reserve(static_cast<size_t>(config.epochs));
    auto adam_step = [&](std::vector<double>& w, const std::vector<double>& g,
                         std::vector<double>& mm, std::vector<double>& vv, double bc1, double bc2) {
        for (size_t i = 0; i < w.size(); ++i) {
            mm[i] = config.beta1 * mm[i] + (1.0 - config.beta1) * g[i];
            vv[i] = config.beta2 * vv[i] + (1.0 - config.beta2) * g[i] * g[i];
            const double mhat = mm[i] / bc1;
            const double vhat = vv[i] / bc2;
            w[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
        }
    };

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto grads = mlp_gradients(model, xn, yn);
        const double bc1 = 1.0 - std::pow(config.beta1, epoch);
        const double bc2 = 1.0 - std::pow(config.beta2, epoch);
        for (size_t l = 0; l < model.weights.size(); ++l) {
            adam_step(model.weights[l], grads.weights[l], m1.weights[l], m2.weights[l], bc1, bc2);
            adam_step(model.biases[l], grads.biases[l], m1.biases[l], m2.biases[l], bc1, bc2);
        }
        const double loss = mlp_loss(model, xn, yn);
        if (!std::isfinite(loss))
            throw std::runtime_error("training diverged (non-finite loss at epoch " +
                                     std::to_string(epoch) + "); lower the learning rate");
        history.push_back(loss);
    }
    model.trained = true;
    model.config = config;
    return history;
}

void save_mlp(const MlpModel& model, const std::string& path) {
    nlohmann::json j;
    j["layer_sizes"] = model.layer_sizes;
    j["weights"] = model.weights;
    j["biases"] = model.biases;
    j["norms"] = {{"in_mean", model.in_mean},
                  {"in_std", model.in_std},
                  {"out_mean", model.out_mean},
                  {"out_std", model.out_std}};
    j["feature_range"] = {{"lo", model.feat_lo}, {"hi", model.feat_hi}};
    j["trained"] = model.trained;
    j["seed"] = model.config.seed;
    j["config"] = {{"epochs", model.config.epochs},
                   {"learning_rate", model.config.learning_rate},
                   {"beta1", model.config.beta1},
                   {"beta2", model.config.beta2},
                   {"epsilon", model.config.epsilon}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

MlpModel load_mlp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    MlpModel m;
    m.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    m.biases = j.at("biases").get<std::vector<std::vector<double>>>();
    m.in_mean = j.at("norms").at("in_mean").get<std::vector<double>>();
    m.in_std = j.at("norms").at("in_std").get<std::vector<double>>();
    m.out_mean = j.at("norms").at("out_mean").get<double>();
    m.out_std = j.at("norms").at("out_std").get<double>();
    m.feat_lo = j.at("feature_range").at("lo").get<std::vector<double>>();
    m.feat_hi = j.at("feature_range").at("hi").get<std::vector<double>>();
    m.trained = j.at("trained").get<bool>();
    m.config.seed = j.at("seed").get<std::uint64_t>();
    const auto& cfg = j.at("config");
    m.config.epochs = cfg.at("epochs").get<int>();
    m.config.learning_rate = cfg.at("learning_rate").get<double>();
    m.config.beta1 = cfg.at("beta1").get<double>();
    m.config.beta2 = cfg.at("beta2").get<double>();
    m.config.epsilon = cfg.at("epsilon").get<double>();
    return m;
}

Dataset load_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty dataset");
    Dataset ds;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::vector<double> row;
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() < 2) throw std::runtime_error(path + ": row needs features and a target");
        ds.targets.push_back(row.back());
        row.pop_back();
        ds.features.push_back(std::move(row));
    }
    if (ds.features.empty()) throw std::runtime_error(path + ": no data rows");
    return ds;
}

void save_dataset_csv(const Dataset& dataset, const std::string& header, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << header << "\n";
    char buf[64];
    for (size_t i = 0; i < dataset.features.size(); ++i) {
        for (const double v : dataset.features[i]) {
            std::snprintf(buf, sizeof buf, "%.12g,", v);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "%.12g\n", dataset.targets[i]);
        out << buf;
    }
}

}  // namespace pancake
