#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pancake {

struct TrainConfig {
    int epochs = 1000;
    double learning_rate = 0.06;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
};

// Small dense regressor: tanh hidden layers, identity output, trained
// full-batch with Adam on z-scored inputs and targets.
struct MlpModel {
    std::vector<int> layer_sizes{2, 32, 64, 1};
    std::vector<std::vector<double>> weights;  // per layer, row-major out x in
    std::vector<std::vector<double>> biases;   // per layer

    std::vector<double> in_mean, in_std;  // per input feature
    double out_mean = 0.0, out_std = 1.0;
    std::vector<double> feat_lo, feat_hi;  // training range, for extrapolation warnings
    bool trained = false;
    TrainConfig config;  // settings of the last training run
};

struct Dataset {
    std::vector<std::vector<double>> features;  // n x d
    std::vector<double> targets;                // n
};

MlpModel make_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed);

// Forward pass on one raw (unnormalized) feature vector.
double mlp_forward(const MlpModel& model, const std::vector<double>& x);

// Full-batch MSE over normalized features/targets; used by training and by
// the finite-difference tests.
double mlp_loss(const MlpModel& model, const std::vector<std::vector<double>>& x_norm,
                const std::vector<double>& y_norm);

// Backpropagated gradients in the same layout as weights/biases.
struct MlpGradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

MlpGradients mlp_gradients(const MlpModel& model, const std::vector<std::vector<double>>& x_norm,
                           const std::vector<double>& y_norm);

// Trains in place and returns the per-epoch loss history (normalized MSE).
// Throws if the loss goes non-finite (learning-rate blowup).
std::vector<double> train(MlpModel& model, const Dataset& dataset, const TrainConfig& config);

void save_mlp(const MlpModel& model, const std::string& path);
MlpModel load_mlp(const std::string& path);

Dataset load_dataset_csv(const std::string& path);
void save_dataset_csv(const Dataset& dataset, const std::string& header, const std::string& path);

}  // namespace pancake
