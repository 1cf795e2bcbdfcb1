#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "aqwm/fingerprint.hpp"
#include "aqwm/signal.hpp"
#include "aqwm/watermark.hpp"

namespace aqwm {

// All trainable parameters of a single-layer LSTM with an affine output
// projection. Matrices are row-major; w_* are hidden x input, u_* are
// hidden x hidden, w_out is output x hidden.
struct LstmWeights {
    std::vector<double> w_i, u_i, b_i;
    std::vector<double> w_f, u_f, b_f;
    std::vector<double> w_g, u_g, b_g;
    std::vector<double> w_o, u_o, b_o;
    std::vector<double> w_out, b_out;

    void resize(int input_dim, int hidden_dim, int output_dim);
    void fill(double value);
};

// Fixed-order access to the weight vectors (enumeration order is part of
// the model file format and of the seeded initialization).
std::vector<std::vector<double>*> weight_views(LstmWeights& w);
std::vector<const std::vector<double>*> weight_views(const LstmWeights& w);

struct LstmModel {
    int input_dim = 0;
    int hidden_dim = 0;
    int output_dim = 0;
    LstmWeights weights;

    // Task-level affine transforms applied by device_encode/cloud_decode:
    // net input = (raw - input_offset) / input_scale, task output =
    // net output * output_scale + output_offset. Recorded in the model file.
    std::vector<double> input_scale, input_offset;
    std::vector<double> output_scale, output_offset;
};

// Fresh model with weights uniform in [-1/sqrt(hidden), +1/sqrt(hidden)]
// from the seeded generator and forget-gate bias 1.0.
LstmModel init_lstm(int input_dim, int hidden_dim, int output_dim, std::uint64_t seed);

void validate(const LstmModel& model);

// One training sequence, flat row-major: inputs is steps x input_dim,
// targets is steps x output_dim. weights (optional, same shape as targets)
// mask the squared-error terms; empty means all ones.
struct Sequence {
    int steps = 0;
    std::vector<double> inputs;
    std::vector<double> targets;
    std::vector<double> weights;
};

using Dataset = std::vector<Sequence>;

struct TrainConfig {
    int epochs = 1;
    double learning_rate = 0.01;
    std::uint64_t seed = 0;
    double gradient_clip = 1.0;  // global L2 norm; <= 0 disables clipping
};

struct TrainReport {
    std::vector<double> per_epoch_loss;
    double final_loss = 0.0;
    int epochs_run = 0;
};

// Standard LSTM recurrence (sigmoid gates, tanh candidate and cell output)
// from zero initial state, with the affine projection applied at every step.
std::vector<std::vector<double>> lstm_forward(
    const LstmModel& model, const std::vector<std::vector<double>>& inputs);

// Weighted mean-squared error of the model on the dataset.
double lstm_loss(const LstmModel& model, const Dataset& dataset);

// Maximum relative error between the analytic BPTT gradient and central
// finite differences, over every parameter. epsilon must lie in
// [1e-8, 1e-3].
double gradient_check(const LstmModel& model, const Sequence& sample, double epsilon);

// Full-batch gradient descent on MSE with global gradient-norm clipping.
// Per-epoch losses are evaluated before each update, so a model already at
// an optimum reports its loss unchanged. Throws TrainingDiverged when the
// loss leaves the realm of finite numbers.
TrainReport lstm_train(LstmModel& model, const Dataset& dataset, const TrainConfig& cfg);

// Device-side watermark encoder: per-step input (normalized sample, key
// chip cycled with period n), output interpreted as the watermarked frame.
SignalFrame device_encode(const LstmModel& model, const SignalFrame& y, const PnKey& key);

// Cloud-side decoder: bits are the signs of output channel 0 averaged over
// each n-chip span; features come from channels 1..5 at the final step.
std::pair<BitStream, FeatureVector> cloud_decode(const LstmModel& model,
                                                 const SignalFrame& w, const PnKey& key);

std::string model_to_json(const LstmModel& model);
LstmModel model_from_json(const std::string& text);
void save_model(const LstmModel& model, const std::string& path);
LstmModel load_model(const std::string& path);

}  // namespace aqwm
