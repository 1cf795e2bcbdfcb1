#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aqwm/attack.hpp"
#include "aqwm/detect.hpp"
#include "aqwm/fingerprint.hpp"
#include "aqwm/lstm.hpp"
#include "aqwm/signal.hpp"
#include "aqwm/watermark.hpp"

namespace aqwm {

enum class ScenarioMode { static_scheme, dynamic_oracle, dynamic_lstm };

struct SourceConfig {
    enum class Kind { synthetic, csv, regime };
    Kind kind = Kind::synthetic;
    double mean = 0.0;     // synthetic
    double std_dev = 1.0;  // synthetic
    std::uint64_t seed = 0;
    std::string path;  // csv
};

// Named substreams of a source so that calibration, the transmitted stream,
// the eavesdropper's recording phase and the forger's covers never share
// samples.
enum class SourceChannel : std::uint64_t {
    stream = 0,
    calibration = 1,
    eavesdrop = 2,
    cover = 3,
};

// One window of the source. CSV sources are consecutive slices of the file
// on every channel (recorded history doubles as calibration data); seeded
// sources derive an independent substream per (channel, index).
SignalFrame source_window(const SourceConfig& src, SourceChannel channel,
                          std::size_t index, std::size_t window_len,
                          double sample_rate_hz);

struct Scenario {
    ScenarioMode mode = ScenarioMode::static_scheme;
    WatermarkParams params;
    SourceConfig source;
    std::optional<AttackConfig> attack;
    double duration_s = 1.0;
    double threshold = 0.25;
    std::uint64_t key_seed = 0;
    std::uint32_t device_id = 1;
    std::string calibration_path;    // empty = auto-calibrate from the source
    std::string encoder_model_path;  // dynamic_lstm only
    std::string decoder_model_path;  // optional; empty = correlation extraction
    bool use_wire = true;            // run every window through the frame codec
};

struct BerPoint {
    double beta_over_sigma = 0.0;
    int n = 0;
    double empirical_ber = 0.0;
    double theoretical = 0.0;
};

struct MetricsBundle {
    std::vector<BerPoint> ber_points;
    DetectionReport detection;
    WatermarkParams params;
    std::vector<std::pair<int, double>> power_ratio_curve;  // (m, ratio)
    double runtime_s = 0.0;
};

// Number of calibration windows drawn when no calibration file is given.
inline constexpr int kAutoCalibrationWindows = 64;

// Reference bit stream of a static scenario, derived from the key seed.
BitStream static_reference_bits(std::uint64_t key_seed, int n_s);

// Runs the full device -> wire -> cloud pipeline and returns the metrics.
MetricsBundle run_scenario(const Scenario& scenario);

// Monte Carlo bit-error sweep against the closed-form curve, one seeded
// substream per grid point. sigma is fixed at 1; beta carries the ratio.
MetricsBundle ber_sweep(const std::vector<int>& n_values,
                        const std::vector<double>& beta_over_sigma_values, int trials,
                        std::uint64_t seed);

std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const std::string& text);
Scenario load_scenario(const std::string& path);

std::string metrics_to_json(const MetricsBundle& metrics, bool include_runtime = true);
std::string ber_points_to_csv(const std::vector<BerPoint>& points);

// ---- LSTM task fixtures -------------------------------------------------
//
// Everything the device and cloud share for one deployment: key, quantizer
// calibration, watermark knobs, and the normalization the models record.
struct TaskFixture {
    PnKey key;
    FeatureCalibration calib;
    WatermarkParams params;
    double source_mean = 0.0;  // input normalization, recorded in the model
    double source_std = 1.0;
};

// Builds the fixture by calibrating on kAutoCalibrationWindows windows of
// the source (channel = calibration).
TaskFixture make_task_fixture(const SourceConfig& src, const WatermarkParams& params,
                              std::uint64_t key_seed);

// Oracle window: fingerprint-derived bits embedded into the carrier.
std::pair<SignalFrame, BitStream> oracle_watermark(const SignalFrame& y,
                                                   const TaskFixture& fixture);

// Normalized training sequences for the two tasks. Encoder: per-step input
// (sample, chip), target = watermarked sample. Decoder: per-step input
// (watermarked sample, chip), channel 0 target = current span's bit,
// channels 1..5 target = window features, loss-masked to the final span.
Dataset make_encoder_dataset(const SourceConfig& src, const TaskFixture& fixture,
                             int window_count, std::uint64_t index_offset);
Dataset make_decoder_dataset(const SourceConfig& src, const TaskFixture& fixture,
                             int window_count, std::uint64_t index_offset);

// Seeds a model with the fixture's normalization constants baked in.
LstmModel init_encoder_model(const TaskFixture& fixture, int hidden_dim,
                             std::uint64_t seed);
LstmModel init_decoder_model(const TaskFixture& fixture, int hidden_dim,
                             std::uint64_t seed);

// Staged full-batch training used by the CLI and the fixtures; returns the
// concatenated report.
TrainReport train_device_encoder(LstmModel& model, const SourceConfig& src,
                                 const TaskFixture& fixture, int window_count,
                                 int epochs, std::uint64_t seed);
TrainReport train_cloud_decoder(LstmModel& model, const SourceConfig& src,
                                const TaskFixture& fixture, int window_count,
                                int epochs, std::uint64_t seed);

}  // namespace aqwm
