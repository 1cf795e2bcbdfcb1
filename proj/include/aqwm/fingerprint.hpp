#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "aqwm/signal.hpp"
#include "aqwm/watermark.hpp"

namespace aqwm {

// Stochastic fingerprint of one window. Feature order is fixed and
// versioned: flatness, mean, variance, skewness, kurtosis.
struct FeatureVector {
    double spectral_flatness = 0.0;  // in [0, 1]
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;  // m3 / sigma^3; 0 when variance is 0
    double kurtosis = 0.0;  // m4 / sigma^4 (not excess); 0 when variance is 0

    std::array<double, 5> as_array() const {
        return {spectral_flatness, mean, variance, skewness, kurtosis};
    }
};

inline constexpr int kFeatureCount = 5;
inline constexpr const char* kFeatureNames[kFeatureCount] = {
    "spectral_flatness", "mean", "variance", "skewness", "kurtosis"};

struct FeatureCalib {
    double center = 0.0;  // median over calibration frames
    double spread = 0.0;  // interquartile range, floored at 1e-9
    std::vector<double> thresholds;  // equiprobable quantile cut points
};

// Shared device/cloud quantizer state. Serializes to versioned JSON.
struct FeatureCalibration {
    int bits_per_feature = 1;
    std::array<FeatureCalib, kFeatureCount> features;
};

// Magnitude-squared DFT over positive-frequency bins (k = 1 .. N/2),
// DC excluded. Exposed for tests.
std::vector<double> half_power_spectrum(const std::vector<double>& samples);

// Window fingerprint. Requires at least 8 samples. Spectral flatness is the
// geometric over arithmetic mean of half_power_spectrum, bins floored at
// 1e-30 in the log domain; a window with (numerically) no off-DC energy
// reports flatness 0.
FeatureVector features(const SignalFrame& frame);

// Per-feature median/IQR plus equiprobable quantile thresholds from at
// least 10 calibration frames. Quantiles use linear interpolation between
// order statistics.
FeatureCalibration calibrate(const std::vector<SignalFrame>& frames,
                             int bits_per_feature);

// Threshold-compares each feature (bit +1 iff strictly above the cut
// point), concatenates in fixed feature order, then cyclically extends or
// truncates to exactly n_s bits.
BitStream quantize(const FeatureVector& fv, const FeatureCalibration& calib, int n_s);

std::string calibration_to_json(const FeatureCalibration& calib);
FeatureCalibration calibration_from_json(const std::string& text);
void save_calibration(const FeatureCalibration& calib, const std::string& path);
FeatureCalibration load_calibration(const std::string& path);

}  // namespace aqwm
