#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aqwm/fingerprint.hpp"
#include "aqwm/lstm.hpp"
#include "aqwm/signal.hpp"
#include "aqwm/watermark.hpp"

namespace aqwm {

// Cloud-side verification outcome. The alarm fires on the first window
// whose mismatch exceeds the threshold; alarm_time_s counts full windows,
// so an attack starting at a window boundary is flagged one window later.
struct DetectionReport {
    std::vector<double> per_window_mismatch;
    std::optional<std::size_t> alarm_window;
    std::optional<double> alarm_time_s;
    double threshold = 0.0;
};

// Fraction of positions where the two streams disagree.
double mismatch(const BitStream& expected, const BitStream& extracted);

// Builds the report from per-window mismatch fractions; the shared alarm
// rule for both schemes.
DetectionReport alarm_from_mismatches(const std::vector<double>& mismatches,
                                      double threshold, double window_seconds);

// Static scheme: every window should carry s_ref; extract and compare.
DetectionReport static_verify(const std::vector<SignalFrame>& stream, const PnKey& key,
                              const WatermarkParams& params, const BitStream& s_ref,
                              double threshold);

// Dynamic scheme: extracted bits come from the LSTM decoder when one is
// supplied, otherwise from correlation. The expected stream is recomputed
// by re-fingerprinting the received window after stripping the
// reconstructed watermark (the cloud knows the key and the bits it just
// extracted, so on a clean window the strip restores the original carrier
// exactly; on an attacked window it restores nothing useful and the
// comparison collapses to chance).
DetectionReport dynamic_verify(const std::vector<SignalFrame>& stream, const PnKey& key,
                               const WatermarkParams& params,
                               const FeatureCalibration& calib, const LstmModel* decoder,
                               double threshold);

// The strip step used by dynamic_verify, exposed for tests: subtracts
// beta * bits[i] * chips[t] from each span.
SignalFrame strip_watermark(const SignalFrame& frame, const PnKey& key,
                            const BitStream& bits, double beta);

std::string report_to_json(const DetectionReport& report, const WatermarkParams& params);

}  // namespace aqwm
