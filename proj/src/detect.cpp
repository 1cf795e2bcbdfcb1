#include "aqwm/detect.hpp"

#include <nlohmann/json.hpp>

#include "aqwm/errors.hpp"

namespace aqwm {

double mismatch(const BitStream& expected, const BitStream& extracted) {
    if (expected.size() != extracted.size()) {
        throw ShapeError("mismatch: bit stream lengths differ");
    }
    if (expected.size() == 0) throw InvalidArgument("mismatch: empty bit streams");
    int diff = 0;
    for (std::size_t k = 0; k < expected.bits.size(); ++k) {
        if (expected.bits[k] != extracted.bits[k]) ++diff;
    }
    return static_cast<double>(diff) / static_cast<double>(expected.size());
}

DetectionReport alarm_from_mismatches(const std::vector<double>& mismatches,
                                      double threshold, double window_seconds) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw InvalidArgument("alarm threshold must lie in (0, 1)");
    }
    DetectionReport report;
    report.per_window_mismatch = mismatches;
    report.threshold = threshold;
    for (std::size_t i = 0; i < mismatches.size(); ++i) {
        if (mismatches[i] > threshold) {
            report.alarm_window = i;
            report.alarm_time_s = static_cast<double>(i + 1) * window_seconds;
            break;
        }
    }
    return report;
}

namespace {

void check_windows(const std::vector<SignalFrame>& stream, const WatermarkParams& params) {
    validate(params);
    const std::size_t want = static_cast<std::size_t>(params.window_samples());
    for (const SignalFrame& w : stream) {
        if (w.samples.size() != want) {
            throw ShapeError("verify: window length != n*n_s");
        }
    }
}

}  // namespace

DetectionReport static_verify(const std::vector<SignalFrame>& stream, const PnKey& key,
                              const WatermarkParams& params, const BitStream& s_ref,
                              double threshold) {
    check_windows(stream, params);
    if (key.n() != params.n) throw ShapeError("static_verify: key length != params.n");
    if (s_ref.size() != params.n_s) {
        throw ShapeError("static_verify: reference stream length != params.n_s");
    }
    std::vector<double> mismatches;
    mismatches.reserve(stream.size());
    for (const SignalFrame& w : stream) {
        const auto soft = extract(w, key, params.n_s, params.beta);
        BitStream got{hard_bits(soft)};
        mismatches.push_back(mismatch(s_ref, got));
    }
    return alarm_from_mismatches(mismatches, threshold, params.window_seconds());
}

SignalFrame strip_watermark(const SignalFrame& frame, const PnKey& key,
                            const BitStream& bits, double beta) {
    const int n = key.n();
    const int n_s = bits.size();
    const std::size_t want = static_cast<std::size_t>(n) * static_cast<std::size_t>(n_s);
    if (frame.samples.size() != want) {
        throw ShapeError("strip_watermark: frame length != n*n_s");
    }
    SignalFrame out;
    out.sample_rate_hz = frame.sample_rate_hz;
    out.samples.resize(want);
    for (int i = 0; i < n_s; ++i) {
        const double level = beta * bits.bits[static_cast<std::size_t>(i)];
        const std::size_t base = static_cast<std::size_t>(i) * static_cast<std::size_t>(n);
        for (int t = 0; t < n; ++t) {
            out.samples[base + t] =
                frame.samples[base + t] - level * key.chips[static_cast<std::size_t>(t)];
        }
    }
    return out;
}

DetectionReport dynamic_verify(const std::vector<SignalFrame>& stream, const PnKey& key,
                               const WatermarkParams& params,
                               const FeatureCalibration& calib, const LstmModel* decoder,
                               double threshold) {
    check_windows(stream, params);
    if (key.n() != params.n) throw ShapeError("dynamic_verify: key length != params.n");
    for (int k = 0; k < kFeatureCount; ++k) {
        if (calib.features[static_cast<std::size_t>(k)].thresholds.empty()) {
            throw InvalidArgument("dynamic_verify: calibration has no thresholds");
        }
    }
    std::vector<double> mismatches;
    mismatches.reserve(stream.size());
    for (const SignalFrame& w : stream) {
        BitStream got;
        if (decoder) {
            got = cloud_decode(*decoder, w, key).first;
        } else {
            got = BitStream{hard_bits(extract(w, key, params.n_s, params.beta))};
        }
        const SignalFrame restored = strip_watermark(w, key, got, params.beta);
        const BitStream expected = quantize(features(restored), calib, params.n_s);
        mismatches.push_back(mismatch(expected, got));
    }
    return alarm_from_mismatches(mismatches, threshold, params.window_seconds());
}

std::string report_to_json(const DetectionReport& report, const WatermarkParams& params) {
    nlohmann::ordered_json j;
    j["per_window_mismatch"] = report.per_window_mismatch;
    if (report.alarm_window.has_value()) {
        j["alarm_window"] = *report.alarm_window;
        j["alarm_time_s"] = *report.alarm_time_s;
    } else {
        j["alarm_window"] = nullptr;
        j["alarm_time_s"] = nullptr;
    }
    j["threshold"] = report.threshold;
    j["params"] = {{"beta", params.beta},
                   {"n", params.n},
                   {"n_s", params.n_s},
                   {"sample_rate_hz", params.sample_rate_hz}};
    return j.dump(2) + "\n";
}

}  // namespace aqwm
