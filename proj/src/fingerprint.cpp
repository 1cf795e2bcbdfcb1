#include "aqwm/fingerprint.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "aqwm/errors.hpp"

namespace aqwm {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kPowerFloor = 1e-30;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 FFT.
void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

}  // namespace

std::vector<double> half_power_spectrum(const std::vector<double>& samples) {
    const std::size_t n = samples.size();
    const std::size_t half = n / 2;
    std::vector<double> power(half);
    if (is_pow2(n)) {
        std::vector<std::complex<double>> a(n);
        for (std::size_t t = 0; t < n; ++t) a[t] = samples[t];
        fft_radix2(a);
        for (std::size_t k = 1; k <= half; ++k) power[k - 1] = std::norm(a[k]);
        return power;
    }
    // Direct DFT with a precomputed twiddle table; windows here are small.
    std::vector<std::complex<double>> tw(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double ang = -2.0 * kPi * static_cast<double>(j) / static_cast<double>(n);
        tw[j] = std::complex<double>(std::cos(ang), std::sin(ang));
    }
    for (std::size_t k = 1; k <= half; ++k) {
        std::complex<double> acc(0.0, 0.0);
        std::size_t idx = 0;
        for (std::size_t t = 0; t < n; ++t) {
            acc += samples[t] * tw[idx];
            idx += k;
            if (idx >= n) idx -= n;
        }
        power[k - 1] = std::norm(acc);
    }
    return power;
}

FeatureVector features(const SignalFrame& frame) {
    validate(frame);
    const std::size_t n = frame.samples.size();
    if (n < 8) throw InvalidArgument("features: frame must have at least 8 samples");

    double sum = 0.0;
    for (double s : frame.samples) sum += s;
    const double mean = sum / static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double s : frame.samples) {
        const double d = s - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);

    FeatureVector fv;
    fv.mean = mean;
    fv.variance = m2;
    if (m2 > 0.0) {
        const double sd = std::sqrt(m2);
        fv.skewness = m3 / (sd * sd * sd);
        fv.kurtosis = m4 / (m2 * m2);
    }

    const std::vector<double> power = half_power_spectrum(frame.samples);
    double arith = 0.0, log_geo = 0.0;
    for (double p : power) {
        arith += p;
        log_geo += std::log(std::max(p, kPowerFloor));
    }
    arith /= static_cast<double>(power.size());
    log_geo /= static_cast<double>(power.size());
    if (arith <= kPowerFloor) {
        fv.spectral_flatness = 0.0;
    } else {
        fv.spectral_flatness = std::clamp(std::exp(log_geo) / arith, 0.0, 1.0);
    }
    return fv;
}

namespace {

// Linear interpolation between order statistics (the numpy default).
double quantile(std::vector<double>& sorted_values, double q) {
    const std::size_t n = sorted_values.size();
    const double pos = q * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= n) return sorted_values[n - 1];
    return sorted_values[lo] * (1.0 - frac) + sorted_values[lo + 1] * frac;
}

}  // namespace

FeatureCalibration calibrate(const std::vector<SignalFrame>& frames,
                             int bits_per_feature) {
    if (frames.size() < 10) {
        throw InvalidArgument("calibrate: need at least 10 calibration frames");
    }
    if (bits_per_feature < 1) {
        throw InvalidArgument("calibrate: bits_per_feature must be >= 1");
    }
    std::array<std::vector<double>, kFeatureCount> values;
    for (auto& v : values) v.reserve(frames.size());
    for (const SignalFrame& f : frames) {
        const auto fa = features(f).as_array();
        for (int k = 0; k < kFeatureCount; ++k) values[static_cast<std::size_t>(k)].push_back(fa[static_cast<std::size_t>(k)]);
    }
    FeatureCalibration calib;
    calib.bits_per_feature = bits_per_feature;
    for (int k = 0; k < kFeatureCount; ++k) {
        auto& v = values[static_cast<std::size_t>(k)];
        std::sort(v.begin(), v.end());
        FeatureCalib fc;
        fc.center = quantile(v, 0.5);
        fc.spread = std::max(quantile(v, 0.75) - quantile(v, 0.25), 1e-9);
        fc.thresholds.resize(static_cast<std::size_t>(bits_per_feature));
        for (int j = 1; j <= bits_per_feature; ++j) {
            fc.thresholds[static_cast<std::size_t>(j - 1)] =
                quantile(v, static_cast<double>(j) / (bits_per_feature + 1));
        }
        calib.features[static_cast<std::size_t>(k)] = std::move(fc);
    }
    return calib;
}

BitStream quantize(const FeatureVector& fv, const FeatureCalibration& calib, int n_s) {
    if (n_s < 1) throw InvalidArgument("quantize: n_s must be >= 1");
    const auto fa = fv.as_array();
    std::vector<int> code;
    code.reserve(static_cast<std::size_t>(kFeatureCount * calib.bits_per_feature));
    for (int k = 0; k < kFeatureCount; ++k) {
        for (double th : calib.features[static_cast<std::size_t>(k)].thresholds) {
            code.push_back(fa[static_cast<std::size_t>(k)] > th ? +1 : -1);
        }
    }
    BitStream out;
    out.bits.resize(static_cast<std::size_t>(n_s));
    for (int i = 0; i < n_s; ++i) {
        out.bits[static_cast<std::size_t>(i)] = code[static_cast<std::size_t>(i) % code.size()];
    }
    return out;
}

std::string calibration_to_json(const FeatureCalibration& calib) {
    nlohmann::ordered_json j;
    j["format"] = "aqwm-calibration";
    j["version"] = 1;
    j["feature_order"] = nlohmann::json::array();
    for (const char* name : kFeatureNames) j["feature_order"].push_back(name);
    j["bits_per_feature"] = calib.bits_per_feature;
    j["features"] = nlohmann::ordered_json::array();
    for (int k = 0; k < kFeatureCount; ++k) {
        const FeatureCalib& fc = calib.features[static_cast<std::size_t>(k)];
        nlohmann::ordered_json e;
        e["name"] = kFeatureNames[k];
        e["center"] = fc.center;
        e["spread"] = fc.spread;
        e["thresholds"] = fc.thresholds;
        j["features"].push_back(e);
    }
    return j.dump(2) + "\n";
}

FeatureCalibration calibration_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("calibration: invalid JSON: ") + e.what(), 0);
    }
    if (j.value("format", "") != "aqwm-calibration") {
        throw ParseError("calibration: unexpected format field", 0);
    }
    if (j.value("version", 0) != 1) {
        throw ParseError("calibration: unsupported version", 0);
    }
    FeatureCalibration calib;
    calib.bits_per_feature = j.at("bits_per_feature").get<int>();
    const auto& fs = j.at("features");
    if (fs.size() != kFeatureCount) {
        throw ParseError("calibration: expected 5 feature entries", 0);
    }
    for (int k = 0; k < kFeatureCount; ++k) {
        const auto& e = fs[static_cast<std::size_t>(k)];
        if (e.value("name", "") != kFeatureNames[k]) {
            throw ParseError("calibration: feature order mismatch", 0);
        }
        FeatureCalib fc;
        fc.center = e.at("center").get<double>();
        fc.spread = e.at("spread").get<double>();
        fc.thresholds = e.at("thresholds").get<std::vector<double>>();
        if (fc.thresholds.size() != static_cast<std::size_t>(calib.bits_per_feature)) {
            throw ParseError("calibration: threshold count mismatch", 0);
        }
        calib.features[static_cast<std::size_t>(k)] = std::move(fc);
    }
    return calib;
}

void save_calibration(const FeatureCalibration& calib, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("save_calibration: cannot write '" + path + "'");
    out << calibration_to_json(calib);
}

FeatureCalibration load_calibration(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_calibration: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return calibration_from_json(ss.str());
}

}  // namespace aqwm
