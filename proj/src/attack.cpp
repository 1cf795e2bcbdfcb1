#include "aqwm/attack.hpp"

#include <cmath>
#include <string>

#include "aqwm/errors.hpp"
#include "aqwm/rng.hpp"

namespace aqwm {

std::vector<SignalFrame> inject(const std::vector<SignalFrame>& stream,
                                const AttackConfig& cfg) {
    if (cfg.kind != AttackKind::injection) {
        throw InvalidArgument("inject: config kind must be injection");
    }
    if (cfg.injected_std < 0.0) {
        throw InvalidArgument("inject: injected_std must be non-negative");
    }
    if (stream.empty()) return {};
    const std::size_t window_len = stream.front().samples.size();
    for (const SignalFrame& w : stream) {
        if (w.samples.size() != window_len) {
            throw InvalidArgument("inject: all windows must have equal length");
        }
    }
    if (cfg.start_sample % window_len != 0) {
        throw InvalidArgument("inject: start_sample must be a multiple of the window length");
    }
    const std::size_t first_window = cfg.start_sample / window_len;
    std::vector<SignalFrame> out = stream;
    for (std::size_t i = first_window; i < out.size(); ++i) {
        out[i] = gen_gaussian(cfg.injected_mean, cfg.injected_std, window_len,
                              stream[i].sample_rate_hz, derive_seed(cfg.seed, i));
    }
    return out;
}

AccumulatedObservation accumulate(const std::vector<SignalFrame>& windows, bool aligned) {
    if (windows.empty()) throw InvalidArgument("accumulate: need at least one window");
    const std::size_t len = windows.front().samples.size();
    for (const SignalFrame& w : windows) {
        if (w.samples.size() != len) {
            throw ShapeError("accumulate: window length mismatch");
        }
    }
    AccumulatedObservation acc;
    acc.sum_samples.assign(len, 0.0);
    acc.windows_summed = static_cast<int>(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        std::size_t shift = 0;
        if (!aligned && i > 0) {
            shift = static_cast<std::size_t>(derive_seed(0, i) % len);
        }
        const auto& s = windows[i].samples;
        for (std::size_t t = 0; t < len; ++t) {
            acc.sum_samples[t] += s[(t + shift) % len];
        }
    }
    return acc;
}

KeyEstimate estimate_key(const AccumulatedObservation& acc, int n, int n_s) {
    if (n < 2 || n_s < 1) throw InvalidArgument("estimate_key: need n >= 2, n_s >= 1");
    const std::size_t want = static_cast<std::size_t>(n) * static_cast<std::size_t>(n_s);
    if (acc.sum_samples.size() != want) {
        throw ShapeError("estimate_key: accumulation length != n*n_s");
    }
    KeyEstimate est;
    est.chips.resize(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        double col = 0.0;
        for (int i = 0; i < n_s; ++i) {
            col += acc.sum_samples[static_cast<std::size_t>(i) * n + t];
        }
        est.chips[static_cast<std::size_t>(t)] = col < 0.0 ? -1 : +1;
    }

    // Sign-align the spans against the estimated key, average them into a
    // coherent per-chip profile, and compare the profile power (minus its
    // own noise floor) with the residual power. A repeated bit stream makes
    // every span reinforce the m*beta key term, so the ratio tracks
    // m * beta^2 / sigma^2; per-window bit streams leave the spans
    // incoherent and the ratio stays at the single-window level.
    std::vector<double> sign(static_cast<std::size_t>(n_s), 1.0);
    for (int i = 0; i < n_s; ++i) {
        const double* ai = acc.sum_samples.data() + static_cast<std::size_t>(i) * n;
        double dot = 0.0;
        for (int t = 0; t < n; ++t) dot += ai[t] * est.chips[static_cast<std::size_t>(t)];
        sign[static_cast<std::size_t>(i)] = dot < 0.0 ? -1.0 : 1.0;
    }
    std::vector<double> profile(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n_s; ++i) {
        const double* ai = acc.sum_samples.data() + static_cast<std::size_t>(i) * n;
        for (int t = 0; t < n; ++t) profile[static_cast<std::size_t>(t)] += sign[static_cast<std::size_t>(i)] * ai[t];
    }
    for (double& q : profile) q /= static_cast<double>(n_s);
    double profile_power = 0.0;
    for (double q : profile) profile_power += q * q;
    profile_power /= static_cast<double>(n);
    double resid = 0.0;
    for (int i = 0; i < n_s; ++i) {
        const double* ai = acc.sum_samples.data() + static_cast<std::size_t>(i) * n;
        for (int t = 0; t < n; ++t) {
            const double d = ai[t] - sign[static_cast<std::size_t>(i)] * profile[static_cast<std::size_t>(t)];
            resid += d * d;
        }
    }
    resid /= static_cast<double>(want);
    // Averaging n_s spans leaves resid/n_s of noise power in the profile.
    const double key_power = std::max(profile_power - resid / static_cast<double>(n_s), 0.0);
    est.power_ratio = key_power / std::max(resid, 1e-30);
    return est;
}

BitStream estimate_bits(const AccumulatedObservation& acc, const std::vector<int>& key_estimate,
                        int n, int n_s) {
    if (static_cast<int>(key_estimate.size()) != n) {
        throw ShapeError("estimate_bits: key estimate length != n");
    }
    const std::size_t want = static_cast<std::size_t>(n) * static_cast<std::size_t>(n_s);
    if (acc.sum_samples.size() != want) {
        throw ShapeError("estimate_bits: accumulation length != n*n_s");
    }
    BitStream bits;
    bits.bits.resize(static_cast<std::size_t>(n_s));
    for (int i = 0; i < n_s; ++i) {
        double corr = 0.0;
        for (int t = 0; t < n; ++t) {
            corr += acc.sum_samples[static_cast<std::size_t>(i) * n + t] *
                    key_estimate[static_cast<std::size_t>(t)];
        }
        bits.bits[static_cast<std::size_t>(i)] = corr < 0.0 ? -1 : +1;
    }
    return bits;
}

SignalFrame forge(const SignalFrame& cover, const std::vector<int>& key_estimate,
                  const BitStream& bits_estimate, double beta) {
    validate(cover);
    if (beta < 0.0) throw InvalidArgument("forge: beta must be non-negative");
    const int n = static_cast<int>(key_estimate.size());
    const int n_s = bits_estimate.size();
    if (n < 2 || n_s < 1) throw ShapeError("forge: need n >= 2 and n_s >= 1");
    const std::size_t want = static_cast<std::size_t>(n) * static_cast<std::size_t>(n_s);
    if (cover.samples.size() != want) {
        throw ShapeError("forge: cover length " + std::to_string(cover.samples.size()) +
                         " != n*n_s = " + std::to_string(want));
    }
    SignalFrame out;
    out.sample_rate_hz = cover.sample_rate_hz;
    out.samples.resize(want);
    for (int i = 0; i < n_s; ++i) {
        const double level = beta * bits_estimate.bits[static_cast<std::size_t>(i)];
        const std::size_t base = static_cast<std::size_t>(i) * static_cast<std::size_t>(n);
        for (int t = 0; t < n; ++t) {
            out.samples[base + t] =
                cover.samples[base + t] + level * key_estimate[static_cast<std::size_t>(t)];
        }
    }
    return out;
}

}  // namespace aqwm
