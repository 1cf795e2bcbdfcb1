#pragma once

#include <cstdint>
#include <vector>

#include "aqwm/signal.hpp"
#include "aqwm/watermark.hpp"

namespace aqwm {

enum class AttackKind { injection, eavesdrop_forge };

struct AttackConfig {
    AttackKind kind = AttackKind::injection;
    std::size_t start_sample = 0;  // must be a multiple of n * n_s
    double injected_mean = 0.0;
    double injected_std = 0.0;
    int eavesdrop_windows = 1;  // m, windows summed before the forgery
    std::uint64_t seed = 0;
};

// Elementwise sum of m equal-length windows, as collected by a
// window-synchronized eavesdropper.
struct AccumulatedObservation {
    std::vector<double> sum_samples;
    int windows_summed = 0;  // m
};

// Replaces every window at or after start_sample with seeded Gaussian
// samples; earlier windows pass through untouched.
std::vector<SignalFrame> inject(const std::vector<SignalFrame>& stream,
                                const AttackConfig& cfg);

// aligned = true models an attacker with perfect window sync; with
// aligned = false each window is cyclically shifted by a seeded offset
// before summing (sync loss destroys the coherent key build-up).
AccumulatedObservation accumulate(const std::vector<SignalFrame>& windows, bool aligned);

// Attacker's key guess and the key-power-to-signal-power proxy measured on
// the accumulated observation.
//
// key_estimate[t] = sign of the per-chip column sum over the n_s bit spans
// (ties resolve to +1).
//
// power_ratio (the empirical m^2 beta^2 / sigma_m^2 proxy; exact recipe
// fixed here and in the fixtures):
//   1. split the accumulation into n_s spans of n chips;
//   2. align span signs against the first span: d_i = sign(<a_i, a_0>);
//   3. coherent profile q_t = mean_i d_i * a_i[t];
//   4. power_ratio = mean_t q_t^2 / mean residual power of (a_i - d_i q).
// Under a repeated bit stream the profile captures the m*beta key term and
// the ratio grows linearly in m; under per-window bit streams the spans do
// not align and the ratio stays near beta^2/sigma^2.
struct KeyEstimate {
    std::vector<int> chips;  // +1/-1, length n
    double power_ratio = 0.0;
};

KeyEstimate estimate_key(const AccumulatedObservation& acc, int n, int n_s);

// Attacker's per-span bit guess: sign of the correlation of each span with
// the estimated key (ties resolve to +1).
BitStream estimate_bits(const AccumulatedObservation& acc, const std::vector<int>& key_estimate,
                        int n, int n_s);

// Counterfeit frame: embeds bits_estimate into the cover with the estimated
// key via the usual spreading mechanics. beta = 0 returns the cover as-is.
SignalFrame forge(const SignalFrame& cover, const std::vector<int>& key_estimate,
                  const BitStream& bits_estimate, double beta);

}  // namespace aqwm
