#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "aqwm/signal.hpp"

namespace aqwm {

// Shared pseudo-noise key: n chips, each exactly +1 or -1. The same key
// spreads every bit of a window.
struct PnKey {
    std::vector<int> chips;
    std::uint64_t seed = 0;

    int n() const { return static_cast<int>(chips.size()); }
};

// Hidden bit sequence, each bit +1 or -1.
struct BitStream {
    std::vector<int> bits;

    int size() const { return static_cast<int>(bits.size()); }
};

// The scheme's security/latency knobs. One embedding window spans
// n * n_s samples.
struct WatermarkParams {
    double beta = 0.0;  // watermark amplitude, signal units
    int n = 0;          // chips per bit
    int n_s = 0;        // bits per window
    double sample_rate_hz = 0.0;

    int window_samples() const { return n * n_s; }
    double window_seconds() const {
        return static_cast<double>(window_samples()) / sample_rate_hz;
    }
};

// Correlation statistic for one extracted bit, before and after sign
// thresholding. A zero-valued statistic resolves to +1.
struct SoftBit {
    double value = 0.0;
    int hard = +1;
};

void validate(const WatermarkParams& params);

// Fresh key with chips i.i.d. uniform over {+1,-1}; deterministic per seed.
PnKey gen_pn_key(int n, std::uint64_t seed);

// Stream of i.i.d. uniform {+1,-1} bits; used for static reference streams.
BitStream gen_bits(int n_s, std::uint64_t seed);

// w[i*n + t] = y[i*n + t] + beta * bits[i] * chips[t]. The frame must hold
// exactly one embedding window (length == key.n * bits.size()).
SignalFrame embed(const SignalFrame& frame, const PnKey& key, const BitStream& bits,
                  double beta);

// Per bit span, value = <w, p>_n / (beta * n); hard bit by sign.
std::vector<SoftBit> extract(const SignalFrame& frame, const PnKey& key, int n_s,
                             double beta);

std::vector<int> hard_bits(const std::vector<SoftBit>& soft);

// Closed-form extraction error of the legitimate receiver:
// 0.5 * erfc(beta * sqrt(n) / (sigma * sqrt(2))).
double theoretical_ber(double beta, double sigma, int n);

// Closed-form extraction error of an attacker correlating one watermarked
// window against another:
// 0.5 * erfc((1 + mu1/(beta^2 n^2)) * beta^2 n sqrt(n)
//            / sqrt(2 (sigma1^2 + 2 sigma^2))).
double attacker_ber(double beta, int n, const ProductStats& product, double sigma);

// Constraint placed on the attacker's extraction error by the planner.
//   strict:    attacker_ber >= 1 - p_under (taken verbatim; with mu1 >= 0
//              this is infeasible for p_under < 1/2 because the erfc
//              argument is non-negative).
//   confusion: attacker_ber >= 1/2 - p_under, i.e. the attacker does no
//              better than near-chance. Default.
enum class PlannerMode { strict, confusion };

// Search grid used by plan_params, exposed so tests and ports can replay
// the exact same scan: n in {2, ..., floor(delay_s * f_s)}, beta
// log-spaced over [sigma/100, 10*sigma] with kBetaGridPoints points.
inline constexpr int kBetaGridPoints = 181;

std::vector<double> planner_beta_grid(double sigma);

// Bits per window permitted by a detection-delay budget: floor(d * f_s / n).
int bits_per_window(double delay_s, double sample_rate_hz, int n);

// Smallest-n, then smallest-beta grid point satisfying both error
// constraints; throws InfeasibleError naming the binding constraint when
// the grid holds no feasible point.
WatermarkParams plan_params(double sigma, const ProductStats& product, double p_bar,
                            double p_under, double delay_s, double sample_rate_hz,
                            PlannerMode mode = PlannerMode::confusion);

}  // namespace aqwm
