#include "aqwm/watermark.hpp"

#include <cmath>
#include <string>

#include "aqwm/errors.hpp"
#include "aqwm/rng.hpp"

namespace aqwm {

void validate(const WatermarkParams& params) {
    if (!(params.beta > 0.0)) throw InvalidArgument("params: beta must be positive");
    if (params.n < 2) throw InvalidArgument("params: n must be >= 2");
    if (params.n_s < 1) throw InvalidArgument("params: n_s must be >= 1");
    if (!(params.sample_rate_hz > 0.0)) {
        throw InvalidArgument("params: sample rate must be positive");
    }
}

PnKey gen_pn_key(int n, std::uint64_t seed) {
    if (n < 2) throw InvalidArgument("gen_pn_key: n must be >= 2");
    PnKey key;
    key.seed = seed;
    key.chips.resize(static_cast<std::size_t>(n));
    SplitMix64 g(seed);
    for (int& c : key.chips) c = g.chip();
    return key;
}

BitStream gen_bits(int n_s, std::uint64_t seed) {
    if (n_s < 1) throw InvalidArgument("gen_bits: n_s must be >= 1");
    BitStream s;
    s.bits.resize(static_cast<std::size_t>(n_s));
    SplitMix64 g(seed);
    for (int& b : s.bits) b = g.chip();
    return s;
}

SignalFrame embed(const SignalFrame& frame, const PnKey& key, const BitStream& bits,
                  double beta) {
    if (!(beta > 0.0)) throw InvalidArgument("embed: beta must be positive");
    const int n = key.n();
    const int n_s = bits.size();
    if (n < 2) throw InvalidArgument("embed: key must have >= 2 chips");
    if (n_s < 1) throw InvalidArgument("embed: bit stream must be non-empty");
    const std::size_t want = static_cast<std::size_t>(n) * static_cast<std::size_t>(n_s);
    if (frame.samples.size() != want) {
        throw ShapeError("embed: frame length " + std::to_string(frame.samples.size()) +
                         " != n*n_s = " + std::to_string(want));
    }
    SignalFrame out;
    out.sample_rate_hz = frame.sample_rate_hz;
    out.samples.resize(want);
    for (int i = 0; i < n_s; ++i) {
        const double level = beta * bits.bits[static_cast<std::size_t>(i)];
        const std::size_t base = static_cast<std::size_t>(i) * static_cast<std::size_t>(n);
        for (int t = 0; t < n; ++t) {
            out.samples[base + t] =
                frame.samples[base + t] + level * key.chips[static_cast<std::size_t>(t)];
        }
    }
    return out;
}

std::vector<SoftBit> extract(const SignalFrame& frame, const PnKey& key, int n_s,
                             double beta) {
    if (!(beta > 0.0)) throw InvalidArgument("extract: beta must be positive");
    if (n_s < 1) throw InvalidArgument("extract: n_s must be >= 1");
    const int n = key.n();
    const std::size_t want = static_cast<std::size_t>(n) * static_cast<std::size_t>(n_s);
    if (frame.samples.size() != want) {
        throw ShapeError("extract: frame length " + std::to_string(frame.samples.size()) +
                         " != n*n_s = " + std::to_string(want));
    }
    std::vector<SoftBit> soft(static_cast<std::size_t>(n_s));
    const double scale = 1.0 / (beta * static_cast<double>(n));
    for (int i = 0; i < n_s; ++i) {
        const std::size_t base = static_cast<std::size_t>(i) * static_cast<std::size_t>(n);
        double corr = 0.0;
        for (int t = 0; t < n; ++t) {
            corr += frame.samples[base + t] * key.chips[static_cast<std::size_t>(t)];
        }
        const double value = corr * scale;
        soft[static_cast<std::size_t>(i)] = SoftBit{value, value < 0.0 ? -1 : +1};
    }
    return soft;
}

std::vector<int> hard_bits(const std::vector<SoftBit>& soft) {
    std::vector<int> bits;
    bits.reserve(soft.size());
    for (const SoftBit& s : soft) bits.push_back(s.hard);
    return bits;
}

double theoretical_ber(double beta, double sigma, int n) {
    if (!(sigma > 0.0)) throw InvalidArgument("theoretical_ber: sigma must be positive");
    if (!(beta > 0.0)) throw InvalidArgument("theoretical_ber: beta must be positive");
    if (n < 1) throw InvalidArgument("theoretical_ber: n must be >= 1");
    const double arg = beta * std::sqrt(static_cast<double>(n)) / (sigma * std::sqrt(2.0));
    return 0.5 * std::erfc(arg);
}

double attacker_ber(double beta, int n, const ProductStats& product, double sigma) {
    if (n < 1) throw InvalidArgument("attacker_ber: n must be >= 1");
    if (!(beta > 0.0)) throw InvalidArgument("attacker_ber: beta must be positive");
    if (!(sigma > 0.0)) throw InvalidArgument("attacker_ber: sigma must be positive");
    if (product.variance < 0.0) {
        throw InvalidArgument("attacker_ber: product variance must be non-negative");
    }
    const double nn = static_cast<double>(n);
    const double b2n2 = beta * beta * nn * nn;
    const double numer = (1.0 + product.mean / b2n2) * beta * beta * nn * std::sqrt(nn);
    const double denom = std::sqrt(2.0 * (product.variance + 2.0 * sigma * sigma));
    if (!(denom > 0.0)) {
        throw InvalidArgument("attacker_ber: sigma1^2 + 2*sigma^2 must be positive");
    }
    return 0.5 * std::erfc(numer / denom);
}

std::vector<double> planner_beta_grid(double sigma) {
    if (!(sigma > 0.0)) throw InvalidArgument("planner_beta_grid: sigma must be positive");
    std::vector<double> grid(kBetaGridPoints);
    const double lo = std::log(sigma / 100.0);
    const double hi = std::log(10.0 * sigma);
    for (int i = 0; i < kBetaGridPoints; ++i) {
        const double u = static_cast<double>(i) / (kBetaGridPoints - 1);
        grid[static_cast<std::size_t>(i)] = std::exp(lo + u * (hi - lo));
    }
    return grid;
}

int bits_per_window(double delay_s, double sample_rate_hz, int n) {
    if (!(delay_s > 0.0)) throw InvalidArgument("bits_per_window: delay must be positive");
    if (!(sample_rate_hz > 0.0)) {
        throw InvalidArgument("bits_per_window: sample rate must be positive");
    }
    if (n < 1) throw InvalidArgument("bits_per_window: n must be >= 1");
    return static_cast<int>(std::floor(delay_s * sample_rate_hz / static_cast<double>(n)));
}

WatermarkParams plan_params(double sigma, const ProductStats& product, double p_bar,
                            double p_under, double delay_s, double sample_rate_hz,
                            PlannerMode mode) {
    if (!(sigma > 0.0)) throw InvalidArgument("plan_params: sigma must be positive");
    if (!(p_bar > 0.0 && p_bar < 0.5)) {
        throw InvalidArgument("plan_params: p_bar must lie in (0, 0.5)");
    }
    if (!(p_under > 0.0 && p_under < 1.0)) {
        throw InvalidArgument("plan_params: p_under must lie in (0, 1)");
    }
    if (!(delay_s > 0.0) || !(sample_rate_hz > 0.0)) {
        throw InvalidArgument("plan_params: delay and sample rate must be positive");
    }
    if (delay_s * sample_rate_hz < 4.0) {
        throw InvalidArgument("plan_params: delay * sample_rate must be >= 4");
    }

    const int n_max = static_cast<int>(std::floor(delay_s * sample_rate_hz));
    const std::vector<double> betas = planner_beta_grid(sigma);
    const double attacker_floor = (mode == PlannerMode::strict) ? 1.0 - p_under
                                                                : 0.5 - p_under;

    bool any_extraction_ok = false;
    bool any_attacker_ok = false;
    for (int n = 2; n <= n_max; ++n) {
        for (double beta : betas) {
            const bool extraction_ok = theoretical_ber(beta, sigma, n) <= p_bar;
            const bool attacker_ok = attacker_ber(beta, n, product, sigma) >= attacker_floor;
            any_extraction_ok = any_extraction_ok || extraction_ok;
            any_attacker_ok = any_attacker_ok || attacker_ok;
            if (extraction_ok && attacker_ok) {
                const int n_s = bits_per_window(delay_s, sample_rate_hz, n);
                if (n_s < 1) {
                    throw InfeasibleError(
                        "plan_params: delay budget leaves no room for a bit stream",
                        "window_budget");
                }
                WatermarkParams params{beta, n, n_s, sample_rate_hz};
                validate(params);
                return params;
            }
        }
    }

    std::string binding;
    if (!any_extraction_ok) {
        binding = "extraction_error";
    } else if (!any_attacker_ok) {
        binding = "attacker_error";
    } else {
        binding = "joint";
    }
    throw InfeasibleError(
        "plan_params: no feasible (beta, n) on the search grid; binding constraint: " +
            binding,
        binding);
}

}  // namespace aqwm
