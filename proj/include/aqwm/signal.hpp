#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace aqwm {

// A fixed-rate window of real-valued samples; the carrier everything else
// operates on. Immutable by convention once built.
struct SignalFrame {
    std::vector<double> samples;
    double sample_rate_hz = 0.0;
};

struct SignalStats {
    double mean = 0.0;
    double variance = 0.0;  // population variance (divide by count)
    std::size_t count = 0;
};

// Mean/variance of the elementwise product of two independent carriers,
// as needed by the attacker-side error analysis.
struct ProductStats {
    double mean = 0.0;      // mu_1
    double variance = 0.0;  // sigma_1^2
};

// Validates the SignalFrame invariants (non-empty, finite, positive rate),
// throwing InvalidArgument on violation.
void validate(const SignalFrame& frame);

// i.i.d. Gaussian samples from the seeded generator (see rng.hpp).
// Identical arguments give an identical frame; a longer frame extends a
// shorter one with the same seed.
SignalFrame gen_gaussian(double mean, double std_dev, std::size_t length,
                         double sample_rate_hz, std::uint64_t seed);

// Reads a single-column CSV: one decimal literal per row, optional header
// row (skipped when non-numeric), blank lines ignored.
SignalFrame load_csv(const std::string& path, double sample_rate_hz);

SignalStats stats(const SignalFrame& frame);

}  // namespace aqwm
