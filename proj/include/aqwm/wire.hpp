#pragma once

#include <cstdint>
#include <vector>

#include "aqwm/signal.hpp"
#include "aqwm/watermark.hpp"

namespace aqwm {

// Device-to-cloud frame layout, little-endian throughout:
//   bytes 0..3   magic "AQWM"
//   byte  4      version (1)
//   bytes 5..8   device_id   (u32)
//   bytes 9..16  window_index (u64)
//   bytes 17..18 n   (u16)
//   bytes 19..20 n_s (u16)
//   bytes 21..24 sample rate in millihertz (u32)
//   bytes 25..   n*n_s IEEE-754 binary64 samples
// Total length: 25 + 8*n*n_s bytes.
inline constexpr std::size_t kWireHeaderBytes = 25;
inline constexpr std::uint8_t kWireVersion = 1;

struct DecodedFrame {
    SignalFrame frame;
    std::uint32_t device_id = 0;
    std::uint64_t window_index = 0;
    WatermarkParams params;  // n, n_s, sample rate echo; beta is not on the wire
};

std::vector<std::uint8_t> encode_frame(const SignalFrame& frame, std::uint32_t device_id,
                                       std::uint64_t window_index,
                                       const WatermarkParams& params);

// Exact inverse of encode_frame on valid input; throws CodecError naming the
// offending field otherwise.
DecodedFrame decode_frame(const std::vector<std::uint8_t>& bytes);

}  // namespace aqwm
