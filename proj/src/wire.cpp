#include "aqwm/wire.hpp"

#include <cmath>
#include <cstring>

#include "aqwm/errors.hpp"

namespace aqwm {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const SignalFrame& frame, std::uint32_t device_id,
                                       std::uint64_t window_index,
                                       const WatermarkParams& params) {
    validate(params);
    const std::size_t want =
        static_cast<std::size_t>(params.n) * static_cast<std::size_t>(params.n_s);
    if (frame.samples.size() != want) {
        throw ShapeError("encode_frame: frame length != n*n_s");
    }
    if (params.n > 0xffff || params.n_s > 0xffff) {
        throw InvalidArgument("encode_frame: n and n_s must fit in 16 bits");
    }
    const double millihz = std::round(params.sample_rate_hz * 1000.0);
    if (!(millihz >= 1.0) || millihz > 4294967295.0) {
        throw InvalidArgument("encode_frame: sample rate out of wire range");
    }

    std::vector<std::uint8_t> out;
    out.reserve(kWireHeaderBytes + 8 * want);
    out.push_back('A');
    out.push_back('Q');
    out.push_back('W');
    out.push_back('M');
    out.push_back(kWireVersion);
    put_u32(out, device_id);
    put_u64(out, window_index);
    put_u16(out, static_cast<std::uint16_t>(params.n));
    put_u16(out, static_cast<std::uint16_t>(params.n_s));
    put_u32(out, static_cast<std::uint32_t>(millihz));
    for (double s : frame.samples) {
        std::uint64_t bits = 0;
        static_assert(sizeof(bits) == sizeof(s));
        std::memcpy(&bits, &s, sizeof(bits));
        put_u64(out, bits);
    }
    return out;
}

DecodedFrame decode_frame(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < kWireHeaderBytes) {
        throw CodecError("decode_frame: short header", "header");
    }
    if (bytes[0] != 'A' || bytes[1] != 'Q' || bytes[2] != 'W' || bytes[3] != 'M') {
        throw CodecError("decode_frame: bad magic", "magic");
    }
    if (bytes[4] != kWireVersion) {
        throw CodecError("decode_frame: unsupported version " + std::to_string(bytes[4]),
                         "version");
    }
    DecodedFrame out;
    out.device_id = get_u32(bytes.data() + 5);
    out.window_index = get_u64(bytes.data() + 9);
    const std::uint16_t n = get_u16(bytes.data() + 17);
    const std::uint16_t n_s = get_u16(bytes.data() + 19);
    const std::uint32_t millihz = get_u32(bytes.data() + 21);
    if (n < 2) throw CodecError("decode_frame: n out of range", "n");
    if (n_s < 1) throw CodecError("decode_frame: n_s out of range", "n_s");
    if (millihz == 0) throw CodecError("decode_frame: zero sample rate", "f_s_millihz");
    const std::size_t count = static_cast<std::size_t>(n) * static_cast<std::size_t>(n_s);
    if (bytes.size() != kWireHeaderBytes + 8 * count) {
        throw CodecError("decode_frame: payload length inconsistent with n*n_s", "payload");
    }
    out.params.n = n;
    out.params.n_s = n_s;
    out.params.sample_rate_hz = static_cast<double>(millihz) / 1000.0;
    out.params.beta = 1.0;  // not transmitted; placeholder keeps the echo valid
    out.frame.sample_rate_hz = out.params.sample_rate_hz;
    out.frame.samples.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        const std::uint64_t bits = get_u64(bytes.data() + kWireHeaderBytes + 8 * k);
        double s = 0.0;
        std::memcpy(&s, &bits, sizeof(s));
        out.frame.samples[k] = s;
    }
    return out;
}

}  // namespace aqwm
