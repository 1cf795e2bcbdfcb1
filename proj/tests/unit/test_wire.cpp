#include "aqwm/errors.hpp"
#include "aqwm/rng.hpp"
#include "aqwm/signal.hpp"
#include "aqwm/wire.hpp"
#include "doctest.h"

using namespace aqwm;

TEST_CASE("wire layout of the minimal frame") {
    const WatermarkParams params{1.0, 2, 1, 1000.0};
    SignalFrame frame{{0.0, 0.0}, 1000.0};
    const auto bytes = encode_frame(frame, 7, 3, params);
    REQUIRE(bytes.size() == 41);  // 25-byte header + 2 doubles
    CHECK(bytes[0] == 'A');
    CHECK(bytes[1] == 'Q');
    CHECK(bytes[2] == 'W');
    CHECK(bytes[3] == 'M');
    CHECK(bytes[4] == 1);  // version
    CHECK(bytes[5] == 7);  // device id, little-endian
    CHECK(bytes[9] == 3);  // window index
    CHECK(bytes[17] == 2);  // n
    CHECK(bytes[19] == 1);  // n_s
    // 1 kHz = 1,000,000 millihertz = 0x000F4240
    CHECK(bytes[21] == 0x40);
    CHECK(bytes[22] == 0x42);
    CHECK(bytes[23] == 0x0F);
    CHECK(bytes[24] == 0x00);
    for (std::size_t i = 25; i < 41; ++i) CHECK(bytes[i] == 0);

    const DecodedFrame back = decode_frame(bytes);
    CHECK(back.frame.samples == frame.samples);
    CHECK(back.device_id == 7);
    CHECK(back.window_index == 3);
    CHECK(back.params.n == 2);
    CHECK(back.params.n_s == 1);
    CHECK(back.params.sample_rate_hz == doctest::Approx(1000.0));
}

TEST_CASE("round-trip is bit exact over randomized frames") {
    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        SplitMix64 rng(derive_seed(1000, trial));
        const int n = 2 + static_cast<int>(rng.next() % 30);
        const int n_s = 1 + static_cast<int>(rng.next() % 10);
        const double fs = 1.0 + static_cast<double>(rng.next() % 48000);
        const WatermarkParams params{0.5, n, n_s, fs};
        const SignalFrame f = gen_gaussian(0.0, 3.0, static_cast<std::size_t>(n * n_s),
                                           fs, derive_seed(2000, trial));
        const auto dev = static_cast<std::uint32_t>(rng.next());
        const auto idx = rng.next();
        const DecodedFrame back = decode_frame(encode_frame(f, dev, idx, params));
        CHECK(back.frame.samples == f.samples);  // bitwise, not approx
        CHECK(back.device_id == dev);
        CHECK(back.window_index == idx);
        CHECK(back.params.n == n);
        CHECK(back.params.n_s == n_s);
    }
}

TEST_CASE("decode rejects malformed frames with the offending field") {
    const WatermarkParams params{1.0, 2, 1, 1000.0};
    SignalFrame frame{{1.5, -2.5}, 1000.0};
    const auto good = encode_frame(frame, 1, 1, params);

    auto expect_field = [](std::vector<std::uint8_t> bytes, const std::string& field) {
        try {
            decode_frame(bytes);
            FAIL("expected CodecError for field ", field);
        } catch (const CodecError& e) {
            CHECK(e.field() == field);
        }
    };

    std::vector<std::uint8_t> short_buf(good.begin(), good.begin() + 24);
    expect_field(short_buf, "header");

    auto bad_magic = good;
    bad_magic[0] = 'X';
    expect_field(bad_magic, "magic");

    auto bad_version = good;
    bad_version[4] = 2;
    expect_field(bad_version, "version");

    auto truncated = good;
    truncated.pop_back();
    expect_field(truncated, "payload");

    auto zero_n = good;
    zero_n[17] = 0;
    zero_n[18] = 0;
    expect_field(zero_n, "n");

    auto zero_rate = good;
    zero_rate[21] = zero_rate[22] = zero_rate[23] = zero_rate[24] = 0;
    expect_field(zero_rate, "f_s_millihz");
}

TEST_CASE("encode validates its inputs") {
    const WatermarkParams params{1.0, 2, 1, 1000.0};
    SignalFrame wrong_len{{1.0, 2.0, 3.0}, 1000.0};
    CHECK_THROWS_AS(encode_frame(wrong_len, 1, 1, params), ShapeError);
    const WatermarkParams huge{1.0, 70000, 1, 1000.0};
    SignalFrame frame{std::vector<double>(70000, 0.0), 1000.0};
    CHECK_THROWS_AS(encode_frame(frame, 1, 1, huge), InvalidArgument);
}
