#include "aqwm/signal.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>

#include "aqwm/errors.hpp"
#include "aqwm/rng.hpp"

namespace aqwm {

void validate(const SignalFrame& frame) {
    if (frame.samples.empty()) {
        throw InvalidArgument("signal frame must contain at least one sample");
    }
    if (!(frame.sample_rate_hz > 0.0)) {
        throw InvalidArgument("sample rate must be positive");
    }
    for (double s : frame.samples) {
        if (!std::isfinite(s)) {
            throw InvalidArgument("signal frame contains a non-finite sample");
        }
    }
}

SignalFrame gen_gaussian(double mean, double std_dev, std::size_t length,
                         double sample_rate_hz, std::uint64_t seed) {
    if (length < 1) {
        throw InvalidArgument("gen_gaussian: length must be >= 1");
    }
    if (!(sample_rate_hz > 0.0)) {
        throw InvalidArgument("gen_gaussian: sample rate must be positive");
    }
    if (std_dev < 0.0) {
        throw InvalidArgument("gen_gaussian: std_dev must be non-negative");
    }
    SignalFrame frame;
    frame.sample_rate_hz = sample_rate_hz;
    frame.samples.resize(length);
    GaussianStream g(seed);
    for (std::size_t i = 0; i < length; ++i) {
        frame.samples[i] = mean + std_dev * g.next();
    }
    return frame;
}

namespace {

bool parse_double(const std::string& text, double& out) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

std::string trimmed(const std::string& line) {
    std::size_t b = 0, e = line.size();
    while (b < e && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(line[e - 1]))) --e;
    return line.substr(b, e - b);
}

}  // namespace

SignalFrame load_csv(const std::string& path, double sample_rate_hz) {
    if (!(sample_rate_hz > 0.0)) {
        throw InvalidArgument("load_csv: sample rate must be positive");
    }
    std::ifstream in(path);
    if (!in) {
        throw IoError("load_csv: cannot open '" + path + "'");
    }
    SignalFrame frame;
    frame.sample_rate_hz = sample_rate_hz;
    std::string line;
    long row = 0;
    bool first_content_row = true;
    while (std::getline(in, line)) {
        ++row;
        const std::string cell = trimmed(line);
        if (cell.empty()) continue;
        double value = 0.0;
        if (parse_double(cell, value)) {
            frame.samples.push_back(value);
            first_content_row = false;
        } else if (first_content_row) {
            first_content_row = false;  // header row, skip
        } else {
            throw ParseError("load_csv: non-numeric value '" + cell + "' at row " +
                                 std::to_string(row),
                             row);
        }
    }
    if (frame.samples.empty()) {
        throw InvalidArgument("load_csv: no data rows in '" + path + "'");
    }
    return frame;
}

SignalStats stats(const SignalFrame& frame) {
    validate(frame);
    const std::size_t n = frame.samples.size();
    double sum = 0.0;
    for (double s : frame.samples) sum += s;
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (double s : frame.samples) {
        const double d = s - mean;
        sq += d * d;
    }
    return SignalStats{mean, sq / static_cast<double>(n), n};
}

}  // namespace aqwm
