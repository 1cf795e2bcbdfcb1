#include <cmath>

#include "aqwm/errors.hpp"
#include "aqwm/lstm.hpp"
#include "aqwm/rng.hpp"
#include "doctest.h"

using namespace aqwm;

namespace {

std::vector<std::vector<double>> random_inputs(int steps, int dim, std::uint64_t seed) {
    GaussianStream g(seed);
    std::vector<std::vector<double>> x(static_cast<std::size_t>(steps));
    for (auto& v : x) {
        v.resize(static_cast<std::size_t>(dim));
        for (double& e : v) e = g.next();
    }
    return x;
}

Sequence random_sequence(const LstmModel& m, int steps, std::uint64_t seed) {
    GaussianStream g(seed);
    Sequence s;
    s.steps = steps;
    s.inputs.resize(static_cast<std::size_t>(steps) * m.input_dim);
    s.targets.resize(static_cast<std::size_t>(steps) * m.output_dim);
    for (double& v : s.inputs) v = g.next();
    for (double& v : s.targets) v = g.next();
    return s;
}

}  // namespace

TEST_CASE("zero-parameter model outputs the output bias") {
    LstmModel m = init_lstm(2, 4, 3, 1);
    m.weights.fill(0.0);
    m.weights.b_out = {0.5, -1.0, 2.0};
    const auto out = lstm_forward(m, random_inputs(6, 2, 99));
    for (const auto& y : out) {
        CHECK(y[0] == doctest::Approx(0.5));
        CHECK(y[1] == doctest::Approx(-1.0));
        CHECK(y[2] == doctest::Approx(2.0));
    }
}

TEST_CASE("zero output projection dominates regardless of the recurrence") {
    LstmModel m = init_lstm(2, 8, 1, 7);
    std::fill(m.weights.w_out.begin(), m.weights.w_out.end(), 0.0);
    m.weights.b_out = {3.25};
    const auto out = lstm_forward(m, random_inputs(10, 2, 100));
    for (const auto& y : out) CHECK(y[0] == doctest::Approx(3.25));
}

TEST_CASE("outputs are causal: extending the input changes nothing earlier") {
    const LstmModel m = init_lstm(3, 8, 2, 21);
    const auto inputs = random_inputs(12, 3, 101);
    const auto full = lstm_forward(m, inputs);
    for (int prefix : {1, 5, 11}) {
        const std::vector<std::vector<double>> head(inputs.begin(),
                                                    inputs.begin() + prefix);
        const auto got = lstm_forward(m, head);
        for (int t = 0; t < prefix; ++t) {
            CHECK(got[static_cast<std::size_t>(t)] == full[static_cast<std::size_t>(t)]);
        }
    }
}

TEST_CASE("gradient check: flat point and seeded architectures") {
    LstmModel zero = init_lstm(1, 2, 1, 0);
    zero.weights.fill(0.0);
    Sequence flat;
    flat.steps = 3;
    flat.inputs = {0, 0, 0};
    flat.targets = {0, 0, 0};
    CHECK(gradient_check(zero, flat, 1e-6) == doctest::Approx(0.0));

    const LstmModel m = init_lstm(2, 8, 2, 42);
    const Sequence s = random_sequence(m, 20, 77);
    CHECK(gradient_check(m, s, 1e-6) <= 1e-5);

    CHECK_THROWS_AS(gradient_check(m, s, 1e-1), InvalidArgument);
    CHECK_THROWS_AS(gradient_check(m, s, 1e-9), InvalidArgument);
}

TEST_CASE("training on self-generated targets starts and stays at zero loss") {
    LstmModel m = init_lstm(2, 6, 1, 5);
    const auto inputs = random_inputs(15, 2, 55);
    const auto outputs = lstm_forward(m, inputs);
    Sequence s;
    s.steps = 15;
    for (const auto& v : inputs) s.inputs.insert(s.inputs.end(), v.begin(), v.end());
    for (const auto& v : outputs) s.targets.insert(s.targets.end(), v.begin(), v.end());
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.learning_rate = 0.1;
    const TrainReport r = lstm_train(m, {s}, cfg);
    for (double loss : r.per_epoch_loss) CHECK(loss == doctest::Approx(0.0));
    CHECK(r.final_loss == r.per_epoch_loss.back());
    CHECK(r.epochs_run == 3);
}

TEST_CASE("a single sample can be memorized quickly") {
    LstmModel m = init_lstm(2, 16, 1, 99);
    const Sequence s = random_sequence(m, 12, 1001);
    TrainConfig cfg;
    cfg.epochs = 500;
    cfg.learning_rate = 0.4;
    cfg.gradient_clip = 5.0;
    const TrainReport r = lstm_train(m, {s}, cfg);
    CHECK(r.final_loss <= 1e-3);
}

TEST_CASE("full-batch descent at a small step size is nearly monotone") {
    LstmModel m = init_lstm(2, 16, 1, 99);
    const Sequence s = random_sequence(m, 12, 1001);
    TrainConfig cfg;
    cfg.epochs = 300;
    cfg.learning_rate = 0.2;
    cfg.gradient_clip = 5.0;
    const TrainReport r = lstm_train(m, {s}, cfg);
    int non_increasing = 0;
    for (std::size_t e = 1; e < r.per_epoch_loss.size(); ++e) {
        if (r.per_epoch_loss[e] <= r.per_epoch_loss[e - 1] + 1e-15) ++non_increasing;
    }
    CHECK(static_cast<double>(non_increasing) >=
          0.95 * static_cast<double>(r.per_epoch_loss.size() - 1));
}

TEST_CASE("training is bitwise deterministic") {
    const Sequence s = random_sequence(init_lstm(2, 6, 1, 3), 10, 500);
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.learning_rate = 0.5;
    LstmModel a = init_lstm(2, 6, 1, 3);
    LstmModel b = init_lstm(2, 6, 1, 3);
    const TrainReport ra = lstm_train(a, {s}, cfg);
    const TrainReport rb = lstm_train(b, {s}, cfg);
    CHECK(ra.per_epoch_loss == rb.per_epoch_loss);
    CHECK(a.weights.w_out == b.weights.w_out);
}

TEST_CASE("divergence is reported with the failing epoch") {
    LstmModel m = init_lstm(1, 4, 1, 11);
    const Sequence s = random_sequence(m, 8, 600);
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.learning_rate = 1e12;
    cfg.gradient_clip = 0.0;  // disabled
    try {
        lstm_train(m, {s}, cfg);
        FAIL("expected TrainingDiverged");
    } catch (const TrainingDiverged& e) {
        CHECK(e.epoch() >= 0);
        CHECK(e.epoch() < 200);
    }
}

TEST_CASE("model JSON round-trips to an identical forward pass") {
    LstmModel m = init_lstm(2, 8, 6, 2024);
    m.input_scale = {2.0, 1.0};
    m.input_offset = {0.25, 0.0};
    m.output_scale = {1.0, 0.5, 0.5, 0.5, 0.5, 0.5};
    m.output_offset = {0.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    const LstmModel back = model_from_json(model_to_json(m));
    const auto inputs = random_inputs(17, 2, 900);
    const auto ya = lstm_forward(m, inputs);
    const auto yb = lstm_forward(back, inputs);
    for (std::size_t t = 0; t < ya.size(); ++t) CHECK(ya[t] == yb[t]);
    CHECK(back.input_scale == m.input_scale);
    CHECK(back.output_offset == m.output_offset);

    CHECK_THROWS_AS(model_from_json("{\"format\":\"other\"}"), ParseError);
    CHECK_THROWS_AS(model_from_json("nope"), ParseError);
}

TEST_CASE("task wrappers validate their models") {
    const LstmModel enc = init_lstm(2, 4, 1, 1);
    const LstmModel dec = init_lstm(2, 4, 6, 1);
    const PnKey key = gen_pn_key(5, 9);
    SignalFrame frame{std::vector<double>(20, 0.1), 1000.0};

    CHECK_NOTHROW(device_encode(enc, frame, key));
    CHECK_NOTHROW(cloud_decode(dec, frame, key));
    // Wrong output head for the task.
    CHECK_THROWS_AS(device_encode(dec, frame, key), ShapeError);
    CHECK_THROWS_AS(cloud_decode(enc, frame, key), ShapeError);
    // Length not a multiple of the key.
    SignalFrame ragged{std::vector<double>(21, 0.1), 1000.0};
    CHECK_THROWS_AS(device_encode(enc, ragged, key), ShapeError);

    // Same inputs, same outputs.
    const SignalFrame w1 = device_encode(enc, frame, key);
    const SignalFrame w2 = device_encode(enc, frame, key);
    CHECK(w1.samples == w2.samples);
}
