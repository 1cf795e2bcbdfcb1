#include <cmath>

#include "aqwm/errors.hpp"
#include "aqwm/harness.hpp"
#include "doctest.h"

using namespace aqwm;

namespace {

Scenario base_scenario() {
    Scenario sc;
    sc.mode = ScenarioMode::static_scheme;
    sc.params = WatermarkParams{2.0, 10, 10, 1000.0};
    sc.source.kind = SourceConfig::Kind::synthetic;
    sc.source.mean = 0.0;
    sc.source.std_dev = 1.0;
    sc.source.seed = 101;
    sc.duration_s = 1.0;
    sc.threshold = 0.25;
    sc.key_seed = 202;
    return sc;
}

}  // namespace

TEST_CASE("scenario JSON round-trips") {
    Scenario sc = base_scenario();
    AttackConfig atk;
    atk.kind = AttackKind::eavesdrop_forge;
    atk.start_sample = 500;
    atk.injected_std = 1.0;
    atk.eavesdrop_windows = 100;
    atk.seed = 7;
    sc.attack = atk;
    sc.mode = ScenarioMode::dynamic_oracle;

    const Scenario back = scenario_from_json(scenario_to_json(sc));
    CHECK(back.mode == sc.mode);
    CHECK(back.params.beta == sc.params.beta);
    CHECK(back.params.n == sc.params.n);
    CHECK(back.source.seed == sc.source.seed);
    REQUIRE(back.attack.has_value());
    CHECK(back.attack->eavesdrop_windows == 100);
    CHECK(back.threshold == sc.threshold);

    CHECK_THROWS_AS(scenario_from_json("{\"mode\":\"nope\"}"), InvalidArgument);
    CHECK_THROWS_AS(scenario_from_json("{"), InvalidArgument);
}

TEST_CASE("clean static scenario raises no alarm across 100 windows") {
    Scenario sc = base_scenario();
    // beta*sqrt(n)/sigma = 6 at n = 9? keep n=10: 2*sqrt(10) ~ 6.3.
    sc.duration_s = 10.0;  // 100 windows of 100 samples
    const MetricsBundle m = run_scenario(sc);
    CHECK_FALSE(m.detection.alarm_window.has_value());
    CHECK(m.detection.per_window_mismatch.size() == 100);
}

TEST_CASE("injection at 0.5 s alarms at exactly 0.6 s in both schemes") {
    for (ScenarioMode mode : {ScenarioMode::static_scheme, ScenarioMode::dynamic_oracle}) {
        Scenario sc = base_scenario();
        sc.mode = mode;
        AttackConfig atk;
        atk.kind = AttackKind::injection;
        atk.start_sample = 500;
        atk.injected_mean = 0.0;
        atk.injected_std = 1.0;
        atk.seed = 31;
        sc.attack = atk;
        const MetricsBundle m = run_scenario(sc);
        REQUIRE(m.detection.alarm_window.has_value());
        CHECK(*m.detection.alarm_window == 5);
        CHECK(*m.detection.alarm_time_s == doctest::Approx(0.6));
    }
}

TEST_CASE("eavesdropping forgery fools the static verifier but not the dynamic one") {
    Scenario sc = base_scenario();
    sc.params.beta = 1.0;
    sc.key_seed = 977;  // reference bits with a nonzero sum
    AttackConfig atk;
    atk.kind = AttackKind::eavesdrop_forge;
    atk.start_sample = 500;
    atk.injected_mean = 0.0;
    atk.injected_std = 1.0;
    atk.eavesdrop_windows = 100;
    atk.seed = 41;
    sc.attack = atk;

    sc.mode = ScenarioMode::static_scheme;
    const MetricsBundle silent = run_scenario(sc);
    CHECK_FALSE(silent.detection.alarm_window.has_value());
    CHECK_FALSE(silent.power_ratio_curve.empty());
    CHECK(silent.power_ratio_curve.back().first == 100);

    sc.mode = ScenarioMode::dynamic_oracle;
    const MetricsBundle loud = run_scenario(sc);
    REQUIRE(loud.detection.alarm_window.has_value());
    CHECK(*loud.detection.alarm_window == 5);  // first forged window
}

TEST_CASE("the wire codec is transparent to detection") {
    Scenario sc = base_scenario();
    AttackConfig atk;
    atk.kind = AttackKind::injection;
    atk.start_sample = 300;
    atk.injected_std = 2.0;
    atk.seed = 51;
    sc.attack = atk;

    sc.use_wire = true;
    const MetricsBundle with_wire = run_scenario(sc);
    sc.use_wire = false;
    const MetricsBundle without = run_scenario(sc);
    CHECK(metrics_to_json(with_wire, false) == metrics_to_json(without, false));
}

TEST_CASE("identical scenarios produce byte-identical metrics") {
    Scenario sc = base_scenario();
    sc.mode = ScenarioMode::dynamic_oracle;
    const std::string a = metrics_to_json(run_scenario(sc), false);
    const std::string b = metrics_to_json(run_scenario(sc), false);
    CHECK(a == b);
}

TEST_CASE("scenario validation points at the offending field") {
    Scenario sc = base_scenario();
    sc.duration_s = 0.55;  // not a whole number of windows
    try {
        run_scenario(sc);
        FAIL("expected InvalidArgument");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("duration_s") != std::string::npos);
    }

    Scenario lstm = base_scenario();
    lstm.mode = ScenarioMode::dynamic_lstm;
    CHECK_THROWS_AS(run_scenario(lstm), InvalidArgument);
    lstm.encoder_model_path = "/nonexistent/model.json";
    CHECK_THROWS_AS(run_scenario(lstm), IoError);
}

TEST_CASE("regime source windows are deterministic and bimodal") {
    SourceConfig src;
    src.kind = SourceConfig::Kind::regime;
    src.seed = 11;
    const SignalFrame a = source_window(src, SourceChannel::stream, 0, 625, 1000.0);
    const SignalFrame b = source_window(src, SourceChannel::stream, 0, 625, 1000.0);
    CHECK(a.samples == b.samples);
    // Means across windows split around +-0.8.
    int lo = 0, hi = 0;
    for (std::size_t i = 0; i < 40; ++i) {
        const SignalFrame w = source_window(src, SourceChannel::stream, i, 625, 1000.0);
        const double mean = stats(w).mean;
        if (mean < 0.0) ++lo;
        else ++hi;
    }
    CHECK(lo > 5);
    CHECK(hi > 5);
}

TEST_CASE("ber_sweep tracks the closed-form curve") {
    const MetricsBundle m = ber_sweep({16}, {0.5}, 100000, 99);
    REQUIRE(m.ber_points.size() == 1);
    const BerPoint& p = m.ber_points[0];
    CHECK(p.theoretical == doctest::Approx(0.0227501319481792072).epsilon(1e-12));
    const double tol = 3.0 * std::sqrt(p.theoretical * (1 - p.theoretical) / 100000.0);
    CHECK(std::abs(p.empirical_ber - p.theoretical) <= tol);
}

TEST_CASE("ber_sweep approaches chance as the watermark power vanishes") {
    const MetricsBundle m = ber_sweep({4}, {1e-6}, 20000, 7);
    CHECK(m.ber_points[0].empirical_ber > 0.49);
    CHECK(m.ber_points[0].empirical_ber < 0.51);
}

TEST_CASE("ber_sweep is monotone in n at fixed amplitude") {
    const MetricsBundle m = ber_sweep({4, 16, 64}, {0.5}, 30000, 13);
    REQUIRE(m.ber_points.size() == 3);
    // Allow 3-sigma statistical slack on each comparison.
    for (std::size_t i = 1; i < 3; ++i) {
        const double p = m.ber_points[i - 1].theoretical;
        const double slack = 3.0 * std::sqrt(p * (1 - p) / 30000.0);
        CHECK(m.ber_points[i].empirical_ber <=
              m.ber_points[i - 1].empirical_ber + slack);
    }
    const std::string csv = ber_points_to_csv(m.ber_points);
    CHECK(csv.find("beta_over_sigma,n,empirical_ber,theoretical_ber") == 0);
}

TEST_CASE("csv sources reject channels that would need fresh data") {
    SourceConfig src;
    src.kind = SourceConfig::Kind::csv;
    src.path = "/nonexistent.csv";
    CHECK_THROWS_AS(source_window(src, SourceChannel::eavesdrop, 0, 10, 100.0),
                    InvalidArgument);
}
