#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "aqwm/attack.hpp"
#include "aqwm/detect.hpp"
#include "aqwm/errors.hpp"
#include "aqwm/fingerprint.hpp"
#include "aqwm/harness.hpp"
#include "aqwm/lstm.hpp"
#include "aqwm/signal.hpp"
#include "aqwm/watermark.hpp"
#include "aqwm/wire.hpp"

namespace py = pybind11;
using namespace aqwm;

PYBIND11_MODULE(_core, m) {
    m.doc() = "spread-spectrum signal authentication: watermarking, attack "
              "simulation, and cloud-side detection";

    py::register_exception<InvalidArgument>(m, "InvalidArgumentError", PyExc_ValueError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_IOError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<CodecError>(m, "CodecError", PyExc_ValueError);
    py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_ValueError);
    py::register_exception<TrainingDiverged>(m, "TrainingDivergedError", PyExc_RuntimeError);

    py::class_<SignalFrame>(m, "SignalFrame")
        .def(py::init([](std::vector<double> samples, double fs) {
                 SignalFrame f{std::move(samples), fs};
                 validate(f);
                 return f;
             }),
             py::arg("samples"), py::arg("sample_rate_hz"))
        .def_readonly("samples", &SignalFrame::samples)
        .def_readonly("sample_rate_hz", &SignalFrame::sample_rate_hz)
        .def("__len__", [](const SignalFrame& f) { return f.samples.size(); });

    py::class_<SignalStats>(m, "SignalStats")
        .def_readonly("mean", &SignalStats::mean)
        .def_readonly("variance", &SignalStats::variance)
        .def_readonly("count", &SignalStats::count);

    py::class_<ProductStats>(m, "ProductStats")
        .def(py::init<double, double>(), py::arg("mean"), py::arg("variance"))
        .def_readwrite("mean", &ProductStats::mean)
        .def_readwrite("variance", &ProductStats::variance);

    py::class_<PnKey>(m, "PnKey")
        .def_readonly("chips", &PnKey::chips)
        .def_readonly("seed", &PnKey::seed)
        .def("__len__", [](const PnKey& k) { return k.chips.size(); });

    py::class_<BitStream>(m, "BitStream")
        .def(py::init([](std::vector<int> bits) { return BitStream{std::move(bits)}; }),
             py::arg("bits"))
        .def_readonly("bits", &BitStream::bits)
        .def("__len__", [](const BitStream& b) { return b.bits.size(); });

    py::class_<WatermarkParams>(m, "WatermarkParams")
        .def(py::init([](double beta, int n, int n_s, double fs) {
                 WatermarkParams p{beta, n, n_s, fs};
                 validate(p);
                 return p;
             }),
             py::arg("beta"), py::arg("n"), py::arg("n_s"), py::arg("sample_rate_hz"))
        .def_readonly("beta", &WatermarkParams::beta)
        .def_readonly("n", &WatermarkParams::n)
        .def_readonly("n_s", &WatermarkParams::n_s)
        .def_readonly("sample_rate_hz", &WatermarkParams::sample_rate_hz)
        .def("window_samples", &WatermarkParams::window_samples)
        .def("window_seconds", &WatermarkParams::window_seconds);

    py::class_<SoftBit>(m, "SoftBit")
        .def_readonly("value", &SoftBit::value)
        .def_readonly("hard", &SoftBit::hard);

    // signal
    m.def("gen_gaussian", &gen_gaussian, py::arg("mean"), py::arg("std_dev"),
          py::arg("length"), py::arg("sample_rate_hz"), py::arg("seed"));
    m.def("load_csv", &load_csv, py::arg("path"), py::arg("sample_rate_hz"));
    m.def("stats", &stats, py::arg("frame"));

    // watermarking
    m.def("gen_pn_key", &gen_pn_key, py::arg("n"), py::arg("seed"));
    m.def("gen_bits", &gen_bits, py::arg("n_s"), py::arg("seed"));
    m.def("embed", &embed, py::arg("frame"), py::arg("key"), py::arg("bits"),
          py::arg("beta"));
    m.def("extract", &extract, py::arg("frame"), py::arg("key"), py::arg("n_s"),
          py::arg("beta"));
    m.def("hard_bits", &hard_bits, py::arg("soft"));
    m.def("theoretical_ber", &theoretical_ber, py::arg("beta"), py::arg("sigma"),
          py::arg("n"));
    m.def("attacker_ber", &attacker_ber, py::arg("beta"), py::arg("n"),
          py::arg("product"), py::arg("sigma"));
    py::enum_<PlannerMode>(m, "PlannerMode")
        .value("strict", PlannerMode::strict)
        .value("confusion", PlannerMode::confusion);
    m.def("plan_params", &plan_params, py::arg("sigma"), py::arg("product"),
          py::arg("p_bar"), py::arg("p_under"), py::arg("delay_s"),
          py::arg("sample_rate_hz"), py::arg("mode") = PlannerMode::confusion);
    m.def("bits_per_window", &bits_per_window, py::arg("delay_s"),
          py::arg("sample_rate_hz"), py::arg("n"));

    // fingerprint
    py::class_<FeatureVector>(m, "FeatureVector")
        .def_readonly("spectral_flatness", &FeatureVector::spectral_flatness)
        .def_readonly("mean", &FeatureVector::mean)
        .def_readonly("variance", &FeatureVector::variance)
        .def_readonly("skewness", &FeatureVector::skewness)
        .def_readonly("kurtosis", &FeatureVector::kurtosis)
        .def("as_tuple", [](const FeatureVector& fv) {
            const auto a = fv.as_array();
            return py::make_tuple(a[0], a[1], a[2], a[3], a[4]);
        });
    py::class_<FeatureCalibration>(m, "FeatureCalibration");
    m.def("features", &features, py::arg("frame"));
    m.def("calibrate", &calibrate, py::arg("frames"), py::arg("bits_per_feature") = 1);
    m.def("quantize", &quantize, py::arg("features"), py::arg("calibration"),
          py::arg("n_s"));
    m.def("calibration_to_json", &calibration_to_json);
    m.def("calibration_from_json", &calibration_from_json);
    m.def("save_calibration", &save_calibration);
    m.def("load_calibration", &load_calibration);

    // lstm
    py::class_<LstmModel>(m, "LstmModel")
        .def_readonly("input_dim", &LstmModel::input_dim)
        .def_readonly("hidden_dim", &LstmModel::hidden_dim)
        .def_readonly("output_dim", &LstmModel::output_dim);
    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init([](int epochs, double lr, std::uint64_t seed, double clip) {
                 TrainConfig c;
                 c.epochs = epochs;
                 c.learning_rate = lr;
                 c.seed = seed;
                 c.gradient_clip = clip;
                 return c;
             }),
             py::arg("epochs"), py::arg("learning_rate"), py::arg("seed") = 0,
             py::arg("gradient_clip") = 1.0);
    py::class_<TrainReport>(m, "TrainReport")
        .def_readonly("per_epoch_loss", &TrainReport::per_epoch_loss)
        .def_readonly("final_loss", &TrainReport::final_loss)
        .def_readonly("epochs_run", &TrainReport::epochs_run);
    py::class_<Sequence>(m, "Sequence")
        .def(py::init([](int steps, std::vector<double> inputs,
                         std::vector<double> targets, std::vector<double> weights) {
                 return Sequence{steps, std::move(inputs), std::move(targets),
                                 std::move(weights)};
             }),
             py::arg("steps"), py::arg("inputs"), py::arg("targets"),
             py::arg("weights") = std::vector<double>{});
    m.def("init_lstm", &init_lstm, py::arg("input_dim"), py::arg("hidden_dim"),
          py::arg("output_dim"), py::arg("seed"));
    m.def("lstm_forward", &lstm_forward, py::arg("model"), py::arg("inputs"));
    m.def("lstm_loss", &lstm_loss, py::arg("model"), py::arg("dataset"));
    m.def("gradient_check", &gradient_check, py::arg("model"), py::arg("sample"),
          py::arg("epsilon"));
    m.def("lstm_train", &lstm_train, py::arg("model"), py::arg("dataset"),
          py::arg("config"));
    m.def("device_encode", &device_encode, py::arg("model"), py::arg("frame"),
          py::arg("key"));
    m.def("cloud_decode", &cloud_decode, py::arg("model"), py::arg("frame"),
          py::arg("key"));
    m.def("model_to_json", &model_to_json);
    m.def("model_from_json", &model_from_json);
    m.def("save_model", &save_model);
    m.def("load_model", &load_model);

    // attack
    py::enum_<AttackKind>(m, "AttackKind")
        .value("injection", AttackKind::injection)
        .value("eavesdrop_forge", AttackKind::eavesdrop_forge);
    py::class_<AttackConfig>(m, "AttackConfig")
        .def(py::init<>())
        .def_readwrite("kind", &AttackConfig::kind)
        .def_readwrite("start_sample", &AttackConfig::start_sample)
        .def_readwrite("injected_mean", &AttackConfig::injected_mean)
        .def_readwrite("injected_std", &AttackConfig::injected_std)
        .def_readwrite("eavesdrop_windows", &AttackConfig::eavesdrop_windows)
        .def_readwrite("seed", &AttackConfig::seed);
    py::class_<AccumulatedObservation>(m, "AccumulatedObservation")
        .def_readonly("sum_samples", &AccumulatedObservation::sum_samples)
        .def_readonly("windows_summed", &AccumulatedObservation::windows_summed);
    py::class_<KeyEstimate>(m, "KeyEstimate")
        .def_readonly("chips", &KeyEstimate::chips)
        .def_readonly("power_ratio", &KeyEstimate::power_ratio);
    m.def("inject", &inject, py::arg("stream"), py::arg("config"));
    m.def("accumulate", &accumulate, py::arg("windows"), py::arg("aligned") = true);
    m.def("estimate_key", &estimate_key, py::arg("accumulation"), py::arg("n"),
          py::arg("n_s"));
    m.def("estimate_bits", &estimate_bits, py::arg("accumulation"),
          py::arg("key_estimate"), py::arg("n"), py::arg("n_s"));
    m.def("forge", &forge, py::arg("cover"), py::arg("key_estimate"),
          py::arg("bits_estimate"), py::arg("beta"));

    // detect
    py::class_<DetectionReport>(m, "DetectionReport")
        .def_readonly("per_window_mismatch", &DetectionReport::per_window_mismatch)
        .def_readonly("alarm_window", &DetectionReport::alarm_window)
        .def_readonly("alarm_time_s", &DetectionReport::alarm_time_s)
        .def_readonly("threshold", &DetectionReport::threshold);
    m.def("mismatch", &mismatch, py::arg("expected"), py::arg("extracted"));
    m.def("static_verify", &static_verify, py::arg("stream"), py::arg("key"),
          py::arg("params"), py::arg("reference_bits"), py::arg("threshold"));
    m.def(
        "dynamic_verify",
        [](const std::vector<SignalFrame>& stream, const PnKey& key,
           const WatermarkParams& params, const FeatureCalibration& calib,
           const LstmModel* decoder, double threshold) {
            return dynamic_verify(stream, key, params, calib, decoder, threshold);
        },
        py::arg("stream"), py::arg("key"), py::arg("params"), py::arg("calibration"),
        py::arg("decoder") = nullptr, py::arg("threshold") = 0.25);
    m.def("strip_watermark", &strip_watermark, py::arg("frame"), py::arg("key"),
          py::arg("bits"), py::arg("beta"));
    m.def("report_to_json", &report_to_json, py::arg("report"), py::arg("params"));

    // wire
    py::class_<DecodedFrame>(m, "DecodedFrame")
        .def_readonly("frame", &DecodedFrame::frame)
        .def_readonly("device_id", &DecodedFrame::device_id)
        .def_readonly("window_index", &DecodedFrame::window_index)
        .def_readonly("params", &DecodedFrame::params);
    m.def(
        "encode_frame",
        [](const SignalFrame& frame, std::uint32_t device_id, std::uint64_t window_index,
           const WatermarkParams& params) {
            const auto bytes = encode_frame(frame, device_id, window_index, params);
            return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        },
        py::arg("frame"), py::arg("device_id"), py::arg("window_index"), py::arg("params"));
    m.def(
        "decode_frame",
        [](const py::bytes& data) {
            const std::string view = data;
            std::vector<std::uint8_t> bytes(view.begin(), view.end());
            return decode_frame(bytes);
        },
        py::arg("data"));

    // harness
    py::enum_<ScenarioMode>(m, "ScenarioMode")
        .value("static_scheme", ScenarioMode::static_scheme)
        .value("dynamic_oracle", ScenarioMode::dynamic_oracle)
        .value("dynamic_lstm", ScenarioMode::dynamic_lstm);
    py::class_<Scenario>(m, "Scenario");
    py::class_<BerPoint>(m, "BerPoint")
        .def_readonly("beta_over_sigma", &BerPoint::beta_over_sigma)
        .def_readonly("n", &BerPoint::n)
        .def_readonly("empirical_ber", &BerPoint::empirical_ber)
        .def_readonly("theoretical_ber", &BerPoint::theoretical);
    py::class_<MetricsBundle>(m, "MetricsBundle")
        .def_readonly("ber_points", &MetricsBundle::ber_points)
        .def_readonly("detection", &MetricsBundle::detection)
        .def_readonly("power_ratio_curve", &MetricsBundle::power_ratio_curve)
        .def_readonly("runtime_s", &MetricsBundle::runtime_s);
    m.def("load_scenario", &load_scenario, py::arg("path"));
    m.def("scenario_from_json", &scenario_from_json, py::arg("text"));
    m.def("scenario_to_json", &scenario_to_json, py::arg("scenario"));
    m.def("run_scenario", &run_scenario, py::arg("scenario"));
    m.def("ber_sweep", &ber_sweep, py::arg("n_values"), py::arg("beta_over_sigma_values"),
          py::arg("trials"), py::arg("seed"));
    m.def("metrics_to_json", &metrics_to_json, py::arg("metrics"),
          py::arg("include_runtime") = true);
}
