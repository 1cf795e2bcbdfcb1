// Command line front end: embed/extract watermarks, plan parameters, train
// the LSTM models, run scenarios, and sweep bit-error curves.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "aqwm/attack.hpp"
#include "aqwm/detect.hpp"
#include "aqwm/errors.hpp"
#include "aqwm/fingerprint.hpp"
#include "aqwm/harness.hpp"
#include "aqwm/lstm.hpp"
#include "aqwm/signal.hpp"
#include "aqwm/watermark.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAlarm = 3;

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw aqwm::IoError("cannot write '" + path + "'");
    out << text;
}

void write_samples_csv(const std::string& path, const aqwm::SignalFrame& frame) {
    std::ostringstream ss;
    ss.precision(17);
    for (double v : frame.samples) ss << v << '\n';
    write_text(path, ss.str());
}

aqwm::BitStream parse_bits(const std::string& text) {
    aqwm::BitStream bits;
    for (char c : text) {
        if (c == '+') bits.bits.push_back(+1);
        else if (c == '-') bits.bits.push_back(-1);
        else throw aqwm::InvalidArgument("--bits must be a string of + and - characters");
    }
    if (bits.bits.empty()) throw aqwm::InvalidArgument("--bits must be non-empty");
    return bits;
}

std::string bits_to_string(const std::vector<int>& bits) {
    std::string s;
    for (int b : bits) s += (b > 0 ? '+' : '-');
    return s;
}

aqwm::SourceConfig make_source(const std::string& kind, const std::string& csv_path,
                               double mean, double std_dev, std::uint64_t seed) {
    aqwm::SourceConfig src;
    if (kind == "synthetic") {
        src.kind = aqwm::SourceConfig::Kind::synthetic;
        src.mean = mean;
        src.std_dev = std_dev;
        src.seed = seed;
    } else if (kind == "regime") {
        src.kind = aqwm::SourceConfig::Kind::regime;
        src.seed = seed;
    } else if (kind == "csv") {
        src.kind = aqwm::SourceConfig::Kind::csv;
        src.path = csv_path;
    } else {
        throw aqwm::InvalidArgument("--source must be synthetic, regime, or csv");
    }
    return src;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spread-spectrum signal authentication simulator"};
    app.require_subcommand(1);

    // ---- embed -----------------------------------------------------------
    auto* cmd_embed = app.add_subcommand("embed", "watermark one window of samples");
    std::string embed_in, embed_out, embed_bits;
    double embed_fs = 1000.0, embed_beta = 0.5;
    int embed_n = 10;
    std::uint64_t embed_key_seed = 1, embed_bits_seed = 0;
    int embed_n_s = 0;
    cmd_embed->add_option("--in", embed_in, "input CSV, one sample per row")->required();
    cmd_embed->add_option("--fs", embed_fs, "sample rate in Hz");
    cmd_embed->add_option("--key-seed", embed_key_seed, "pseudo-noise key seed");
    cmd_embed->add_option("--beta", embed_beta, "watermark amplitude");
    cmd_embed->add_option("--n", embed_n, "chips per bit");
    cmd_embed->add_option("--bits", embed_bits, "bit stream as +- characters");
    cmd_embed->add_option("--bits-seed", embed_bits_seed, "seed for a random bit stream");
    cmd_embed->add_option("--n-s", embed_n_s, "bits per window (with --bits-seed)");
    cmd_embed->add_option("--out", embed_out, "output CSV ('-' for stdout)");

    // ---- extract -----------------------------------------------------------
    auto* cmd_extract = app.add_subcommand("extract", "correlate a window against the key");
    std::string extract_in, extract_out;
    double extract_fs = 1000.0, extract_beta = 0.5;
    int extract_n = 10, extract_n_s = 10;
    std::uint64_t extract_key_seed = 1;
    cmd_extract->add_option("--in", extract_in, "input CSV")->required();
    cmd_extract->add_option("--fs", extract_fs, "sample rate in Hz");
    cmd_extract->add_option("--key-seed", extract_key_seed, "pseudo-noise key seed");
    cmd_extract->add_option("--beta", extract_beta, "watermark amplitude");
    cmd_extract->add_option("--n", extract_n, "chips per bit");
    cmd_extract->add_option("--n-s", extract_n_s, "bits per window");
    cmd_extract->add_option("--out", extract_out, "output JSON ('-' for stdout)");

    // ---- plan --------------------------------------------------------------
    auto* cmd_plan = app.add_subcommand("plan", "solve for (beta, n, n_s)");
    double plan_sigma = 1.0, plan_mu1 = 0.0, plan_sigma1_sq = 1.0;
    double plan_p_bar = 0.1, plan_p_under = 0.4, plan_delay = 0.1, plan_fs = 1000.0;
    std::string plan_mode = "confusion", plan_out;
    cmd_plan->add_option("--sigma", plan_sigma, "carrier standard deviation");
    cmd_plan->add_option("--mu1", plan_mu1, "mean of the carrier product");
    cmd_plan->add_option("--sigma1-sq", plan_sigma1_sq, "variance of the carrier product");
    cmd_plan->add_option("--p-bar", plan_p_bar, "extraction error budget");
    cmd_plan->add_option("--p-under", plan_p_under, "attacker advantage budget");
    cmd_plan->add_option("--delay", plan_delay, "detection delay budget in seconds");
    cmd_plan->add_option("--fs", plan_fs, "sample rate in Hz");
    cmd_plan->add_option("--mode", plan_mode, "strict | confusion");
    cmd_plan->add_option("--out", plan_out, "output JSON ('-' for stdout)");

    // ---- train ---------------------------------------------------------------
    auto* cmd_train = app.add_subcommand("train", "train the device encoder or cloud decoder");
    std::string train_task = "encoder", train_source = "regime", train_csv, train_out,
                train_calib_out;
    double train_beta = 0.5, train_fs = 1000.0, train_mean = 0.0, train_std = 1.0;
    int train_n = 25, train_n_s = 25, train_hidden = 32, train_windows = 48,
        train_epochs = 1200;
    std::uint64_t train_seed = 1, train_key_seed = 1, train_init_seed = 1;
    cmd_train->add_option("--task", train_task, "encoder | decoder");
    cmd_train->add_option("--source", train_source, "regime | synthetic | csv");
    cmd_train->add_option("--csv", train_csv, "csv path when --source csv");
    cmd_train->add_option("--mean", train_mean, "synthetic source mean");
    cmd_train->add_option("--std", train_std, "synthetic source std");
    cmd_train->add_option("--seed", train_seed, "source seed");
    cmd_train->add_option("--key-seed", train_key_seed, "pseudo-noise key seed");
    cmd_train->add_option("--init-seed", train_init_seed, "weight initialization seed");
    cmd_train->add_option("--beta", train_beta, "watermark amplitude");
    cmd_train->add_option("--n", train_n, "chips per bit");
    cmd_train->add_option("--n-s", train_n_s, "bits per window");
    cmd_train->add_option("--fs", train_fs, "sample rate in Hz");
    cmd_train->add_option("--hidden", train_hidden, "LSTM hidden units");
    cmd_train->add_option("--windows", train_windows, "training windows");
    cmd_train->add_option("--epochs", train_epochs, "training epochs");
    cmd_train->add_option("--out", train_out, "model JSON path")->required();
    cmd_train->add_option("--calib-out", train_calib_out, "also write the calibration JSON");

    // ---- simulate -------------------------------------------------------------
    auto* cmd_sim = app.add_subcommand("simulate", "run a scenario file");
    std::string sim_scenario, sim_out;
    bool sim_fail_on_alarm = false;
    cmd_sim->add_option("--scenario", sim_scenario, "scenario JSON path")->required();
    cmd_sim->add_option("--out", sim_out, "metrics JSON ('-' for stdout)");
    cmd_sim->add_flag("--fail-on-alarm", sim_fail_on_alarm,
                      "exit with status 3 when the alarm fires");

    // ---- sweep -----------------------------------------------------------------
    auto* cmd_sweep = app.add_subcommand("sweep", "Monte Carlo bit-error sweep");
    std::vector<int> sweep_n{4, 16, 64};
    std::vector<double> sweep_ratios{0.25, 0.5, 1.0};
    int sweep_trials = 100000;
    std::uint64_t sweep_seed = 1;
    std::string sweep_out, sweep_format = "csv";
    cmd_sweep->add_option("--n", sweep_n, "chips-per-bit values")->delimiter(',');
    cmd_sweep->add_option("--ratios", sweep_ratios, "beta/sigma values")->delimiter(',');
    cmd_sweep->add_option("--trials", sweep_trials, "windows per grid point");
    cmd_sweep->add_option("--seed", sweep_seed, "sweep seed");
    cmd_sweep->add_option("--format", sweep_format, "csv | json");
    cmd_sweep->add_option("--out", sweep_out, "output path ('-' for stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_embed->parsed()) {
            const aqwm::SignalFrame y = aqwm::load_csv(embed_in, embed_fs);
            aqwm::BitStream bits;
            if (!embed_bits.empty()) {
                bits = parse_bits(embed_bits);
            } else {
                if (embed_n_s < 1) {
                    throw aqwm::InvalidArgument("--n-s is required with --bits-seed");
                }
                bits = aqwm::gen_bits(embed_n_s, embed_bits_seed);
            }
            const aqwm::PnKey key = aqwm::gen_pn_key(embed_n, embed_key_seed);
            write_samples_csv(embed_out, aqwm::embed(y, key, bits, embed_beta));
            std::cerr << "embedded " << bits.size() << " bits: "
                      << bits_to_string(bits.bits) << "\n";
            return kExitOk;
        }
        if (cmd_extract->parsed()) {
            const aqwm::SignalFrame w = aqwm::load_csv(extract_in, extract_fs);
            const aqwm::PnKey key = aqwm::gen_pn_key(extract_n, extract_key_seed);
            const auto soft = aqwm::extract(w, key, extract_n_s, extract_beta);
            std::ostringstream ss;
            ss.precision(17);
            ss << "{\n  \"bits\": \"" << bits_to_string(aqwm::hard_bits(soft))
               << "\",\n  \"soft\": [";
            for (std::size_t i = 0; i < soft.size(); ++i) {
                ss << (i ? ", " : "") << soft[i].value;
            }
            ss << "]\n}\n";
            write_text(extract_out.empty() ? "-" : extract_out, ss.str());
            return kExitOk;
        }
        if (cmd_plan->parsed()) {
            aqwm::PlannerMode mode;
            if (plan_mode == "strict") mode = aqwm::PlannerMode::strict;
            else if (plan_mode == "confusion") mode = aqwm::PlannerMode::confusion;
            else throw aqwm::InvalidArgument("--mode must be strict or confusion");
            const aqwm::WatermarkParams params = aqwm::plan_params(
                plan_sigma, aqwm::ProductStats{plan_mu1, plan_sigma1_sq}, plan_p_bar,
                plan_p_under, plan_delay, plan_fs, mode);
            std::ostringstream ss;
            ss.precision(17);
            ss << "{ \"beta\": " << params.beta << ", \"n\": " << params.n
               << ", \"n_s\": " << params.n_s
               << ", \"sample_rate_hz\": " << params.sample_rate_hz << " }\n";
            write_text(plan_out.empty() ? "-" : plan_out, ss.str());
            return kExitOk;
        }
        if (cmd_train->parsed()) {
            const aqwm::SourceConfig src =
                make_source(train_source, train_csv, train_mean, train_std, train_seed);
            const aqwm::WatermarkParams params{train_beta, train_n, train_n_s, train_fs};
            const aqwm::TaskFixture fx =
                aqwm::make_task_fixture(src, params, train_key_seed);
            aqwm::TrainReport report;
            aqwm::LstmModel model;
            if (train_task == "encoder") {
                model = aqwm::init_encoder_model(fx, train_hidden, train_init_seed);
                report = aqwm::train_device_encoder(model, src, fx, train_windows,
                                                    train_epochs, train_seed);
            } else if (train_task == "decoder") {
                model = aqwm::init_decoder_model(fx, train_hidden, train_init_seed);
                report = aqwm::train_cloud_decoder(model, src, fx, train_windows,
                                                   train_epochs, train_seed);
            } else {
                throw aqwm::InvalidArgument("--task must be encoder or decoder");
            }
            aqwm::save_model(model, train_out);
            if (!train_calib_out.empty()) aqwm::save_calibration(fx.calib, train_calib_out);
            std::cerr << "trained " << train_task << ": " << report.epochs_run
                      << " epochs, final loss " << report.final_loss << "\n";
            return kExitOk;
        }
        if (cmd_sim->parsed()) {
            const aqwm::Scenario sc = aqwm::load_scenario(sim_scenario);
            const aqwm::MetricsBundle metrics = aqwm::run_scenario(sc);
            write_text(sim_out.empty() ? "-" : sim_out, aqwm::metrics_to_json(metrics));
            if (metrics.detection.alarm_window.has_value()) {
                std::cerr << "alarm at window " << *metrics.detection.alarm_window
                          << " (t = " << *metrics.detection.alarm_time_s << " s)\n";
                if (sim_fail_on_alarm) return kExitAlarm;
            } else {
                std::cerr << "no alarm\n";
            }
            return kExitOk;
        }
        if (cmd_sweep->parsed()) {
            const aqwm::MetricsBundle metrics =
                aqwm::ber_sweep(sweep_n, sweep_ratios, sweep_trials, sweep_seed);
            if (sweep_format == "json") {
                write_text(sweep_out.empty() ? "-" : sweep_out,
                           aqwm::metrics_to_json(metrics));
            } else if (sweep_format == "csv") {
                write_text(sweep_out.empty() ? "-" : sweep_out,
                           aqwm::ber_points_to_csv(metrics.ber_points));
            } else {
                throw aqwm::InvalidArgument("--format must be csv or json");
            }
            return kExitOk;
        }
    } catch (const aqwm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
