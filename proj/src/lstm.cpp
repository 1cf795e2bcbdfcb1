#include "aqwm/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "aqwm/errors.hpp"
#include "aqwm/rng.hpp"

namespace aqwm {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// out[r] += M x  (M row-major rows x cols)
inline void mv_acc(const double* m, const double* x, double* out, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        const double* row = m + static_cast<std::size_t>(r) * cols;
        double acc = 0.0;
        for (int c = 0; c < cols; ++c) acc += row[c] * x[c];
        out[r] += acc;
    }
}

// out[c] += M^T v
inline void mtv_acc(const double* m, const double* v, double* out, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        const double* row = m + static_cast<std::size_t>(r) * cols;
        const double vr = v[r];
        for (int c = 0; c < cols; ++c) out[c] += row[c] * vr;
    }
}

// dM[r,c] += v[r] * x[c]
inline void outer_acc(double* dm, const double* v, const double* x, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        double* row = dm + static_cast<std::size_t>(r) * cols;
        const double vr = v[r];
        for (int c = 0; c < cols; ++c) row[c] += vr * x[c];
    }
}

// Per-step activations of one sequence, kept for BPTT.
struct ForwardCache {
    int steps = 0;
    std::vector<double> gi, gf, gg, go;  // steps x hidden
    std::vector<double> c, tc, h;        // steps x hidden
    std::vector<double> y;               // steps x output

    void resize(int steps_, int hidden, int output) {
        steps = steps_;
        const std::size_t sh = static_cast<std::size_t>(steps_) * hidden;
        gi.assign(sh, 0.0);
        gf.assign(sh, 0.0);
        gg.assign(sh, 0.0);
        go.assign(sh, 0.0);
        c.assign(sh, 0.0);
        tc.assign(sh, 0.0);
        h.assign(sh, 0.0);
        y.assign(static_cast<std::size_t>(steps_) * output, 0.0);
    }
};

void forward_flat(const LstmModel& m, const double* x, int steps, ForwardCache& cache) {
    const int in = m.input_dim, hid = m.hidden_dim, out = m.output_dim;
    cache.resize(steps, hid, out);
    const LstmWeights& w = m.weights;
    std::vector<double> a(static_cast<std::size_t>(4) * hid);
    const double* h_prev = nullptr;
    for (int t = 0; t < steps; ++t) {
        const double* xt = x + static_cast<std::size_t>(t) * in;
        double* gi = cache.gi.data() + static_cast<std::size_t>(t) * hid;
        double* gf = cache.gf.data() + static_cast<std::size_t>(t) * hid;
        double* gg = cache.gg.data() + static_cast<std::size_t>(t) * hid;
        double* go = cache.go.data() + static_cast<std::size_t>(t) * hid;
        double* c = cache.c.data() + static_cast<std::size_t>(t) * hid;
        double* tc = cache.tc.data() + static_cast<std::size_t>(t) * hid;
        double* h = cache.h.data() + static_cast<std::size_t>(t) * hid;

        double* ai = a.data();
        double* af = a.data() + hid;
        double* ag = a.data() + 2 * hid;
        double* ao = a.data() + 3 * hid;
        std::copy(w.b_i.begin(), w.b_i.end(), ai);
        std::copy(w.b_f.begin(), w.b_f.end(), af);
        std::copy(w.b_g.begin(), w.b_g.end(), ag);
        std::copy(w.b_o.begin(), w.b_o.end(), ao);
        mv_acc(w.w_i.data(), xt, ai, hid, in);
        mv_acc(w.w_f.data(), xt, af, hid, in);
        mv_acc(w.w_g.data(), xt, ag, hid, in);
        mv_acc(w.w_o.data(), xt, ao, hid, in);
        if (h_prev) {
            mv_acc(w.u_i.data(), h_prev, ai, hid, hid);
            mv_acc(w.u_f.data(), h_prev, af, hid, hid);
            mv_acc(w.u_g.data(), h_prev, ag, hid, hid);
            mv_acc(w.u_o.data(), h_prev, ao, hid, hid);
        }
        const double* c_prev =
            (t > 0) ? cache.c.data() + static_cast<std::size_t>(t - 1) * hid : nullptr;
        for (int k = 0; k < hid; ++k) {
            gi[k] = sigmoid(ai[k]);
            gf[k] = sigmoid(af[k]);
            gg[k] = std::tanh(ag[k]);
            go[k] = sigmoid(ao[k]);
            c[k] = (c_prev ? gf[k] * c_prev[k] : 0.0) + gi[k] * gg[k];
            tc[k] = std::tanh(c[k]);
            h[k] = go[k] * tc[k];
        }
        double* yt = cache.y.data() + static_cast<std::size_t>(t) * out;
        std::copy(w.b_out.begin(), w.b_out.end(), yt);
        mv_acc(w.w_out.data(), h, yt, out, hid);
        h_prev = h;
    }
}

// Accumulates the gradient of the (globally normalized) weighted squared
// error of one sequence. weight_sum is the dataset-wide normalizer.
double backward_flat(const LstmModel& m, const Sequence& seq, const ForwardCache& cache,
                     double weight_sum, LstmWeights& grad) {
    const int in = m.input_dim, hid = m.hidden_dim, out = m.output_dim;
    const int steps = seq.steps;
    const LstmWeights& w = m.weights;
    const bool weighted = !seq.weights.empty();

    double loss = 0.0;
    std::vector<double> dy(static_cast<std::size_t>(steps) * out);
    for (int t = 0; t < steps; ++t) {
        for (int k = 0; k < out; ++k) {
            const std::size_t e = static_cast<std::size_t>(t) * out + k;
            const double diff = cache.y[e] - seq.targets[e];
            const double wgt = weighted ? seq.weights[e] : 1.0;
            loss += wgt * diff * diff;
            dy[e] = 2.0 * wgt * diff / weight_sum;
        }
    }

    std::vector<double> dh(hid), dc(hid), dh_next(hid, 0.0), dc_next(hid, 0.0);
    std::vector<double> di(hid), df(hid), dg(hid), dout(hid);
    for (int t = steps - 1; t >= 0; --t) {
        const double* xt = seq.inputs.data() + static_cast<std::size_t>(t) * in;
        const double* gi = cache.gi.data() + static_cast<std::size_t>(t) * hid;
        const double* gf = cache.gf.data() + static_cast<std::size_t>(t) * hid;
        const double* gg = cache.gg.data() + static_cast<std::size_t>(t) * hid;
        const double* go = cache.go.data() + static_cast<std::size_t>(t) * hid;
        const double* tc = cache.tc.data() + static_cast<std::size_t>(t) * hid;
        const double* h = cache.h.data() + static_cast<std::size_t>(t) * hid;
        const double* h_prev =
            (t > 0) ? cache.h.data() + static_cast<std::size_t>(t - 1) * hid : nullptr;
        const double* c_prev =
            (t > 0) ? cache.c.data() + static_cast<std::size_t>(t - 1) * hid : nullptr;
        const double* dyt = dy.data() + static_cast<std::size_t>(t) * out;

        outer_acc(grad.w_out.data(), dyt, h, out, hid);
        for (int k = 0; k < out; ++k) grad.b_out[static_cast<std::size_t>(k)] += dyt[k];

        std::copy(dh_next.begin(), dh_next.end(), dh.begin());
        mtv_acc(w.w_out.data(), dyt, dh.data(), out, hid);

        for (int k = 0; k < hid; ++k) {
            const double d_o = dh[k] * tc[k] * go[k] * (1.0 - go[k]);
            dc[k] = dc_next[k] + dh[k] * go[k] * (1.0 - tc[k] * tc[k]);
            di[k] = dc[k] * gg[k] * gi[k] * (1.0 - gi[k]);
            dg[k] = dc[k] * gi[k] * (1.0 - gg[k] * gg[k]);
            df[k] = c_prev ? dc[k] * c_prev[k] * gf[k] * (1.0 - gf[k]) : 0.0;
            dout[k] = d_o;
            dc_next[k] = dc[k] * gf[k];
        }

        outer_acc(grad.w_i.data(), di.data(), xt, hid, in);
        outer_acc(grad.w_f.data(), df.data(), xt, hid, in);
        outer_acc(grad.w_g.data(), dg.data(), xt, hid, in);
        outer_acc(grad.w_o.data(), dout.data(), xt, hid, in);
        if (h_prev) {
            outer_acc(grad.u_i.data(), di.data(), h_prev, hid, hid);
            outer_acc(grad.u_f.data(), df.data(), h_prev, hid, hid);
            outer_acc(grad.u_g.data(), dg.data(), h_prev, hid, hid);
            outer_acc(grad.u_o.data(), dout.data(), h_prev, hid, hid);
        }
        for (int k = 0; k < hid; ++k) {
            grad.b_i[static_cast<std::size_t>(k)] += di[k];
            grad.b_f[static_cast<std::size_t>(k)] += df[k];
            grad.b_g[static_cast<std::size_t>(k)] += dg[k];
            grad.b_o[static_cast<std::size_t>(k)] += dout[k];
        }

        std::fill(dh_next.begin(), dh_next.end(), 0.0);
        mtv_acc(w.u_i.data(), di.data(), dh_next.data(), hid, hid);
        mtv_acc(w.u_f.data(), df.data(), dh_next.data(), hid, hid);
        mtv_acc(w.u_g.data(), dg.data(), dh_next.data(), hid, hid);
        mtv_acc(w.u_o.data(), dout.data(), dh_next.data(), hid, hid);
    }
    return loss;
}

// Independent long-double evaluation of the weighted squared error of one
// sequence. Used only by gradient_check: the extended precision pushes the
// finite-difference cancellation floor three orders of magnitude below what
// the production double path can resolve, and the separate implementation
// keeps the numeric oracle decoupled from the code it checks.
long double loss_ld(const LstmModel& m, const Sequence& seq) {
    const int in = m.input_dim, hid = m.hidden_dim, out = m.output_dim;
    const LstmWeights& w = m.weights;
    std::vector<long double> h(static_cast<std::size_t>(hid), 0.0L);
    std::vector<long double> c(static_cast<std::size_t>(hid), 0.0L);
    std::vector<long double> a(static_cast<std::size_t>(4) * hid);
    std::vector<long double> h_next(static_cast<std::size_t>(hid));
    const bool weighted = !seq.weights.empty();
    long double loss = 0.0L, wsum = 0.0L;
    for (int t = 0; t < seq.steps; ++t) {
        const double* xt = seq.inputs.data() + static_cast<std::size_t>(t) * in;
        for (int k = 0; k < hid; ++k) {
            const std::size_t ks = static_cast<std::size_t>(k);
            long double ai = w.b_i[ks], af = w.b_f[ks], ag = w.b_g[ks], ao = w.b_o[ks];
            const std::size_t row = ks * static_cast<std::size_t>(in);
            for (int j = 0; j < in; ++j) {
                const std::size_t js = static_cast<std::size_t>(j);
                ai += static_cast<long double>(w.w_i[row + js]) * xt[j];
                af += static_cast<long double>(w.w_f[row + js]) * xt[j];
                ag += static_cast<long double>(w.w_g[row + js]) * xt[j];
                ao += static_cast<long double>(w.w_o[row + js]) * xt[j];
            }
            const std::size_t hrow = ks * static_cast<std::size_t>(hid);
            for (int j = 0; j < hid; ++j) {
                const std::size_t js = static_cast<std::size_t>(j);
                ai += static_cast<long double>(w.u_i[hrow + js]) * h[js];
                af += static_cast<long double>(w.u_f[hrow + js]) * h[js];
                ag += static_cast<long double>(w.u_g[hrow + js]) * h[js];
                ao += static_cast<long double>(w.u_o[hrow + js]) * h[js];
            }
            const long double gi = 1.0L / (1.0L + std::exp(-ai));
            const long double gf = 1.0L / (1.0L + std::exp(-af));
            const long double gg = std::tanh(ag);
            const long double go = 1.0L / (1.0L + std::exp(-ao));
            c[ks] = gf * c[ks] + gi * gg;
            h_next[ks] = go * std::tanh(c[ks]);
        }
        std::swap(h, h_next);
        for (int k = 0; k < out; ++k) {
            const std::size_t ks = static_cast<std::size_t>(k);
            long double y = w.b_out[ks];
            const std::size_t row = ks * static_cast<std::size_t>(hid);
            for (int j = 0; j < hid; ++j) {
                y += static_cast<long double>(w.w_out[row + static_cast<std::size_t>(j)]) *
                     h[static_cast<std::size_t>(j)];
            }
            const std::size_t e = static_cast<std::size_t>(t) * out + ks;
            const long double diff = y - seq.targets[e];
            const long double wgt = weighted ? seq.weights[e] : 1.0L;
            loss += wgt * diff * diff;
            wsum += wgt;
        }
    }
    return loss / wsum;
}

double dataset_weight_sum(const LstmModel& m, const Dataset& dataset) {
    double total = 0.0;
    for (const Sequence& s : dataset) {
        if (s.weights.empty()) {
            total += static_cast<double>(s.steps) * m.output_dim;
        } else {
            for (double w : s.weights) total += w;
        }
    }
    return total;
}

void check_sequence(const LstmModel& m, const Sequence& s) {
    if (s.steps < 1) throw ShapeError("lstm: sequence must have at least one step");
    if (s.inputs.size() != static_cast<std::size_t>(s.steps) * m.input_dim) {
        throw ShapeError("lstm: input length does not match steps * input_dim");
    }
    if (s.targets.size() != static_cast<std::size_t>(s.steps) * m.output_dim) {
        throw ShapeError("lstm: target length does not match steps * output_dim");
    }
    if (!s.weights.empty() && s.weights.size() != s.targets.size()) {
        throw ShapeError("lstm: weight length does not match target length");
    }
}

}  // namespace

void LstmWeights::resize(int input_dim, int hidden_dim, int output_dim) {
    const std::size_t hi = static_cast<std::size_t>(hidden_dim) * input_dim;
    const std::size_t hh = static_cast<std::size_t>(hidden_dim) * hidden_dim;
    const std::size_t h = static_cast<std::size_t>(hidden_dim);
    w_i.assign(hi, 0.0);
    u_i.assign(hh, 0.0);
    b_i.assign(h, 0.0);
    w_f.assign(hi, 0.0);
    u_f.assign(hh, 0.0);
    b_f.assign(h, 0.0);
    w_g.assign(hi, 0.0);
    u_g.assign(hh, 0.0);
    b_g.assign(h, 0.0);
    w_o.assign(hi, 0.0);
    u_o.assign(hh, 0.0);
    b_o.assign(h, 0.0);
    w_out.assign(static_cast<std::size_t>(output_dim) * hidden_dim, 0.0);
    b_out.assign(static_cast<std::size_t>(output_dim), 0.0);
}

void LstmWeights::fill(double value) {
    for (auto* v : weight_views(*this)) std::fill(v->begin(), v->end(), value);
}

std::vector<std::vector<double>*> weight_views(LstmWeights& w) {
    return {&w.w_i, &w.u_i, &w.b_i, &w.w_f, &w.u_f, &w.b_f, &w.w_g, &w.u_g,
            &w.b_g, &w.w_o, &w.u_o, &w.b_o, &w.w_out, &w.b_out};
}

std::vector<const std::vector<double>*> weight_views(const LstmWeights& w) {
    return {&w.w_i, &w.u_i, &w.b_i, &w.w_f, &w.u_f, &w.b_f, &w.w_g, &w.u_g,
            &w.b_g, &w.w_o, &w.u_o, &w.b_o, &w.w_out, &w.b_out};
}

LstmModel init_lstm(int input_dim, int hidden_dim, int output_dim, std::uint64_t seed) {
    if (input_dim < 1 || hidden_dim < 1 || output_dim < 1) {
        throw InvalidArgument("init_lstm: dimensions must be positive");
    }
    LstmModel m;
    m.input_dim = input_dim;
    m.hidden_dim = hidden_dim;
    m.output_dim = output_dim;
    m.weights.resize(input_dim, hidden_dim, output_dim);
    SplitMix64 g(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    for (auto* v : weight_views(m.weights)) {
        for (double& x : *v) x = (2.0 * g.uniform01() - 1.0) * scale;
    }
    std::fill(m.weights.b_f.begin(), m.weights.b_f.end(), 1.0);
    m.input_scale.assign(static_cast<std::size_t>(input_dim), 1.0);
    m.input_offset.assign(static_cast<std::size_t>(input_dim), 0.0);
    m.output_scale.assign(static_cast<std::size_t>(output_dim), 1.0);
    m.output_offset.assign(static_cast<std::size_t>(output_dim), 0.0);
    return m;
}

void validate(const LstmModel& m) {
    if (m.input_dim < 1 || m.hidden_dim < 1 || m.output_dim < 1) {
        throw ShapeError("lstm model: dimensions must be positive");
    }
    LstmWeights expect;
    expect.resize(m.input_dim, m.hidden_dim, m.output_dim);
    const auto have = weight_views(m.weights);
    const auto want = weight_views(expect);
    for (std::size_t k = 0; k < have.size(); ++k) {
        if (have[k]->size() != want[k]->size()) {
            throw ShapeError("lstm model: weight shape mismatch");
        }
        for (double x : *have[k]) {
            if (!std::isfinite(x)) throw InvalidArgument("lstm model: non-finite parameter");
        }
    }
    if (m.input_scale.size() != static_cast<std::size_t>(m.input_dim) ||
        m.input_offset.size() != static_cast<std::size_t>(m.input_dim) ||
        m.output_scale.size() != static_cast<std::size_t>(m.output_dim) ||
        m.output_offset.size() != static_cast<std::size_t>(m.output_dim)) {
        throw ShapeError("lstm model: normalization vector shape mismatch");
    }
}

std::vector<std::vector<double>> lstm_forward(
    const LstmModel& model, const std::vector<std::vector<double>>& inputs) {
    validate(model);
    if (inputs.empty()) throw ShapeError("lstm_forward: input sequence is empty");
    const int steps = static_cast<int>(inputs.size());
    std::vector<double> flat(static_cast<std::size_t>(steps) * model.input_dim);
    for (int t = 0; t < steps; ++t) {
        if (inputs[static_cast<std::size_t>(t)].size() !=
            static_cast<std::size_t>(model.input_dim)) {
            throw ShapeError("lstm_forward: input vector dimension mismatch");
        }
        std::copy(inputs[static_cast<std::size_t>(t)].begin(),
                  inputs[static_cast<std::size_t>(t)].end(),
                  flat.begin() + static_cast<std::size_t>(t) * model.input_dim);
    }
    ForwardCache cache;
    forward_flat(model, flat.data(), steps, cache);
    std::vector<std::vector<double>> out(static_cast<std::size_t>(steps));
    for (int t = 0; t < steps; ++t) {
        out[static_cast<std::size_t>(t)].assign(
            cache.y.begin() + static_cast<std::size_t>(t) * model.output_dim,
            cache.y.begin() + static_cast<std::size_t>(t + 1) * model.output_dim);
    }
    return out;
}

double lstm_loss(const LstmModel& model, const Dataset& dataset) {
    validate(model);
    if (dataset.empty()) throw InvalidArgument("lstm_loss: dataset is empty");
    const double wsum = dataset_weight_sum(model, dataset);
    if (!(wsum > 0.0)) throw InvalidArgument("lstm_loss: total loss weight is zero");
    double loss = 0.0;
    ForwardCache cache;
    for (const Sequence& s : dataset) {
        check_sequence(model, s);
        forward_flat(model, s.inputs.data(), s.steps, cache);
        const bool weighted = !s.weights.empty();
        for (std::size_t e = 0; e < s.targets.size(); ++e) {
            const double diff = cache.y[e] - s.targets[e];
            loss += (weighted ? s.weights[e] : 1.0) * diff * diff;
        }
    }
    return loss / wsum;
}

double gradient_check(const LstmModel& model, const Sequence& sample, double epsilon) {
    if (!(epsilon >= 1e-8 && epsilon <= 1e-3)) {
        throw InvalidArgument("gradient_check: epsilon must lie in [1e-8, 1e-3]");
    }
    validate(model);
    check_sequence(model, sample);

    LstmModel work = model;
    const Dataset one{sample};
    const double wsum = dataset_weight_sum(work, one);

    LstmWeights grad;
    grad.resize(work.input_dim, work.hidden_dim, work.output_dim);
    ForwardCache cache;
    forward_flat(work, sample.inputs.data(), sample.steps, cache);
    backward_flat(work, sample, cache, wsum, grad);

    double max_rel = 0.0;
    const auto params = weight_views(work.weights);
    const auto grads = weight_views(grad);
    for (std::size_t v = 0; v < params.size(); ++v) {
        for (std::size_t k = 0; k < params[v]->size(); ++k) {
            double& theta = (*params[v])[k];
            const double saved = theta;
            theta = saved + epsilon;
            const long double lp = loss_ld(work, sample);
            theta = saved - epsilon;
            const long double lm = loss_ld(work, sample);
            theta = saved;
            const double numeric =
                static_cast<double>((lp - lm) / (2.0L * epsilon));
            const double analytic = (*grads[v])[k];
            const double denom =
                std::max({std::abs(analytic), std::abs(numeric), 1e-12});
            max_rel = std::max(max_rel, std::abs(analytic - numeric) / denom);
        }
    }
    return max_rel;
}

TrainReport lstm_train(LstmModel& model, const Dataset& dataset, const TrainConfig& cfg) {
    validate(model);
    if (dataset.empty()) throw InvalidArgument("lstm_train: dataset is empty");
    if (cfg.epochs < 1) throw InvalidArgument("lstm_train: epochs must be >= 1");
    if (!(cfg.learning_rate > 0.0)) {
        throw InvalidArgument("lstm_train: learning rate must be positive");
    }
    for (const Sequence& s : dataset) check_sequence(model, s);

    const double wsum = dataset_weight_sum(model, dataset);
    if (!(wsum > 0.0)) throw InvalidArgument("lstm_train: total loss weight is zero");

    TrainReport report;
    report.per_epoch_loss.reserve(static_cast<std::size_t>(cfg.epochs));
    LstmWeights grad;
    grad.resize(model.input_dim, model.hidden_dim, model.output_dim);
    ForwardCache cache;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        grad.fill(0.0);
        double loss = 0.0;
        for (const Sequence& s : dataset) {
            forward_flat(model, s.inputs.data(), s.steps, cache);
            loss += backward_flat(model, s, cache, wsum, grad);
        }
        loss /= wsum;
        if (!std::isfinite(loss)) {
            throw TrainingDiverged(
                "lstm_train: loss became non-finite at epoch " + std::to_string(epoch),
                epoch);
        }
        report.per_epoch_loss.push_back(loss);

        double norm_sq = 0.0;
        for (auto* g : weight_views(grad)) {
            for (double x : *g) norm_sq += x * x;
        }
        double step = cfg.learning_rate;
        if (cfg.gradient_clip > 0.0) {
            const double norm = std::sqrt(norm_sq);
            if (norm > cfg.gradient_clip) step *= cfg.gradient_clip / norm;
        }
        const auto params = weight_views(model.weights);
        const auto grads = weight_views(grad);
        for (std::size_t v = 0; v < params.size(); ++v) {
            for (std::size_t k = 0; k < params[v]->size(); ++k) {
                (*params[v])[k] -= step * (*grads[v])[k];
            }
        }
    }
    report.final_loss = report.per_epoch_loss.back();
    report.epochs_run = cfg.epochs;
    return report;
}

namespace {

std::vector<double> task_inputs(const LstmModel& m, const std::vector<double>& samples,
                                const PnKey& key) {
    const int n = key.n();
    const int steps = static_cast<int>(samples.size());
    std::vector<double> x(static_cast<std::size_t>(steps) * 2);
    for (int t = 0; t < steps; ++t) {
        x[static_cast<std::size_t>(t) * 2] =
            (samples[static_cast<std::size_t>(t)] - m.input_offset[0]) / m.input_scale[0];
        x[static_cast<std::size_t>(t) * 2 + 1] =
            (key.chips[static_cast<std::size_t>(t % n)] - m.input_offset[1]) /
            m.input_scale[1];
    }
    return x;
}

void check_task_frame(const LstmModel& m, const SignalFrame& frame, const PnKey& key,
                      int want_output_dim) {
    validate(m);
    validate(frame);
    if (m.input_dim != 2) {
        throw ShapeError("lstm task: model input_dim must be 2 (sample, chip)");
    }
    if (m.output_dim != want_output_dim) {
        throw ShapeError("lstm task: model output_dim mismatch for this task");
    }
    if (key.n() < 2) throw ShapeError("lstm task: key must have >= 2 chips");
    if (frame.samples.size() % static_cast<std::size_t>(key.n()) != 0 ||
        frame.samples.empty()) {
        throw ShapeError("lstm task: frame length must be a multiple of the key length");
    }
}

}  // namespace

SignalFrame device_encode(const LstmModel& model, const SignalFrame& y, const PnKey& key) {
    check_task_frame(model, y, key, 1);
    const int steps = static_cast<int>(y.samples.size());
    const std::vector<double> x = task_inputs(model, y.samples, key);
    ForwardCache cache;
    forward_flat(model, x.data(), steps, cache);
    SignalFrame w;
    w.sample_rate_hz = y.sample_rate_hz;
    w.samples.resize(static_cast<std::size_t>(steps));
    for (int t = 0; t < steps; ++t) {
        w.samples[static_cast<std::size_t>(t)] =
            cache.y[static_cast<std::size_t>(t)] * model.output_scale[0] +
            model.output_offset[0];
    }
    return w;
}

std::pair<BitStream, FeatureVector> cloud_decode(const LstmModel& model,
                                                 const SignalFrame& w, const PnKey& key) {
    check_task_frame(model, w, key, 1 + kFeatureCount);
    const int n = key.n();
    const int steps = static_cast<int>(w.samples.size());
    const int n_s = steps / n;
    const std::vector<double> x = task_inputs(model, w.samples, key);
    ForwardCache cache;
    forward_flat(model, x.data(), steps, cache);
    const int out = model.output_dim;

    BitStream bits;
    bits.bits.resize(static_cast<std::size_t>(n_s));
    for (int i = 0; i < n_s; ++i) {
        double acc = 0.0;
        for (int t = i * n; t < (i + 1) * n; ++t) {
            acc += cache.y[static_cast<std::size_t>(t) * out];
        }
        bits.bits[static_cast<std::size_t>(i)] = (acc / n) < 0.0 ? -1 : +1;
    }

    const double* last = cache.y.data() + static_cast<std::size_t>(steps - 1) * out;
    double f[kFeatureCount];
    for (int k = 0; k < kFeatureCount; ++k) {
        f[k] = last[1 + k] * model.output_scale[static_cast<std::size_t>(1 + k)] +
               model.output_offset[static_cast<std::size_t>(1 + k)];
    }
    FeatureVector fv;
    fv.spectral_flatness = f[0];
    fv.mean = f[1];
    fv.variance = f[2];
    fv.skewness = f[3];
    fv.kurtosis = f[4];
    return {std::move(bits), fv};
}

namespace {

constexpr const char* kWeightNames[] = {"w_i", "u_i", "b_i", "w_f", "u_f",
                                        "b_f", "w_g", "u_g", "b_g", "w_o",
                                        "u_o", "b_o", "w_out", "b_out"};

}  // namespace

std::string model_to_json(const LstmModel& model) {
    validate(model);
    nlohmann::ordered_json j;
    j["format"] = "aqwm-lstm";
    j["version"] = 1;
    j["input_dim"] = model.input_dim;
    j["hidden_dim"] = model.hidden_dim;
    j["output_dim"] = model.output_dim;
    j["input_scale"] = model.input_scale;
    j["input_offset"] = model.input_offset;
    j["output_scale"] = model.output_scale;
    j["output_offset"] = model.output_offset;
    const auto views = weight_views(model.weights);
    nlohmann::ordered_json wts;
    for (std::size_t k = 0; k < views.size(); ++k) wts[kWeightNames[k]] = *views[k];
    j["weights"] = std::move(wts);
    return j.dump() + "\n";
}

LstmModel model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("lstm model: invalid JSON: ") + e.what(), 0);
    }
    if (j.value("format", "") != "aqwm-lstm") {
        throw ParseError("lstm model: unexpected format field", 0);
    }
    if (j.value("version", 0) != 1) {
        throw ParseError("lstm model: unsupported version", 0);
    }
    LstmModel m;
    m.input_dim = j.at("input_dim").get<int>();
    m.hidden_dim = j.at("hidden_dim").get<int>();
    m.output_dim = j.at("output_dim").get<int>();
    m.weights.resize(m.input_dim, m.hidden_dim, m.output_dim);
    m.input_scale = j.at("input_scale").get<std::vector<double>>();
    m.input_offset = j.at("input_offset").get<std::vector<double>>();
    m.output_scale = j.at("output_scale").get<std::vector<double>>();
    m.output_offset = j.at("output_offset").get<std::vector<double>>();
    const auto views = weight_views(m.weights);
    for (std::size_t k = 0; k < views.size(); ++k) {
        auto vals = j.at("weights").at(kWeightNames[k]).get<std::vector<double>>();
        if (vals.size() != views[k]->size()) {
            throw ParseError("lstm model: weight size mismatch for " +
                                 std::string(kWeightNames[k]),
                             0);
        }
        *views[k] = std::move(vals);
    }
    validate(m);
    return m;
}

void save_model(const LstmModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("save_model: cannot write '" + path + "'");
    out << model_to_json(model);
}

LstmModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_model: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

}  // namespace aqwm
