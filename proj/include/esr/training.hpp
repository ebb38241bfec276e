#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "esr/common.hpp"
#include "esr/nn.hpp"
#include "esr/segmentation.hpp"

namespace esr {

struct TrainConfig {
    size_t batch_size = 128;
    double learning_rate = 0.001;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    size_t patience = 10;
    size_t max_epochs = 200;
    uint64_t init_seed = 1;
    uint64_t shuffle_seed = 2;
    uint64_t dropout_seed = 3;

    void validate() const {
        if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
        if (patience < 1) throw std::invalid_argument("patience must be >= 1");
        if (!(learning_rate > 0)) throw std::invalid_argument("learning_rate must be > 0");
        if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
    }
};

template <typename T>
struct AdamState {
    ParamSet<T> m, v;
    long step = 0;

    static AdamState sized(const ModelDims& d) {
        AdamState s;
        s.m = ParamSet<T>::sized(d);
        s.v = ParamSet<T>::sized(d);
        s.m.fill(T(0));
        s.v.fill(T(0));
        return s;
    }
};

// One Adam update with bias correction for a single array. t is the 1-based
// step count shared by all arrays. Throws on non-finite gradients so a broken
// epoch aborts with a diagnostic instead of poisoning the parameters.
template <typename T>
void adam_step(std::vector<T>& param, const std::vector<T>& grad, std::vector<T>& m,
               std::vector<T>& v, long t, const TrainConfig& cfg,
               const char* array_name = "param") {
    if (param.size() != grad.size() || m.size() != grad.size() || v.size() != grad.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    if (t < 1) throw std::invalid_argument("adam_step: step count must be >= 1");
    const T b1 = T(cfg.adam_beta1), b2 = T(cfg.adam_beta2);
    const T corr1 = T(1.0 - std::pow(cfg.adam_beta1, double(t)));
    const T corr2 = T(1.0 - std::pow(cfg.adam_beta2, double(t)));
    const T lr = T(cfg.learning_rate), eps = T(cfg.adam_eps);
    for (size_t i = 0; i < param.size(); ++i) {
        T g = grad[i];
        if (!std::isfinite(double(g)))
            throw std::runtime_error(std::string("non-finite gradient in ") + array_name);
        m[i] = b1 * m[i] + (T(1) - b1) * g;
        v[i] = b2 * v[i] + (T(1) - b2) * g * g;
        T mhat = m[i] / corr1;
        T vhat = v[i] / corr2;
        param[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

template <typename T>
void adam_step_all(ParamSet<T>& w, const ParamSet<T>& g, AdamState<T>& st,
                   const TrainConfig& cfg) {
    ++st.step;
    adam_step(w.conv_w, g.conv_w, st.m.conv_w, st.v.conv_w, st.step, cfg, "conv_w");
    adam_step(w.conv_b, g.conv_b, st.m.conv_b, st.v.conv_b, st.step, cfg, "conv_b");
    adam_step(w.lstm_w, g.lstm_w, st.m.lstm_w, st.v.lstm_w, st.step, cfg, "lstm_w");
    adam_step(w.lstm_b, g.lstm_b, st.m.lstm_b, st.v.lstm_b, st.step, cfg, "lstm_b");
    adam_step(w.d1_w, g.d1_w, st.m.d1_w, st.v.d1_w, st.step, cfg, "d1_w");
    adam_step(w.d1_b, g.d1_b, st.m.d1_b, st.v.d1_b, st.step, cfg, "d1_b");
    adam_step(w.d2_w, g.d2_w, st.m.d2_w, st.v.d2_w, st.step, cfg, "d2_w");
    adam_step(w.d2_b, g.d2_b, st.m.d2_b, st.v.d2_b, st.step, cfg, "d2_b");
}

struct EpochRecord {
    size_t epoch = 0;  // 1-based
    double train_loss = 0;
    double train_accuracy = 0;
    double val_accuracy = 0;
    double seconds = 0;
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    size_t stopping_epoch = 0;
    size_t best_epoch = 0;
    double best_val_accuracy = 0;
    std::string checkpoint_path;  // set by callers that persist the model
};

std::string train_report_to_json(const TrainReport& r);

struct EvalResult {
    double accuracy = 0;
    std::array<std::array<uint64_t, 10>, 10> confusion{};  // [true][predicted]

    uint64_t total() const {
        uint64_t s = 0;
        for (const auto& row : confusion)
            for (uint64_t c : row) s += c;
        return s;
    }
};

template <typename T>
void gather_batch(const WindowSet& ws, const std::vector<size_t>& order, size_t from,
                  size_t count, std::vector<T>& x, std::vector<int32_t>& y) {
    size_t wlen = ws.window_len * ws.n_channels;
    x.resize(count * wlen);
    y.resize(count);
    for (size_t i = 0; i < count; ++i) {
        const float* src = ws.window(order[from + i]);
        T* dst = x.data() + i * wlen;
        for (size_t k = 0; k < wlen; ++k) dst[k] = T(src[k]);
        y[i] = ws.labels[order[from + i]];
    }
}

inline int argmax_class(const float* p, size_t k) {
    int best = 0;
    for (size_t i = 1; i < k; ++i)
        if (p[i] > p[size_t(best)]) best = int(i);
    return best;
}

// accuracy and confusion over one partition; prediction is the argmax of the
// class probabilities, ties resolved to the lowest class index
template <typename T>
EvalResult evaluate(Model<T>& model, const WindowSet& ws, Partition part,
                    size_t batch_size = 256) {
    auto idx = ws.indices(part);
    if (idx.empty()) throw std::invalid_argument("evaluate: empty partition");
    EvalResult res;
    std::vector<T> x;
    std::vector<int32_t> y;
    size_t k = model.dims().classes;
    for (size_t from = 0; from < idx.size(); from += batch_size) {
        size_t n = std::min(batch_size, idx.size() - from);
        gather_batch(ws, idx, from, n, x, y);
        const auto& probs = model.forward(x.data(), n, false);
        for (size_t b = 0; b < n; ++b) {
            const T* row = probs.data() + b * k;
            int pred = 0;
            for (size_t i = 1; i < k; ++i)
                if (row[i] > row[size_t(pred)]) pred = int(i);
            res.confusion[size_t(y[b])][size_t(pred)]++;
        }
    }
    uint64_t correct = 0;
    for (size_t i = 0; i < 10; ++i) correct += res.confusion[i][i];
    res.accuracy = double(correct) / double(res.total());
    return res;
}

// Mini-batch Adam with early stopping on validation accuracy. Improvement is
// strictly-greater; the best-epoch parameters are restored before returning.
template <typename T>
TrainReport train(Model<T>& model, const WindowSet& ws, const TrainConfig& cfg,
                  RunLog* log = nullptr) {
    cfg.validate();
    auto train_idx = ws.indices(Partition::Train);
    auto val_idx = ws.indices(Partition::Val);
    if (train_idx.empty()) throw std::invalid_argument("train: empty train partition");
    if (val_idx.empty()) throw std::invalid_argument("train: empty val partition");

    Rng shuffle_rng(derive_seed(cfg.shuffle_seed, fnv1a64("shuffle")));
    Rng dropout_rng(derive_seed(cfg.dropout_seed, fnv1a64("dropout")));
    AdamState<T> opt = AdamState<T>::sized(model.dims());
    ParamSet<T> grads = ParamSet<T>::sized(model.dims());
    ParamSet<T> best = model.params();

    TrainReport report;
    size_t since_best = 0;
    std::vector<T> x;
    std::vector<int32_t> y;
    for (size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        shuffle_rng.shuffle(train_idx);
        double loss_sum = 0;
        uint64_t correct = 0;
        for (size_t from = 0; from < train_idx.size(); from += cfg.batch_size) {
            size_t n = std::min(cfg.batch_size, train_idx.size() - from);
            gather_batch(ws, train_idx, from, n, x, y);
            const auto& probs = model.forward(x.data(), n, true, &dropout_rng);
            size_t k = model.dims().classes;
            for (size_t b = 0; b < n; ++b) {
                const T* row = probs.data() + b * k;
                int pred = 0;
                for (size_t i = 1; i < k; ++i)
                    if (row[i] > row[size_t(pred)]) pred = int(i);
                if (pred == y[b]) ++correct;
            }
            grads.fill(T(0));
            T loss = model.backward(y.data(), grads);
            if (!std::isfinite(double(loss)))
                throw std::runtime_error("non-finite training loss at epoch " +
                                         std::to_string(epoch));
            loss_sum += double(loss) * double(n);
            adam_step_all(model.params(), grads, opt, cfg);
        }
        double val_acc = evaluate(model, ws, Partition::Val).accuracy;
        auto t1 = std::chrono::steady_clock::now();

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / double(train_idx.size());
        rec.train_accuracy = double(correct) / double(train_idx.size());
        rec.val_accuracy = val_acc;
        rec.seconds = std::chrono::duration<double>(t1 - t0).count();
        report.epochs.push_back(rec);
        if (log)
            log->line("epoch " + std::to_string(epoch) + " train_loss " +
                      format_fixed(rec.train_loss, 4) + " train_acc " +
                      format_fixed(rec.train_accuracy, 4) + " val_acc " +
                      format_fixed(val_acc, 4) + " (" + format_fixed(rec.seconds, 1) + " s)");

        if (report.best_epoch == 0 || val_acc > report.best_val_accuracy) {
            report.best_epoch = epoch;
            report.best_val_accuracy = val_acc;
            best = model.params();
            since_best = 0;
        } else {
            ++since_best;
        }
        report.stopping_epoch = epoch;
        if (since_best >= cfg.patience) break;
    }
    model.params() = best;
    return report;
}

// ---- checkpoint io: versioned binary, shape-prefixed little-endian arrays --

namespace detail {

template <typename V>
void put_pod(std::ofstream& out, V v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <typename V>
V get_pod(std::ifstream& in) {
    V v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(V));
    return v;
}

template <typename T>
void put_array(std::ofstream& out, const char* name, const std::vector<T>& a) {
    uint32_t len = uint32_t(std::strlen(name));
    put_pod(out, len);
    out.write(name, len);
    put_pod(out, uint64_t(a.size()));
    out.write(reinterpret_cast<const char*>(a.data()), long(a.size() * sizeof(T)));
}

template <typename T>
void get_array(std::ifstream& in, const char* name, std::vector<T>& a,
               const std::string& path) {
    uint32_t len = get_pod<uint32_t>(in);
    std::string stored(len, '\0');
    in.read(stored.data(), len);
    if (stored != name)
        throw std::runtime_error("checkpoint " + path + ": expected array '" + name +
                                 "', found '" + stored + "'");
    uint64_t count = get_pod<uint64_t>(in);
    if (count != a.size())
        throw std::runtime_error("checkpoint " + path + ": array '" + name + "' has " +
                                 std::to_string(count) + " values, expected " +
                                 std::to_string(a.size()));
    in.read(reinterpret_cast<char*>(a.data()), long(a.size() * sizeof(T)));
}

}  // namespace detail

inline constexpr char kCheckpointMagic[8] = {'E', 'S', 'R', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void save_checkpoint(const ModelDims& dims, const ParamSet<T>& w, const AdamState<T>& opt,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    detail::put_pod(out, uint32_t(1));  // version
    for (size_t v : {dims.channels, dims.window_len, dims.conv_filters, dims.kernel_taps,
                     dims.lstm_units, dims.dense_units, dims.classes})
        detail::put_pod(out, uint64_t(v));
    detail::put_pod(out, uint8_t(sizeof(T)));
    detail::put_pod(out, int64_t(opt.step));
    auto dump = [&](const ParamSet<T>& p) {
        const_cast<ParamSet<T>&>(p).for_each_array(
            [&](const char* name, std::vector<T>& a) { detail::put_array(out, name, a); });
    };
    dump(w);
    dump(opt.m);
    dump(opt.v);
    if (!out) throw std::runtime_error("write failed: " + path);
}

// Loads into (w, opt) sized for `dims`; throws if the stored shapes disagree
// with the configured model.
template <typename T>
void load_checkpoint(const ModelDims& dims, ParamSet<T>& w, AdamState<T>& opt,
                     const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
        throw std::runtime_error("not a checkpoint file (bad magic): " + path);
    uint32_t version = detail::get_pod<uint32_t>(in);
    if (version != 1)
        throw std::runtime_error("checkpoint version " + std::to_string(version) +
                                 " unsupported (this build reads 1): " + path);
    size_t stored[7];
    for (auto& v : stored) v = size_t(detail::get_pod<uint64_t>(in));
    size_t expect[7] = {dims.channels, dims.window_len, dims.conv_filters, dims.kernel_taps,
                        dims.lstm_units, dims.dense_units, dims.classes};
    for (int i = 0; i < 7; ++i)
        if (stored[i] != expect[i])
            throw std::runtime_error("checkpoint " + path +
                                     " was saved for a different model shape");
    uint8_t dtype = detail::get_pod<uint8_t>(in);
    if (dtype != sizeof(T))
        throw std::runtime_error("checkpoint " + path + " holds " + std::to_string(dtype) +
                                 "-byte floats, expected " + std::to_string(sizeof(T)));
    w = ParamSet<T>::sized(dims);
    opt = AdamState<T>::sized(dims);
    opt.step = long(detail::get_pod<int64_t>(in));
    auto slurp = [&](ParamSet<T>& p) {
        p.for_each_array([&](const char* name, std::vector<T>& a) {
            detail::get_array(in, name, a, path);
        });
    };
    slurp(w);
    slurp(opt.m);
    slurp(opt.v);
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
}

}  // namespace esr
