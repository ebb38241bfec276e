#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "esr/common.hpp"

namespace esr {

// Fixed architecture: conv1d (valid, stride 1) -> ReLU -> maxpool 2 ->
// LSTM (last hidden state) -> dense+ReLU -> dropout 0.5 -> dense -> softmax.
// Defaults are the full-size network; tests shrink everything but the taps.
struct ModelDims {
    size_t channels = 14;  // N_c
    size_t window_len = 32;
    size_t conv_filters = 64;
    size_t kernel_taps = 10;
    size_t lstm_units = 256;
    size_t dense_units = 128;
    size_t classes = 10;

    size_t conv_len() const { return window_len - kernel_taps + 1; }  // 23
    size_t seq_len() const { return conv_len() / 2; }                 // 11

    // shape-chain check: 32 -> 23 -> 11 along time, then U -> D -> classes
    void validate() const {
        if (channels == 0) throw std::invalid_argument("channels must be > 0");
        if (window_len < kernel_taps)
            throw std::invalid_argument("window shorter than conv kernel");
        if (conv_len() != window_len - kernel_taps + 1 || seq_len() != conv_len() / 2)
            throw std::logic_error("inconsistent shape chain");
        if (seq_len() == 0) throw std::invalid_argument("pooling leaves no time steps");
        if (conv_filters == 0 || lstm_units == 0 || dense_units == 0 || classes == 0)
            throw std::invalid_argument("zero-sized layer");
    }
};

// The trainable arrays. Weight matrices are stored [out x in] row-major:
//   conv_w  [F][taps][N_c]          conv_b [F]
//   lstm_w  [4U][F+U] (gates i,f,g,o stacked)   lstm_b [4U]
//   d1_w    [D][U]                  d1_b   [D]
//   d2_w    [classes][D]            d2_b   [classes]
template <typename T>
struct ParamSet {
    std::vector<T> conv_w, conv_b;
    std::vector<T> lstm_w, lstm_b;
    std::vector<T> d1_w, d1_b;
    std::vector<T> d2_w, d2_b;

    static ParamSet sized(const ModelDims& d) {
        ParamSet p;
        p.conv_w.resize(d.conv_filters * d.kernel_taps * d.channels);
        p.conv_b.resize(d.conv_filters);
        p.lstm_w.resize(4 * d.lstm_units * (d.conv_filters + d.lstm_units));
        p.lstm_b.resize(4 * d.lstm_units);
        p.d1_w.resize(d.dense_units * d.lstm_units);
        p.d1_b.resize(d.dense_units);
        p.d2_w.resize(d.classes * d.dense_units);
        p.d2_b.resize(d.classes);
        return p;
    }

    template <typename Fn>
    void for_each_array(Fn&& fn) {
        fn("conv_w", conv_w);
        fn("conv_b", conv_b);
        fn("lstm_w", lstm_w);
        fn("lstm_b", lstm_b);
        fn("d1_w", d1_w);
        fn("d1_b", d1_b);
        fn("d2_w", d2_w);
        fn("d2_b", d2_b);
    }

    template <typename Fn>
    void for_each_array(Fn&& fn) const {
        const_cast<ParamSet*>(this)->for_each_array(
            [&](const char* name, std::vector<T>& v) { fn(name, std::as_const(v)); });
    }

    void fill(T v) {
        for_each_array([v](const char*, std::vector<T>& a) {
            std::fill(a.begin(), a.end(), v);
        });
    }
};

namespace nn {

template <typename T>
inline T dot(const T* a, const T* b, size_t n) {
    T s = 0;
#pragma omp simd reduction(+ : s)
    for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

template <typename T>
inline void axpy(T alpha, const T* x, T* y, size_t n) {
#pragma omp simd
    for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
inline T sigmoid(T x) {
    return T(1) / (T(1) + std::exp(-x));
}

// valid convolution along time; x [B][Tin][C] contiguous, so the receptive
// field of output step t is one contiguous run of taps*C values
template <typename T>
void conv1d_forward(const T* x, size_t B, size_t t_in, size_t C, const T* w, const T* bias,
                    size_t F, size_t taps, T* y) {
    size_t t_out = t_in - taps + 1;
    size_t span = taps * C;
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < (long long)B; ++b) {
        const T* xb = x + size_t(b) * t_in * C;
        T* yb = y + size_t(b) * t_out * F;
        for (size_t t = 0; t < t_out; ++t)
            for (size_t f = 0; f < F; ++f)
                yb[t * F + f] = dot(xb + t * C, w + f * span, span) + bias[f];
    }
}

// dy [B][Tout][F]; accumulates into dw/db (caller zeroes), writes dx if given
template <typename T>
void conv1d_backward(const T* x, const T* dy, size_t B, size_t t_in, size_t C, const T* w,
                     size_t F, size_t taps, T* dw, T* db, T* dx) {
    size_t t_out = t_in - taps + 1;
    size_t span = taps * C;
#pragma omp parallel for schedule(static)
    for (long long f = 0; f < (long long)F; ++f) {
        T* dwf = dw + size_t(f) * span;
        T acc_b = 0;
        for (size_t b = 0; b < B; ++b) {
            const T* xb = x + b * t_in * C;
            const T* dyb = dy + b * t_out * F;
            for (size_t t = 0; t < t_out; ++t) {
                T g = dyb[t * F + f];
                if (g != T(0)) axpy(g, xb + t * C, dwf, span);
                acc_b += g;
            }
        }
        db[size_t(f)] += acc_b;
    }
    if (!dx) return;
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < (long long)B; ++b) {
        const T* dyb = dy + size_t(b) * t_out * F;
        T* dxb = dx + size_t(b) * t_in * C;
        for (size_t t = 0; t < t_out; ++t)
            for (size_t f = 0; f < F; ++f) {
                T g = dyb[t * F + f];
                if (g != T(0)) axpy(g, w + f * span, dxb + t * C, span);
            }
    }
}

// non-overlapping max over pairs along time; trailing odd element dropped.
// idx records which element of each pair won (0 or 1) for routing gradients.
template <typename T>
void maxpool2_forward(const T* x, size_t B, size_t t_in, size_t F, T* y, uint8_t* idx) {
    size_t t_out = t_in / 2;
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < (long long)B; ++b) {
        const T* xb = x + size_t(b) * t_in * F;
        T* yb = y + size_t(b) * t_out * F;
        uint8_t* ib = idx + size_t(b) * t_out * F;
        for (size_t t = 0; t < t_out; ++t)
            for (size_t f = 0; f < F; ++f) {
                T a = xb[(2 * t) * F + f];
                T c = xb[(2 * t + 1) * F + f];
                bool second = c > a;
                yb[t * F + f] = second ? c : a;
                ib[t * F + f] = second ? 1 : 0;
            }
    }
}

template <typename T>
void maxpool2_backward(const T* dy, const uint8_t* idx, size_t B, size_t t_in, size_t F,
                       T* dx) {
    size_t t_out = t_in / 2;
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < (long long)B; ++b) {
        const T* dyb = dy + size_t(b) * t_out * F;
        const uint8_t* ib = idx + size_t(b) * t_out * F;
        T* dxb = dx + size_t(b) * t_in * F;
        std::fill(dxb, dxb + t_in * F, T(0));
        for (size_t t = 0; t < t_out; ++t)
            for (size_t f = 0; f < F; ++f)
                dxb[(2 * t + ib[t * F + f]) * F + f] = dyb[t * F + f];
    }
}

// per-step state kept for backpropagation through time
template <typename T>
struct LstmCache {
    size_t B = 0, steps = 0, input = 0, units = 0;
    std::vector<T> concat;  // [steps][B][I+U], input then previous hidden
    std::vector<T> gate_i, gate_f, gate_g, gate_o;  // each [steps][B][U]
    std::vector<T> cell, tanh_cell, hidden;         // each [steps][B][U]

    void resize(size_t b, size_t t, size_t i, size_t u) {
        B = b;
        steps = t;
        input = i;
        units = u;
        concat.assign(t * b * (i + u), T(0));
        for (auto* v : {&gate_i, &gate_f, &gate_g, &gate_o, &cell, &tanh_cell, &hidden})
            v->assign(t * b * u, T(0));
    }
    const T* h_last() const { return hidden.data() + (steps - 1) * B * units; }
};

// standard LSTM recurrence from zero initial state; returns the last hidden
// state via cache.h_last(). W is [4U][I+U] with gate rows i,f,g,o; b is [4U].
template <typename T>
void lstm_forward(const T* x, size_t B, size_t steps, size_t I, const T* W, const T* bias,
                  size_t U, LstmCache<T>& cache) {
    cache.resize(B, steps, I, U);
    size_t iu = I + U;
    std::vector<T> pre(B * 4 * U);
    for (size_t t = 0; t < steps; ++t) {
        T* cat = cache.concat.data() + t * B * iu;
        const T* h_prev = t == 0 ? nullptr : cache.hidden.data() + (t - 1) * B * U;
#pragma omp parallel for schedule(static)
        for (long long b = 0; b < (long long)B; ++b) {
            T* row = cat + size_t(b) * iu;
            const T* xrow = x + size_t(b) * steps * I + t * I;
            for (size_t i = 0; i < I; ++i) row[i] = xrow[i];
            for (size_t u = 0; u < U; ++u) row[I + u] = h_prev ? h_prev[size_t(b) * U + u] : T(0);
        }
#pragma omp parallel for schedule(static)
        for (long long b = 0; b < (long long)B; ++b) {
            const T* row = cat + size_t(b) * iu;
            T* p = pre.data() + size_t(b) * 4 * U;
            for (size_t g = 0; g < 4 * U; ++g) p[g] = dot(row, W + g * iu, iu) + bias[g];
        }
        T* gi = cache.gate_i.data() + t * B * U;
        T* gf = cache.gate_f.data() + t * B * U;
        T* gg = cache.gate_g.data() + t * B * U;
        T* go = cache.gate_o.data() + t * B * U;
        T* ct = cache.cell.data() + t * B * U;
        T* tc = cache.tanh_cell.data() + t * B * U;
        T* ht = cache.hidden.data() + t * B * U;
        const T* c_prev = t == 0 ? nullptr : cache.cell.data() + (t - 1) * B * U;
#pragma omp parallel for schedule(static)
        for (long long b = 0; b < (long long)B; ++b) {
            const T* p = pre.data() + size_t(b) * 4 * U;
            for (size_t u = 0; u < U; ++u) {
                size_t j = size_t(b) * U + u;
                T i_g = sigmoid(p[u]);
                T f_g = sigmoid(p[U + u]);
                T g_g = std::tanh(p[2 * U + u]);
                T o_g = sigmoid(p[3 * U + u]);
                T c = i_g * g_g + (c_prev ? f_g * c_prev[j] : T(0));
                gi[j] = i_g;
                gf[j] = f_g;
                gg[j] = g_g;
                go[j] = o_g;
                ct[j] = c;
                tc[j] = std::tanh(c);
                ht[j] = o_g * tc[j];
            }
        }
    }
}

// dh_last [B][U] is the gradient on the final hidden state. Accumulates into
// dW/db (caller zeroes); writes dx [B][steps][I].
template <typename T>
void lstm_backward(const LstmCache<T>& cache, const T* W, const T* dh_last, T* dW, T* db,
                   T* dx) {
    size_t B = cache.B, steps = cache.steps, I = cache.input, U = cache.units;
    size_t iu = I + U;
    std::vector<T> dh(B * U), dc(B * U, T(0)), da(B * 4 * U), dcat(B * iu);
    std::copy(dh_last, dh_last + B * U, dh.begin());
    for (size_t t = steps; t-- > 0;) {
        const T* gi = cache.gate_i.data() + t * B * U;
        const T* gf = cache.gate_f.data() + t * B * U;
        const T* gg = cache.gate_g.data() + t * B * U;
        const T* go = cache.gate_o.data() + t * B * U;
        const T* tc = cache.tanh_cell.data() + t * B * U;
        const T* c_prev = t == 0 ? nullptr : cache.cell.data() + (t - 1) * B * U;
        const T* cat = cache.concat.data() + t * B * iu;
#pragma omp parallel for schedule(static)
        for (long long b = 0; b < (long long)B; ++b) {
            for (size_t u = 0; u < U; ++u) {
                size_t j = size_t(b) * U + u;
                T dht = dh[j];
                T dct = dc[j] + dht * go[j] * (T(1) - tc[j] * tc[j]);
                T di = dct * gg[j];
                T df = c_prev ? dct * c_prev[j] : T(0);
                T dg = dct * gi[j];
                T do_ = dht * tc[j];
                T* dab = da.data() + size_t(b) * 4 * U;
                dab[u] = di * gi[j] * (T(1) - gi[j]);
                dab[U + u] = df * gf[j] * (T(1) - gf[j]);
                dab[2 * U + u] = dg * (T(1) - gg[j] * gg[j]);
                dab[3 * U + u] = do_ * go[j] * (T(1) - go[j]);
                dc[j] = dct * gf[j];  // flows to t-1
            }
        }
#pragma omp parallel for schedule(static)
        for (long long g = 0; g < (long long)(4 * U); ++g) {
            T* dWg = dW + size_t(g) * iu;
            T acc = 0;
            for (size_t b = 0; b < B; ++b) {
                T a = da[b * 4 * U + size_t(g)];
                if (a != T(0)) axpy(a, cat + b * iu, dWg, iu);
                acc += a;
            }
            db[size_t(g)] += acc;
        }
#pragma omp parallel for schedule(static)
        for (long long b = 0; b < (long long)B; ++b) {
            T* row = dcat.data() + size_t(b) * iu;
            std::fill(row, row + iu, T(0));
            const T* dab = da.data() + size_t(b) * 4 * U;
            for (size_t g = 0; g < 4 * U; ++g)
                if (dab[g] != T(0)) axpy(dab[g], W + g * iu, row, iu);
            T* dxrow = dx + size_t(b) * steps * I + t * I;
            for (size_t i = 0; i < I; ++i) dxrow[i] = row[i];
            for (size_t u = 0; u < U; ++u) dh[size_t(b) * U + u] = row[I + u];
        }
    }
}

// y [B][out] = x [B][in] . W^T + b, W stored [out][in]
template <typename T>
void dense_forward(const T* x, size_t B, size_t in, const T* W, const T* bias, size_t out,
                   T* y) {
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < (long long)B; ++b) {
        const T* xb = x + size_t(b) * in;
        T* yb = y + size_t(b) * out;
        for (size_t o = 0; o < out; ++o) yb[o] = dot(xb, W + o * in, in) + bias[o];
    }
}

template <typename T>
void dense_backward(const T* x, const T* dy, size_t B, size_t in, const T* W, size_t out,
                    T* dW, T* db, T* dx) {
#pragma omp parallel for schedule(static)
    for (long long o = 0; o < (long long)out; ++o) {
        T* dWo = dW + size_t(o) * in;
        T acc = 0;
        for (size_t b = 0; b < B; ++b) {
            T g = dy[b * out + size_t(o)];
            if (g != T(0)) axpy(g, x + b * in, dWo, in);
            acc += g;
        }
        db[size_t(o)] += acc;
    }
    if (!dx) return;
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < (long long)B; ++b) {
        T* dxb = dx + size_t(b) * in;
        std::fill(dxb, dxb + in, T(0));
        for (size_t o = 0; o < out; ++o) {
            T g = dy[size_t(b) * out + o];
            if (g != T(0)) axpy(g, W + o * in, dxb, in);
        }
    }
}

template <typename T>
void softmax_rows(T* x, size_t rows, size_t cols) {
#pragma omp parallel for schedule(static)
    for (long long r = 0; r < (long long)rows; ++r) {
        T* row = x + size_t(r) * cols;
        T mx = row[0];
        for (size_t c = 1; c < cols; ++c) mx = std::max(mx, row[c]);
        T sum = 0;
        for (size_t c = 0; c < cols; ++c) {
            row[c] = std::exp(row[c] - mx);
            sum += row[c];
        }
        for (size_t c = 0; c < cols; ++c) row[c] /= sum;
    }
}

// mean negative log probability of the true class; epsilon guards the log.
// dlogits (optional) gets the softmax+CE composite gradient (p - onehot)/B.
template <typename T>
T cross_entropy(const T* probs, const int32_t* labels, size_t B, size_t K, T* dlogits) {
    T loss = 0;
    for (size_t b = 0; b < B; ++b) {
        T p = probs[b * K + size_t(labels[b])];
        loss -= std::log(std::max(p, T(1e-12)));
    }
    loss /= T(B);
    if (dlogits) {
        for (size_t b = 0; b < B; ++b)
            for (size_t k = 0; k < K; ++k)
                dlogits[b * K + k] =
                    (probs[b * K + k] - (int32_t(k) == labels[b] ? T(1) : T(0))) / T(B);
    }
    return loss;
}

// inverted-scale dropout factors: 0 with probability rate, else 1/(1-rate)
template <typename T>
void dropout_scale(Rng& rng, double rate, T* scale, size_t n) {
    T keep = T(1.0 / (1.0 - rate));
    for (size_t i = 0; i < n; ++i) scale[i] = rng.uniform() < rate ? T(0) : keep;
}

}  // namespace nn

// Composed network with gradient support. One instance is not thread-safe;
// the kernels parallelize internally across the batch.
template <typename T>
class Model {
public:
    explicit Model(const ModelDims& dims, uint64_t init_seed = 1) : dims_(dims) {
        dims_.validate();
        w_ = ParamSet<T>::sized(dims_);
        init_params(init_seed);
    }

    const ModelDims& dims() const { return dims_; }
    ParamSet<T>& params() { return w_; }
    const ParamSet<T>& params() const { return w_; }

    // x is [B][32][N_c]; returns probabilities [B][classes]. When training is
    // true, a dropout mask is drawn from rng (or taken from fixed_scale).
    const std::vector<T>& forward(const T* x, size_t B, bool training = false,
                                  Rng* rng = nullptr, const T* fixed_scale = nullptr) {
        if (B == 0) throw std::invalid_argument("empty batch");
        const auto& d = dims_;
        size_t tc = d.conv_len(), tp = d.seq_len();
        x_.assign(x, x + B * d.window_len * d.channels);
        conv_pre_.resize(B * tc * d.conv_filters);
        conv_act_.resize(B * tc * d.conv_filters);
        pool_out_.resize(B * tp * d.conv_filters);
        pool_idx_.resize(B * tp * d.conv_filters);
        d1_pre_.resize(B * d.dense_units);
        d1_act_.resize(B * d.dense_units);
        drop_scale_.resize(B * d.dense_units);
        dropped_.resize(B * d.dense_units);
        probs_.resize(B * d.classes);
        batch_ = B;

        nn::conv1d_forward(x_.data(), B, d.window_len, d.channels, w_.conv_w.data(),
                           w_.conv_b.data(), d.conv_filters, d.kernel_taps, conv_pre_.data());
        for (size_t i = 0; i < conv_pre_.size(); ++i)
            conv_act_[i] = conv_pre_[i] > T(0) ? conv_pre_[i] : T(0);
        nn::maxpool2_forward(conv_act_.data(), B, tc, d.conv_filters, pool_out_.data(),
                             pool_idx_.data());
        nn::lstm_forward(pool_out_.data(), B, tp, d.conv_filters, w_.lstm_w.data(),
                         w_.lstm_b.data(), d.lstm_units, lstm_);
        nn::dense_forward(lstm_.h_last(), B, d.lstm_units, w_.d1_w.data(), w_.d1_b.data(),
                          d.dense_units, d1_pre_.data());
        for (size_t i = 0; i < d1_pre_.size(); ++i)
            d1_act_[i] = d1_pre_[i] > T(0) ? d1_pre_[i] : T(0);

        if (training && fixed_scale) {
            std::copy(fixed_scale, fixed_scale + drop_scale_.size(), drop_scale_.begin());
        } else if (training) {
            if (!rng) throw std::invalid_argument("training forward needs a dropout rng");
            nn::dropout_scale(*rng, 0.5, drop_scale_.data(), drop_scale_.size());
        } else {
            std::fill(drop_scale_.begin(), drop_scale_.end(), T(1));
        }
        for (size_t i = 0; i < dropped_.size(); ++i) dropped_[i] = d1_act_[i] * drop_scale_[i];

        nn::dense_forward(dropped_.data(), B, d.dense_units, w_.d2_w.data(), w_.d2_b.data(),
                          d.classes, probs_.data());
        nn::softmax_rows(probs_.data(), B, d.classes);
        forward_done_ = true;
        return probs_;
    }

    const std::vector<T>& probabilities() const { return probs_; }

    // Cross-entropy loss of the recorded forward pass and gradients for every
    // parameter array (accumulated into grads, caller zeroes). Optionally
    // writes the gradient w.r.t. the input batch.
    T backward(const int32_t* labels, ParamSet<T>& grads, T* dx = nullptr) {
        if (!forward_done_) throw std::logic_error("backward called before forward");
        const auto& d = dims_;
        size_t B = batch_, tc = d.conv_len(), tp = d.seq_len();

        std::vector<T> dlogits(B * d.classes);
        T loss = nn::cross_entropy(probs_.data(), labels, B, d.classes, dlogits.data());

        std::vector<T> d_dropped(B * d.dense_units);
        nn::dense_backward(dropped_.data(), dlogits.data(), B, d.dense_units,
                           w_.d2_w.data(), d.classes, grads.d2_w.data(), grads.d2_b.data(),
                           d_dropped.data());
        std::vector<T> d_d1(B * d.dense_units);
        for (size_t i = 0; i < d_d1.size(); ++i)
            d_d1[i] = d_dropped[i] * drop_scale_[i] * (d1_pre_[i] > T(0) ? T(1) : T(0));

        std::vector<T> dh(B * d.lstm_units);
        nn::dense_backward(lstm_.h_last(), d_d1.data(), B, d.lstm_units, w_.d1_w.data(),
                           d.dense_units, grads.d1_w.data(), grads.d1_b.data(), dh.data());

        std::vector<T> dpool(B * tp * d.conv_filters);
        nn::lstm_backward(lstm_, w_.lstm_w.data(), dh.data(), grads.lstm_w.data(),
                          grads.lstm_b.data(), dpool.data());

        std::vector<T> dconv_act(B * tc * d.conv_filters);
        nn::maxpool2_backward(dpool.data(), pool_idx_.data(), B, tc, d.conv_filters,
                              dconv_act.data());
        for (size_t i = 0; i < dconv_act.size(); ++i)
            if (conv_pre_[i] <= T(0)) dconv_act[i] = T(0);

        nn::conv1d_backward(x_.data(), dconv_act.data(), B, d.window_len, d.channels,
                            w_.conv_w.data(), d.conv_filters, d.kernel_taps,
                            grads.conv_w.data(), grads.conv_b.data(), dx);
        return loss;
    }

private:
    void init_params(uint64_t seed) {
        Rng rng(derive_seed(seed, fnv1a64("model-init")));
        const auto& d = dims_;
        auto glorot = [&](std::vector<T>& a, size_t fan_in, size_t fan_out) {
            double lim = std::sqrt(6.0 / double(fan_in + fan_out));
            for (auto& v : a) v = T(rng.uniform(-lim, lim));
        };
        glorot(w_.conv_w, d.kernel_taps * d.channels, d.kernel_taps * d.conv_filters);
        glorot(w_.lstm_w, d.conv_filters + d.lstm_units, d.lstm_units);
        glorot(w_.d1_w, d.lstm_units, d.dense_units);
        glorot(w_.d2_w, d.dense_units, d.classes);
        std::fill(w_.conv_b.begin(), w_.conv_b.end(), T(0));
        std::fill(w_.lstm_b.begin(), w_.lstm_b.end(), T(0));
        // forget-gate bias starts at 1 so early training does not flush state
        for (size_t u = 0; u < d.lstm_units; ++u) w_.lstm_b[d.lstm_units + u] = T(1);
        std::fill(w_.d1_b.begin(), w_.d1_b.end(), T(0));
        std::fill(w_.d2_b.begin(), w_.d2_b.end(), T(0));
    }

    ModelDims dims_;
    ParamSet<T> w_;
    size_t batch_ = 0;
    bool forward_done_ = false;

    std::vector<T> x_, conv_pre_, conv_act_, pool_out_;
    std::vector<uint8_t> pool_idx_;
    nn::LstmCache<T> lstm_;
    std::vector<T> d1_pre_, d1_act_, drop_scale_, dropped_, probs_;
};

}  // namespace esr
