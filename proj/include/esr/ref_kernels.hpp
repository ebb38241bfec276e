#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace esr::ref {

// Deliberately plain serial implementations, written directly from the layer
// definitions. The parallel kernels in nn.hpp are checked against these in the
// unit tests, and the benchmark tool compares their speed.

template <typename T>
std::vector<T> conv1d(const std::vector<T>& x, size_t B, size_t t_in, size_t C,
                      const std::vector<T>& w, const std::vector<T>& bias, size_t F,
                      size_t taps) {
    size_t t_out = t_in - taps + 1;
    std::vector<T> y(B * t_out * F);
    for (size_t b = 0; b < B; ++b)
        for (size_t t = 0; t < t_out; ++t)
            for (size_t f = 0; f < F; ++f) {
                T acc = bias[f];
                for (size_t k = 0; k < taps; ++k)
                    for (size_t c = 0; c < C; ++c)
                        acc += x[b * t_in * C + (t + k) * C + c] * w[f * taps * C + k * C + c];
                y[b * t_out * F + t * F + f] = acc;
            }
    return y;
}

template <typename T>
std::vector<T> maxpool2(const std::vector<T>& x, size_t B, size_t t_in, size_t F) {
    size_t t_out = t_in / 2;
    std::vector<T> y(B * t_out * F);
    for (size_t b = 0; b < B; ++b)
        for (size_t t = 0; t < t_out; ++t)
            for (size_t f = 0; f < F; ++f) {
                T a = x[b * t_in * F + 2 * t * F + f];
                T c = x[b * t_in * F + (2 * t + 1) * F + f];
                y[b * t_out * F + t * F + f] = c > a ? c : a;
            }
    return y;
}

template <typename T>
std::vector<T> dense(const std::vector<T>& x, size_t B, size_t in, const std::vector<T>& W,
                     const std::vector<T>& bias, size_t out) {
    std::vector<T> y(B * out);
    for (size_t b = 0; b < B; ++b)
        for (size_t o = 0; o < out; ++o) {
            T acc = bias[o];
            for (size_t i = 0; i < in; ++i) acc += x[b * in + i] * W[o * in + i];
            y[b * out + o] = acc;
        }
    return y;
}

// returns the final hidden state [B][U]; gate rows of W are i,f,g,o
template <typename T>
std::vector<T> lstm_last_hidden(const std::vector<T>& x, size_t B, size_t steps, size_t I,
                                const std::vector<T>& W, const std::vector<T>& bias,
                                size_t U) {
    auto sig = [](T v) { return T(1) / (T(1) + std::exp(-v)); };
    size_t iu = I + U;
    std::vector<T> h(B * U, T(0)), c(B * U, T(0));
    std::vector<T> cat(iu);
    for (size_t t = 0; t < steps; ++t) {
        std::vector<T> h_next(B * U), c_next(B * U);
        for (size_t b = 0; b < B; ++b) {
            for (size_t i = 0; i < I; ++i) cat[i] = x[b * steps * I + t * I + i];
            for (size_t u = 0; u < U; ++u) cat[I + u] = h[b * U + u];
            for (size_t u = 0; u < U; ++u) {
                T pre[4];
                for (int g = 0; g < 4; ++g) {
                    T acc = bias[size_t(g) * U + u];
                    for (size_t k = 0; k < iu; ++k)
                        acc += W[(size_t(g) * U + u) * iu + k] * cat[k];
                    pre[g] = acc;
                }
                T ig = sig(pre[0]), fg = sig(pre[1]), gg = std::tanh(pre[2]), og = sig(pre[3]);
                T cn = ig * gg + fg * c[b * U + u];
                c_next[b * U + u] = cn;
                h_next[b * U + u] = og * std::tanh(cn);
            }
        }
        h = h_next;
        c = c_next;
    }
    return h;
}

// single-pass cascade filter, direct from the difference equations
inline std::vector<double> sos_filter(const std::vector<std::array<double, 5>>& sections,
                                      const std::vector<double>& x) {
    std::vector<double> y = x;
    for (const auto& s : sections) {
        double b0 = s[0], b1 = s[1], b2 = s[2], a1 = s[3], a2 = s[4];
        double w1 = 0, w2 = 0;  // direct form II
        for (double& v : y) {
            double w0 = v - a1 * w1 - a2 * w2;
            v = b0 * w0 + b1 * w1 + b2 * w2;
            w2 = w1;
            w1 = w0;
        }
    }
    return y;
}

}  // namespace esr::ref
