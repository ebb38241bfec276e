// Compares the OpenMP kernels against the serial reference implementations:
// wall time, speedup and the largest output deviation.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "esr/dsp.hpp"
#include "esr/nn.hpp"
#include "esr/ref_kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace esr;

namespace {

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

double max_abs_diff(const std::vector<float>& a, const std::vector<float>& b) {
    double m = 0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(double(a[i]) - double(b[i])));
    return m;
}

void report(const char* name, double serial_s, double parallel_s, double diff) {
    std::printf("%-22s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   max|diff| %.2e\n",
                name, serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s, diff);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP (serial pragmas ignored)\n");
#endif

    Rng rng(99);
    const int reps = 5;

    {  // conv1d: B=128 windows of 32x14, 64 filters of 10 taps
        size_t B = 128, T = 32, C = 14, F = 64, K = 10;
        std::vector<float> x(B * T * C), w(F * K * C), bias(F);
        for (auto& v : x) v = float(rng.normal());
        for (auto& v : w) v = float(rng.normal());
        std::vector<float> y_par(B * (T - K + 1) * F), y_ref;
        double ts = time_best_of(reps, [&] { y_ref = ref::conv1d(x, B, T, C, w, bias, F, K); });
        double tp = time_best_of(reps, [&] {
            nn::conv1d_forward(x.data(), B, T, C, w.data(), bias.data(), F, K, y_par.data());
        });
        report("conv1d forward", ts, tp, max_abs_diff(y_ref, y_par));
    }

    {  // lstm: 11 steps of 64-dim input, 256 units, batch 128
        size_t B = 128, T = 11, I = 64, U = 256;
        std::vector<float> x(B * T * I), w(4 * U * (I + U)), bias(4 * U);
        for (auto& v : x) v = float(rng.normal());
        for (auto& v : w) v = float(rng.normal() * 0.05);
        std::vector<float> h_ref;
        nn::LstmCache<float> cache;
        double ts =
            time_best_of(reps, [&] { h_ref = ref::lstm_last_hidden(x, B, T, I, w, bias, U); });
        double tp = time_best_of(
            reps, [&] { nn::lstm_forward(x.data(), B, T, I, w.data(), bias.data(), U, cache); });
        std::vector<float> h_par(cache.h_last(), cache.h_last() + B * U);
        report("lstm forward", ts, tp, max_abs_diff(h_ref, h_par));
    }

    {  // dense: 256 -> 128, batch 1024
        size_t B = 1024, in = 256, out = 128;
        std::vector<float> x(B * in), w(out * in), bias(out);
        for (auto& v : x) v = float(rng.normal());
        for (auto& v : w) v = float(rng.normal());
        std::vector<float> y_ref, y_par(B * out);
        double ts = time_best_of(reps, [&] { y_ref = ref::dense(x, B, in, w, bias, out); });
        double tp = time_best_of(reps, [&] {
            nn::dense_forward(x.data(), B, in, w.data(), bias.data(), out, y_par.data());
        });
        report("dense forward", ts, tp, max_abs_diff(y_ref, y_par));
    }

    {  // zero-phase band filter across 14 channels of a 10 s recording
        Recording rec;
        rec.samples.assign(kNumChannels, std::vector<double>(1280));
        for (auto& row : rec.samples)
            for (auto& v : row) v = rng.normal();
        FilterDesign design = design_filter(band_by_name("beta"), 4);
        std::vector<std::vector<double>> ref_out(kNumChannels);
        double ts = time_best_of(reps, [&] {
            for (size_t c = 0; c < kNumChannels; ++c)
                ref_out[c] = filtfilt(design, rec.samples[c]);
        });
        Recording par_out;
        double tp = time_best_of(reps, [&] { par_out = apply_zero_phase(design, rec); });
        double diff = 0;
        for (size_t c = 0; c < kNumChannels; ++c)
            for (size_t t = 0; t < 1280; ++t)
                diff = std::max(diff, std::fabs(ref_out[c][t] - par_out.samples[c][t]));
        report("zero-phase filter", ts, tp, diff);
    }
    return 0;
}
