// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line each. Returns the number of failed criteria.
//
// Criterion 7 needs the real dataset; point ESR_REAL_MANIFEST at a manifest
// produced by `esr import` to enable it, otherwise it is reported as SKIP.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "esr/cli.hpp"
#include "esr/dataset.hpp"
#include "esr/dsp.hpp"
#include "esr/experiment.hpp"
#include "esr/nn.hpp"
#include "esr/training.hpp"

using namespace esr;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(int criterion, const char* name, bool pass, const std::string& detail,
            double seconds) {
    std::printf("[%s] criterion %d: %s — %s (%.1f s)\n", pass ? "PASS" : "FAIL", criterion,
                name, detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

void report_skip(int criterion, const char* name, const std::string& why) {
    std::printf("[SKIP] criterion %d: %s — %s\n", criterion, name, why.c_str());
    std::fflush(stdout);
}

std::string fmt(double v) { return format_fixed(v, 4); }

// ---------------------------------------------------------------- criterion 1

void criterion_filters() {
    Timer timer;
    struct Probe {
        const char* band;
        std::vector<double> cutoffs;       // -3 dB +- 0.5 dB
        std::vector<double> centers;       // gain >= 0.9
        std::vector<double> octave_beyond; // gain <= 0.1
        std::vector<double> deep_stop;     // gain <= 0.05 (band-reject)
    };
    const std::vector<Probe> probes = {
        {"delta", {4}, {0.5}, {8}, {}},
        {"theta", {4, 7}, {std::sqrt(4.0 * 7.0)}, {2, 14}, {}},
        {"alpha", {7, 15}, {std::sqrt(7.0 * 15.0)}, {3.5, 30}, {}},
        {"beta", {15, 31}, {std::sqrt(15.0 * 31.0)}, {7.5, 62}, {}},
        {"gamma", {31}, {55}, {15.5}, {}},
        {"dbg", {4, 15}, {1, 40}, {}, {10}},
    };
    const double db_lo = std::pow(10.0, -3.5 / 20.0);
    const double db_hi = std::pow(10.0, -2.5 / 20.0);
    bool ok = true;
    std::ostringstream detail;
    for (const auto& p : probes) {
        auto design = design_filter(band_by_name(p.band), 4);
        if (max_pole_magnitude(design) >= 1.0) {
            ok = false;
            detail << p.band << " unstable; ";
        }
        for (double f : p.cutoffs) {
            double m = magnitude_response(design, f);
            if (m < db_lo || m > db_hi) {
                ok = false;
                detail << p.band << " cutoff " << f << " Hz at " << fmt(m) << "; ";
            }
        }
        for (double f : p.centers)
            if (magnitude_response(design, f) < 0.9) {
                ok = false;
                detail << p.band << " center " << f << " Hz below 0.9; ";
            }
        for (double f : p.octave_beyond)
            if (magnitude_response(design, f) > 0.1) {
                ok = false;
                detail << p.band << " stopband " << f << " Hz above 0.1; ";
            }
        for (double f : p.deep_stop)
            if (magnitude_response(design, f) > 0.05) {
                ok = false;
                detail << p.band << " reject " << f << " Hz above 0.05; ";
            }
    }
    if (ok) detail << "6 designs within passband/stopband bounds";
    report(1, "filter correctness", ok, detail.str(), timer.seconds());
}

// ---------------------------------------------------------------- criterion 2

void criterion_gradients() {
    Timer timer;
    ModelDims d;
    d.channels = 2;
    d.conv_filters = 8;
    d.lstm_units = 4;
    d.dense_units = 128;
    Model<double> model(d, 3);
    Rng rng(1009);
    const size_t B = 2;
    std::vector<double> x(B * 32 * 2);
    for (auto& v : x) v = rng.normal();
    std::vector<int32_t> labels = {1, 7};

    model.forward(x.data(), B, false);
    ParamSet<double> grads = ParamSet<double>::sized(d);
    grads.fill(0.0);
    model.backward(labels.data(), grads);

    auto loss_now = [&]() {
        const auto& probs = model.forward(x.data(), B, false);
        return nn::cross_entropy<double>(probs.data(), labels.data(), B, 10, nullptr);
    };
    const double eps = 1e-5;
    double worst = 0;
    size_t checked = 0;
    model.params().for_each_array([&](const char* name, std::vector<double>& arr) {
        std::vector<double>* garr = nullptr;
        grads.for_each_array([&](const char* gname, std::vector<double>& g) {
            if (std::string(gname) == name) garr = &g;
        });
        for (size_t i = 0; i < arr.size(); ++i) {
            double keep = arr[i];
            arr[i] = keep + eps;
            double up = loss_now();
            arr[i] = keep - eps;
            double dn = loss_now();
            arr[i] = keep;
            double fd = (up - dn) / (2 * eps);
            double a = (*garr)[i];
            worst = std::max(worst,
                             std::fabs(fd - a) / std::max({std::fabs(fd), std::fabs(a), 1e-8}));
            ++checked;
        }
    });
    bool ok = worst < 1e-4;
    report(2, "gradient fidelity", ok,
           std::to_string(checked) + " parameters, max relative error " +
               format_fixed(worst * 1e6, 2) + "e-6",
           timer.seconds());
}

// ---------------------------------------------------------------- criterion 3

void criterion_shapes() {
    Timer timer;
    bool ok = true;
    std::ostringstream detail;
    for (size_t nc : {2u, 8u, 14u}) {
        ModelDims d;
        d.channels = nc;
        try {
            d.validate();
            Model<float> m(d, 1);
            if (d.conv_len() != 23 || d.seq_len() != 11 || d.lstm_units != 256 ||
                d.dense_units != 128 || d.classes != 10) {
                ok = false;
                detail << "N_c=" << nc << " chain mismatch; ";
            }
            std::vector<float> x(32 * nc, 0.5f);
            if (m.forward(x.data(), 1).size() != 10) {
                ok = false;
                detail << "N_c=" << nc << " output size; ";
            }
        } catch (const std::exception& e) {
            ok = false;
            detail << "N_c=" << nc << ": " << e.what() << "; ";
        }
    }
    if (ok) detail << "32->23->11 time chain and 256->128->10 head for N_c in {2,8,14}";
    report(3, "shape chain", ok, detail.str(), timer.seconds());
}

// ------------------------------------------------------- criteria 4, 5 shared

GridConfig oracle_grid_config() {
    GridConfig cfg;
    cfg.train.max_epochs = 30;  // reduced epoch budget for the desk-scale oracle
    cfg.train.patience = 10;
    cfg.split_mode = SplitMode::RecordingLevel;  // keeps held-out recordings unseen
    cfg.workers = 1;
    return cfg;
}

void criterion_band_oracle() {
    Timer timer;
    bool ok = true;
    std::ostringstream detail;

    // class code inside beta (20-30 Hz), clear of the alpha/delta skirts
    SyntheticSpec beta_coded;
    beta_coded.band_low_hz = 20.0;
    beta_coded.band_high_hz = 30.0;
    auto recs = generate_synthetic(3, Task::Digit, 1007, beta_coded);

    GridConfig cfg = oracle_grid_config();
    cfg.lobes = {"all"};
    cfg.bands = {"beta", "all", "theta", "alpha", "delta"};
    ResultGrid grid = run_grid(recs, Task::Digit, cfg);

    auto need = [&](const std::string& band, bool at_least, double bound) {
        const GridCell* c = grid.find("all", band);
        if (!c || !c->ok) {
            ok = false;
            detail << band << " failed: " << (c ? c->error : "missing") << "; ";
            return;
        }
        bool pass = at_least ? c->accuracy >= bound : c->accuracy <= bound;
        detail << band << "=" << fmt(c->accuracy) << (pass ? " " : "!! ");
        if (!pass) ok = false;
    };
    need("beta", true, 0.90);
    need("all", true, 0.90);
    need("theta", false, 0.20);
    need("alpha", false, 0.20);
    need("delta", false, 0.20);

    // class code inside theta+alpha (6-11 Hz), clear of the band-reject skirts
    SyntheticSpec theta_alpha_coded;
    theta_alpha_coded.band_low_hz = 6.0;
    theta_alpha_coded.band_high_hz = 11.0;
    auto recs2 = generate_synthetic(3, Task::Digit, 1013, theta_alpha_coded);
    GridConfig cfg2 = oracle_grid_config();
    cfg2.lobes = {"all"};
    cfg2.bands = {"dbg"};
    ResultGrid grid2 = run_grid(recs2, Task::Digit, cfg2);
    const GridCell* dbg = grid2.find("all", "dbg");
    if (!dbg || !dbg->ok) {
        ok = false;
        detail << "dbg failed; ";
    } else {
        bool pass = dbg->accuracy <= 0.20;
        detail << "dbg(theta+alpha-coded)=" << fmt(dbg->accuracy) << (pass ? "" : "!!");
        if (!pass) ok = false;
    }
    report(4, "synthetic band oracle", ok, detail.str(), timer.seconds());
}

void criterion_lobe_oracle() {
    Timer timer;
    bool ok = true;
    std::ostringstream detail;

    SyntheticSpec frontal_coded;  // default 20-30 Hz code band
    frontal_coded.code_channels = lobe_by_name("frontal").channels;
    // the unfiltered condition keeps full-spectrum noise and only 8 coded
    // channels, so give this oracle a little more headroom than the band one
    frontal_coded.noise_sigma = 0.15;
    auto recs = generate_synthetic(3, Task::Digit, 1019, frontal_coded);

    GridConfig cfg = oracle_grid_config();
    cfg.lobes = {"frontal", "occipital"};
    cfg.bands = {"all"};
    ResultGrid grid = run_grid(recs, Task::Digit, cfg);

    const GridCell* fr = grid.find("frontal", "all");
    const GridCell* oc = grid.find("occipital", "all");
    if (!fr || !fr->ok || !oc || !oc->ok) {
        ok = false;
        detail << "cell failure";
    } else {
        detail << "frontal=" << fmt(fr->accuracy) << " occipital=" << fmt(oc->accuracy);
        if (fr->accuracy < 0.90 || oc->accuracy > 0.20) ok = false;
    }
    report(5, "synthetic lobe oracle", ok, detail.str(), timer.seconds());
}

// ---------------------------------------------------------------- criterion 6

void criterion_overfit() {
    Timer timer;
    auto recs = generate_synthetic(1, Task::Digit, 1021);
    auto ws = build_windowset(recs, lobe_by_name("all"), 7);

    ModelDims dims;
    dims.channels = 14;
    Model<float> model(dims, 5);
    TrainConfig cfg;
    AdamState<float> opt = AdamState<float>::sized(dims);
    ParamSet<float> grads = ParamSet<float>::sized(dims);
    Rng dropout_rng(derive_seed(cfg.dropout_seed, fnv1a64("overfit")));

    const size_t subset = 200;
    std::vector<size_t> order(subset);
    for (size_t i = 0; i < subset; ++i) order[i] = i;

    double loss_epoch = 1e9;
    size_t epoch = 0;
    std::vector<float> x;
    std::vector<int32_t> y;
    for (epoch = 1; epoch <= 200; ++epoch) {
        double loss_sum = 0;
        for (size_t from = 0; from < subset; from += cfg.batch_size) {
            size_t n = std::min(cfg.batch_size, subset - from);
            gather_batch(ws, order, from, n, x, y);
            model.forward(x.data(), n, true, &dropout_rng);
            grads.fill(0.0f);
            loss_sum += double(model.backward(y.data(), grads)) * double(n);
            adam_step_all(model.params(), grads, opt, cfg);
        }
        loss_epoch = loss_sum / double(subset);
        if (loss_epoch < 0.05) break;
    }
    bool ok = loss_epoch < 0.05;
    report(6, "overfit sanity", ok,
           "train loss " + fmt(loss_epoch) + " after " + std::to_string(epoch) + " epochs",
           timer.seconds());
}

// ---------------------------------------------------------------- criterion 7

void criterion_paper_numbers() {
    const char* manifest_path = std::getenv("ESR_REAL_MANIFEST");
    if (!manifest_path) {
        report_skip(7, "paper-number reproduction",
                    "external dataset not provided (set ESR_REAL_MANIFEST to enable)");
        return;
    }
    Timer timer;
    bool ok = true;
    std::ostringstream detail;
    const struct {
        Task task;
        double target;
    } targets[] = {{Task::Digit, 0.8593}, {Task::Character, 0.8727}, {Task::Image, 0.8751}};

    Manifest manifest = load_manifest(manifest_path);
    for (const auto& [task, target] : targets) {
        auto recs = load_task_recordings(manifest, manifest_path, task);
        if (recs.empty()) {
            detail << task_name(task) << ": no recordings; ";
            ok = false;
            continue;
        }
        GridConfig cfg;  // full training budget, window-level split
        cfg.lobes = {"frontal", "temporal", "occipital", "parietal", "all"};
        cfg.bands = kCanonicalBands;
        cfg.workers = 1;
        ResultGrid grid = run_grid(recs, task, cfg);

        auto acc = [&](const char* lobe, const char* band) {
            const GridCell* c = grid.find(lobe, band);
            return (c && c->ok) ? c->accuracy : -1.0;
        };
        double dbg = acc("all", "dbg"), all = acc("all", "all");
        detail << task_name(task) << ": dbg=" << fmt(dbg) << " (target " << fmt(target)
               << ") ";
        if (std::fabs(dbg - target) > 0.05) ok = false;
        // ordinal findings
        if (!(dbg >= all)) ok = false;
        for (const char* band : {"theta", "alpha", "beta", "gamma"})
            if (!(all >= acc("all", band))) ok = false;
        double worst_pair = std::max(acc("all", "theta"), acc("all", "alpha"));
        for (const char* band : {"delta", "beta", "gamma"})
            if (!(worst_pair <= acc("all", band))) ok = false;
        for (const char* lobe : {"temporal", "occipital", "parietal"})
            if (!(acc("frontal", "all") >= acc(lobe, "all"))) ok = false;
    }
    report(7, "paper-number reproduction", ok, detail.str(), timer.seconds());
}

// ---------------------------------------------------------------- criterion 8

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void criterion_determinism() {
    Timer timer;
    auto base = fs::temp_directory_path() / "esr_acceptance_det";
    fs::remove_all(base);
    auto data = base / "data";
    fs::create_directories(data);

    bool ok = true;
    std::ostringstream detail;
    if (run_cli({"synth", "--subjects", "1", "--seed", "31", "--out-dir", data.string()}) !=
        0) {
        ok = false;
        detail << "synth failed";
    }
    std::vector<std::string> sweep = {"sweep",
                                      "--manifest",
                                      (data / "manifest.json").string(),
                                      "--task",
                                      "digit",
                                      "--lobes",
                                      "temporal,occipital",
                                      "--bands",
                                      "delta,all",
                                      "--max-epochs",
                                      "2",
                                      "--patience",
                                      "2",
                                      "--svg",
                                      "none"};
    for (const char* out : {"out1", "out2"}) {
        auto cmd = sweep;
        cmd.push_back("--out-dir");
        cmd.push_back((base / out).string());
        if (ok && run_cli(cmd) != 0) {
            ok = false;
            detail << "sweep failed";
        }
    }
    if (ok) {
        std::string a = slurp(base / "out1" / "results_digit.csv");
        std::string b = slurp(base / "out2" / "results_digit.csv");
        ok = !a.empty() && a == b;
        detail << (ok ? "two sweeps produced byte-identical CSV ("
                      : "CSV outputs differ (")
               << a.size() << " bytes)";
    }
    report(8, "determinism", ok, detail.str(), timer.seconds());
}

}  // namespace

int main() {
    std::printf("acceptance suite: 8 criteria\n");
    criterion_filters();
    criterion_gradients();
    criterion_shapes();
    criterion_band_oracle();
    criterion_lobe_oracle();
    criterion_overfit();
    criterion_paper_numbers();
    criterion_determinism();
    if (g_failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criterion(s) FAILED\n", g_failures);
    return g_failures;
}
