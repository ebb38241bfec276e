#include "esr/segmentation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace esr {

const std::vector<LobeSpec>& lobe_table() {
    static const std::vector<LobeSpec> lobes = {
        {"frontal", {0, 1, 2, 3, 4, 5, 6, 7}},  // AF3 AF4 F3 F4 F7 F8 FC5 FC6
        {"temporal", {8, 9}},                    // T7 T8
        {"occipital", {12, 13}},                 // O1 O2
        {"parietal", {10, 11}},                  // P7 P8
        {"all", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13}},
    };
    return lobes;
}

LobeSpec lobe_by_name(const std::string& name) {
    std::string s;
    for (char c : name) s.push_back(char(std::tolower(static_cast<unsigned char>(c))));
    for (const auto& l : lobe_table())
        if (l.name == s) return l;
    throw std::invalid_argument("unknown lobe: " + name +
                                " (expected frontal|temporal|occipital|parietal|all)");
}

std::string split_mode_name(SplitMode m) {
    return m == SplitMode::WindowLevel ? "window" : "recording";
}

SplitMode split_mode_from_name(const std::string& name) {
    if (name == "window") return SplitMode::WindowLevel;
    if (name == "recording") return SplitMode::RecordingLevel;
    throw std::invalid_argument("unknown split mode: " + name + " (expected window|recording)");
}

std::vector<float> extract_windows(const Recording& rec, const LobeSpec& lobe) {
    size_t s = rec.num_samples();
    if (s < kWindowLen)
        throw std::runtime_error("recording too short to window: " + std::to_string(s) +
                                 " samples, need at least " + std::to_string(kWindowLen));
    size_t n = window_count(s);
    size_t nc = lobe.channels.size();
    std::vector<float> out(n * kWindowLen * nc);
    for (size_t w = 0; w < n; ++w) {
        size_t start = w * kWindowStride;
        float* dst = out.data() + w * kWindowLen * nc;
        for (size_t t = 0; t < kWindowLen; ++t)
            for (size_t c = 0; c < nc; ++c)
                dst[t * nc + c] = float(rec.samples[size_t(lobe.channels[c])][start + t]);
    }
    return out;
}

std::vector<size_t> WindowSet::indices(Partition p) const {
    std::vector<size_t> out;
    for (size_t i = 0; i < partition.size(); ++i)
        if (partition[i] == p) out.push_back(i);
    return out;
}

namespace {

// test = round(0.2 N); val = round(0.1 of the remainder)
std::pair<size_t, size_t> split_counts(size_t n) {
    size_t n_test = size_t(std::llround(0.2 * double(n)));
    size_t n_val = size_t(std::llround(0.1 * double(n - n_test)));
    return {n_test, n_val};
}

std::vector<Partition> window_level_split(size_t n, Rng& rng) {
    auto [n_test, n_val] = split_counts(n);
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<Partition> part(n, Partition::Train);
    for (size_t i = 0; i < n_test; ++i) part[order[i]] = Partition::Test;
    for (size_t i = n_test; i < n_test + n_val; ++i) part[order[i]] = Partition::Val;
    return part;
}

// Stratified assignment of whole recordings: per-class quotas by largest
// remainder, so the held-out sets stay class-balanced.
std::vector<Partition> recording_level_split(const std::vector<Recording>& recs, Rng& rng) {
    size_t n = recs.size();
    std::map<int, std::vector<size_t>> by_class;
    for (size_t i = 0; i < n; ++i) by_class[recs[i].label].push_back(i);
    for (auto& [label, idx] : by_class) rng.shuffle(idx);

    std::vector<Partition> part(n, Partition::Train);
    auto allocate = [&](size_t target, double frac, Partition tag) {
        // floor quota per class, then distribute the remainder to the classes
        // with the largest fractional parts (ties by class label)
        std::vector<std::pair<double, int>> rema;
        size_t assigned = 0;
        std::map<int, size_t> quota;
        for (auto& [label, idx] : by_class) {
            size_t avail = 0;
            for (size_t i : idx)
                if (part[i] == Partition::Train) ++avail;
            double want = frac * double(avail);
            size_t q = size_t(want);
            quota[label] = q;
            assigned += q;
            rema.push_back({want - double(q), -label});
        }
        std::sort(rema.rbegin(), rema.rend());
        for (auto& [r, neg_label] : rema) {
            if (assigned >= target) break;
            ++quota[-neg_label];
            ++assigned;
        }
        for (auto& [label, idx] : by_class) {
            size_t taken = 0;
            for (size_t i : idx) {
                if (taken >= quota[label]) break;
                if (part[i] == Partition::Train) {
                    part[i] = tag;
                    ++taken;
                }
            }
        }
    };

    auto [n_test, n_val] = split_counts(n);
    allocate(n_test, 0.2, Partition::Test);
    allocate(n_val, 0.1, Partition::Val);
    return part;
}

}  // namespace

WindowSet build_windowset(const std::vector<Recording>& recordings, const LobeSpec& lobe,
                          uint64_t split_seed, SplitMode mode, RunLog* log) {
    if (recordings.empty()) throw std::invalid_argument("build_windowset: no recordings");
    Task task = recordings.front().task;
    for (const auto& r : recordings)
        if (r.task != task)
            throw std::invalid_argument("build_windowset: recordings span multiple tasks");

    WindowSet ws;
    ws.task = task_name(task);
    ws.lobe = lobe.name;
    ws.n_channels = lobe.channels.size();

    std::vector<size_t> rec_of_window;
    for (size_t ri = 0; ri < recordings.size(); ++ri) {
        const auto& rec = recordings[ri];
        auto win = extract_windows(rec, lobe);
        ws.data.insert(ws.data.end(), win.begin(), win.end());
        size_t n = window_count(rec.num_samples());
        for (size_t w = 0; w < n; ++w) {
            ws.labels.push_back(rec.label);
            rec_of_window.push_back(ri);
        }
    }

    Rng rng(split_seed);
    if (mode == SplitMode::WindowLevel) {
        ws.partition = window_level_split(ws.size(), rng);
    } else {
        auto rec_part = recording_level_split(recordings, rng);
        ws.partition.resize(ws.size());
        for (size_t i = 0; i < ws.size(); ++i) ws.partition[i] = rec_part[rec_of_window[i]];
    }

    // class coverage warning
    std::array<size_t, 10> train_per_class{};
    for (size_t i = 0; i < ws.size(); ++i)
        if (ws.partition[i] == Partition::Train) ++train_per_class[size_t(ws.labels[i])];
    std::array<size_t, 10> total_per_class{};
    for (size_t i = 0; i < ws.size(); ++i) ++total_per_class[size_t(ws.labels[i])];
    for (int k = 0; k < 10; ++k) {
        if (total_per_class[size_t(k)] > 0 && train_per_class[size_t(k)] == 0 && log)
            log->line("warning: class " + std::to_string(k) + " absent from train partition (" +
                      ws.task + ", " + ws.lobe + ")");
    }

    // per-channel z-score from train statistics
    size_t nc = ws.n_channels;
    std::vector<double> sum(nc, 0.0), sqsum(nc, 0.0);
    size_t train_samples = 0;
    for (size_t i = 0; i < ws.size(); ++i) {
        if (ws.partition[i] != Partition::Train) continue;
        const float* w = ws.window(i);
        for (size_t t = 0; t < ws.window_len; ++t)
            for (size_t c = 0; c < nc; ++c) {
                double v = w[t * nc + c];
                sum[c] += v;
                sqsum[c] += v * v;
            }
        ++train_samples;
    }
    ws.mean.assign(nc, 0.0);
    ws.stddev.assign(nc, 1.0);
    if (train_samples > 0) {
        double denom = double(train_samples) * double(ws.window_len);
        for (size_t c = 0; c < nc; ++c) {
            ws.mean[c] = sum[c] / denom;
            double var = sqsum[c] / denom - ws.mean[c] * ws.mean[c];
            ws.stddev[c] = var > 1e-24 ? std::sqrt(var) : 1.0;
            if (var <= 1e-24 && log)
                log->line("warning: channel " + std::to_string(c) +
                          " has zero variance in train partition");
        }
    } else if (log) {
        log->line("warning: empty train partition, skipping normalization");
    }

    size_t n_total = ws.size();
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)n_total; ++i) {
        float* w = ws.data.data() + size_t(i) * ws.window_len * nc;
        for (size_t t = 0; t < ws.window_len; ++t)
            for (size_t c = 0; c < nc; ++c)
                w[t * nc + c] = float((double(w[t * nc + c]) - ws.mean[c]) / ws.stddev[c]);
    }
    return ws;
}

namespace {

constexpr char kCacheMagic[8] = {'E', 'S', 'R', 'W', 'I', 'N', 'S', '\0'};
constexpr uint32_t kCacheVersion = 1;

template <typename T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

void put_string(std::ofstream& out, const std::string& s) {
    put<uint32_t>(out, uint32_t(s.size()));
    out.write(s.data(), long(s.size()));
}

std::string get_string(std::ifstream& in) {
    uint32_t n = get<uint32_t>(in);
    std::string s(n, '\0');
    in.read(s.data(), long(n));
    return s;
}

}  // namespace

void save_windowset(const WindowSet& ws, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write window cache: " + path);
    out.write(kCacheMagic, sizeof(kCacheMagic));
    put<uint32_t>(out, kCacheVersion);
    put_string(out, ws.task);
    put_string(out, ws.lobe);
    put<uint32_t>(out, uint32_t(ws.window_len));
    put<uint32_t>(out, uint32_t(ws.n_channels));
    put<uint64_t>(out, uint64_t(ws.size()));
    for (double m : ws.mean) put(out, m);
    for (double s : ws.stddev) put(out, s);
    out.write(reinterpret_cast<const char*>(ws.data.data()),
              long(ws.data.size() * sizeof(float)));
    out.write(reinterpret_cast<const char*>(ws.labels.data()),
              long(ws.labels.size() * sizeof(int32_t)));
    out.write(reinterpret_cast<const char*>(ws.partition.data()), long(ws.partition.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

WindowSet load_windowset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open window cache: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0)
        throw std::runtime_error("not a window cache (bad magic): " + path);
    uint32_t version = get<uint32_t>(in);
    if (version != kCacheVersion)
        throw std::runtime_error("window cache version " + std::to_string(version) +
                                 " unsupported (this build reads " +
                                 std::to_string(kCacheVersion) + "): " + path);
    WindowSet ws;
    ws.task = get_string(in);
    ws.lobe = get_string(in);
    ws.window_len = get<uint32_t>(in);
    ws.n_channels = get<uint32_t>(in);
    uint64_t n = get<uint64_t>(in);
    ws.mean.resize(ws.n_channels);
    ws.stddev.resize(ws.n_channels);
    for (auto& m : ws.mean) m = get<double>(in);
    for (auto& s : ws.stddev) s = get<double>(in);
    ws.data.resize(size_t(n) * ws.window_len * ws.n_channels);
    in.read(reinterpret_cast<char*>(ws.data.data()), long(ws.data.size() * sizeof(float)));
    ws.labels.resize(size_t(n));
    in.read(reinterpret_cast<char*>(ws.labels.data()), long(n * sizeof(int32_t)));
    ws.partition.resize(size_t(n));
    in.read(reinterpret_cast<char*>(ws.partition.data()), long(n));
    if (!in) throw std::runtime_error("truncated window cache: " + path);
    return ws;
}

}  // namespace esr
