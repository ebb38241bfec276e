#include "esr/dataset.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "esr/common.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace esr {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_cell(const std::string& cell, const std::string& path, size_t line_no) {
    const char* b = cell.data();
    const char* e = b + cell.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t')) --e;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e)
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": non-numeric cell '" + cell + "'");
    return v;
}

}  // namespace

Recording import_recording(const std::string& path, int subject, Task task, int label) {
    if (label < 0 || label > 9)
        throw std::invalid_argument("label out of range [0,9]: " + std::to_string(label));
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open recording file: " + path);

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path + ":1: empty file, expected header row");
    auto header = split_csv_line(line);
    if (header.size() != kNumChannels)
        throw std::runtime_error(path + ":1: expected 14 columns, got " +
                                 std::to_string(header.size()));
    for (size_t c = 0; c < kNumChannels; ++c) {
        if (header[c] != kChannelNames[c])
            throw std::runtime_error(path + ":1: column " + std::to_string(c + 1) +
                                     " is '" + header[c] + "', expected '" +
                                     kChannelNames[c] + "'");
    }

    Recording rec;
    rec.subject = subject;
    rec.task = task;
    rec.label = label;
    rec.samples.assign(kNumChannels, {});

    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != kNumChannels)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 14 columns, got " +
                                     std::to_string(cells.size()));
        for (size_t c = 0; c < kNumChannels; ++c)
            rec.samples[c].push_back(parse_cell(cells[c], path, line_no));
    }
    rec.validate();
    return rec;
}

void export_recording(const Recording& rec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write recording file: " + path);
    for (size_t c = 0; c < kNumChannels; ++c) out << (c ? "," : "") << kChannelNames[c];
    out << '\n';
    size_t s = rec.num_samples();
    char buf[40];
    for (size_t t = 0; t < s; ++t) {
        for (size_t c = 0; c < kNumChannels; ++c) {
            std::snprintf(buf, sizeof(buf), "%.9g", rec.samples[c][t]);
            if (c) out << ',';
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

Manifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("manifest parse error in " + path + ": " + e.what());
    }
    Manifest m;
    m.version = j.at("version").get<std::string>();
    if (m.version != "1")
        throw std::runtime_error("manifest version mismatch: got '" + m.version +
                                 "', this build reads version '1' (" + path + ")");
    for (const auto& e : j.at("entries")) {
        ManifestEntry me;
        me.path = e.at("path").get<std::string>();
        me.subject = e.at("subject").get<int>();
        me.task = task_from_name(e.at("task").get<std::string>());
        me.label = e.at("label").get<int>();
        m.entries.push_back(std::move(me));
    }
    std::set<std::tuple<int, int, int, std::string>> seen;
    for (const auto& e : m.entries) {
        auto key = std::make_tuple(e.subject, int(e.task), e.label, e.path);
        if (!seen.insert(key).second)
            throw std::runtime_error("duplicate manifest entry: " + e.path);
    }
    return m;
}

void save_manifest(const Manifest& m, const std::string& path) {
    json j;
    j["version"] = m.version;
    j["entries"] = json::array();
    for (const auto& e : m.entries) {
        j["entries"].push_back({{"path", e.path},
                                {"subject", e.subject},
                                {"task", task_name(e.task)},
                                {"label", e.label}});
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<Recording> load_task_recordings(const Manifest& m, const std::string& manifest_path,
                                            Task task) {
    fs::path base = fs::path(manifest_path).parent_path();
    std::vector<Recording> recs;
    for (const auto& e : m.entries) {
        if (e.task != task) continue;
        fs::path p = e.path;
        if (p.is_relative()) p = base / p;
        if (!fs::exists(p))
            throw std::runtime_error("manifest references missing file: " + p.string());
        recs.push_back(import_recording(p.string(), e.subject, e.task, e.label));
    }
    return recs;
}

uint64_t dataset_checksum(const std::vector<Recording>& recs) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& r : recs) h = recording_checksum(r, h);
    return h;
}

std::vector<Recording> generate_synthetic(int n_subjects, Task task, uint64_t seed,
                                          const SyntheticSpec& spec) {
    if (n_subjects < 1) throw std::invalid_argument("n_subjects must be >= 1");
    if (!(spec.band_low_hz > 0.0 && spec.band_low_hz < spec.band_high_hz &&
          spec.band_high_hz < kSampleRateHz / 2.0))
        throw std::invalid_argument("synthetic band must satisfy 0 < low < high < 64 Hz");
    if (spec.num_samples < kWindowLen)
        throw std::invalid_argument("num_samples must be >= 32");

    std::vector<bool> coded(kNumChannels, spec.code_channels.empty());
    for (int c : spec.code_channels) {
        if (c < 0 || c >= int(kNumChannels))
            throw std::invalid_argument("code channel index out of range: " + std::to_string(c));
        coded[size_t(c)] = true;
    }

    std::vector<Recording> out;
    out.reserve(size_t(n_subjects) * 10);
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (int subj = 0; subj < n_subjects; ++subj) {
        for (int label = 0; label < 10; ++label) {
            // per-recording seed, independent of generation order
            uint64_t tag = fnv1a64(task_name(task)) ^ (uint64_t(subj) << 32) ^ uint64_t(label);
            Rng rng(derive_seed(seed, tag));
            Recording rec;
            rec.subject = subj;
            rec.task = task;
            rec.label = label;
            rec.samples.assign(kNumChannels, std::vector<double>(spec.num_samples));
            double f = spec.class_frequency(label);
            double phase = rng.uniform(0.0, two_pi);
            for (size_t c = 0; c < kNumChannels; ++c) {
                auto& row = rec.samples[c];
                for (size_t t = 0; t < spec.num_samples; ++t) {
                    double v = spec.noise_sigma * rng.normal();
                    if (coded[c])
                        v += spec.amplitude * std::sin(two_pi * f * double(t) / kSampleRateHz + phase);
                    row[t] = v;
                }
            }
            out.push_back(std::move(rec));
        }
    }
    return out;
}

}  // namespace esr
