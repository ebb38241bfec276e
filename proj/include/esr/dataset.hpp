#pragma once

#include <string>
#include <vector>

#include "esr/recording.hpp"

namespace esr {

// Canonical recording file: UTF-8 CSV, header row with the 14 channel names in
// montage order, one row per sample, one column per channel.
Recording import_recording(const std::string& path, int subject, Task task, int label);
void export_recording(const Recording& rec, const std::string& path);

struct ManifestEntry {
    std::string path;  // relative to the manifest's directory unless absolute
    int subject = 0;
    Task task = Task::Digit;
    int label = 0;

    bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
    std::string version = "1";
    std::vector<ManifestEntry> entries;

    bool operator==(const Manifest&) const = default;
};

Manifest load_manifest(const std::string& path);
void save_manifest(const Manifest& m, const std::string& path);

// Loads every entry of one task, resolving relative paths against the manifest
// location. Throws if a referenced file is missing or malformed.
std::vector<Recording> load_task_recordings(const Manifest& m, const std::string& manifest_path,
                                            Task task);

uint64_t dataset_checksum(const std::vector<Recording>& recs);

// Synthetic generator: class k is a sinusoid at a class-specific frequency
// inside [band_low_hz, band_high_hz], added on top of white Gaussian noise on
// all 14 channels. The sinusoid is injected only into code_channels (montage
// indices), which lets lobe ablations be tested against a known ground truth.
// The default code band 20-30 Hz sits inside beta with margin from the
// adjacent filters' transition skirts; frequencies at a band edge would leak
// through the -3 dB shoulder of the neighboring band's filter.
struct SyntheticSpec {
    double band_low_hz = 20.0;
    double band_high_hz = 30.0;
    double amplitude = 1.0;
    double noise_sigma = 0.25;
    std::vector<int> code_channels;  // empty = all 14
    size_t num_samples = 1280;       // 10 s at 128 Hz

    double class_frequency(int label) const {
        return band_low_hz + (label + 0.5) * (band_high_hz - band_low_hz) / 10.0;
    }
};

// Emits 10 recordings per subject, one per class, deterministic under seed.
std::vector<Recording> generate_synthetic(int n_subjects, Task task, uint64_t seed,
                                          const SyntheticSpec& spec = {});

}  // namespace esr
