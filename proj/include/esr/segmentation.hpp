#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esr/common.hpp"
#include "esr/recording.hpp"

namespace esr {

// Electrode group over one anatomical region. channels are montage indices in
// fixed order; their count is the model's N_c.
struct LobeSpec {
    std::string name;
    std::vector<int> channels;
};

const std::vector<LobeSpec>& lobe_table();
LobeSpec lobe_by_name(const std::string& name);  // case-insensitive

inline size_t window_count(size_t num_samples) {
    return num_samples < kWindowLen ? 0 : (num_samples - kWindowLen) / kWindowStride + 1;
}

// Sliding windows of 32 samples, stride 8, temporal order. Output is
// [n_windows x 32 x N_c] row-major, channel columns in LobeSpec order.
// Throws if the recording is shorter than one window.
std::vector<float> extract_windows(const Recording& rec, const LobeSpec& lobe);

enum class Partition : uint8_t { Train = 0, Val = 1, Test = 2 };

enum class SplitMode { WindowLevel, RecordingLevel };

std::string split_mode_name(SplitMode m);
SplitMode split_mode_from_name(const std::string& name);

// Segmented, channel-selected, z-scored window tensors with aligned labels and
// a train/val/test partition. Normalization statistics come from the train
// partition only.
struct WindowSet {
    std::string task;
    std::string lobe;
    size_t n_channels = 0;
    size_t window_len = kWindowLen;
    std::vector<float> data;  // [N x 32 x n_channels]
    std::vector<int32_t> labels;
    std::vector<Partition> partition;
    std::vector<double> mean;    // per channel, train windows
    std::vector<double> stddev;  // per channel, train windows

    size_t size() const { return labels.size(); }
    const float* window(size_t i) const { return data.data() + i * window_len * n_channels; }
    std::vector<size_t> indices(Partition p) const;
    size_t count(Partition p) const { return indices(p).size(); }

    bool operator==(const WindowSet&) const = default;
};

// Segments every recording, splits test = 20% of windows and val = 10% of the
// remainder (shuffled with split_seed), then z-scores each channel with train
// statistics. RecordingLevel mode assigns whole recordings to partitions
// instead, stratified by class so no class drops out of training when enough
// recordings exist. Warnings (e.g. a class absent from train) are appended to
// the log when one is given.
WindowSet build_windowset(const std::vector<Recording>& recordings, const LobeSpec& lobe,
                          uint64_t split_seed, SplitMode mode = SplitMode::WindowLevel,
                          RunLog* log = nullptr);

// Binary cache so sweeps can skip re-segmentation. Little-endian throughout.
void save_windowset(const WindowSet& ws, const std::string& path);
WindowSet load_windowset(const std::string& path);

}  // namespace esr
