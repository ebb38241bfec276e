#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace esr {

inline constexpr size_t kNumChannels = 14;
inline constexpr double kSampleRateHz = 128.0;
inline constexpr size_t kWindowLen = 32;  // 250 ms at 128 Hz
inline constexpr size_t kWindowStride = 8;  // 64 ms

// Emotiv EPOC+ montage, fixed order. Index into Recording::samples rows.
inline constexpr std::array<const char*, kNumChannels> kChannelNames = {
    "AF3", "AF4", "F3", "F4", "F7", "F8", "FC5", "FC6",
    "T7",  "T8",  "P7", "P8", "O1", "O2"};

// name -> index; throws std::invalid_argument on unknown name
int channel_index(const std::string& name);

enum class Task { Digit, Character, Image };

std::string task_name(Task t);
Task task_from_name(const std::string& name);  // case-insensitive

// Display labels for the ten classes of each task.
const std::array<std::string, 10>& class_names(Task t);

// One 10 s EEG trial. samples is channel-major: samples[c][t], c in channel
// index order, values in microvolts (units are not interpreted anywhere).
struct Recording {
    std::vector<std::vector<double>> samples;  // [14][S]
    double rate_hz = kSampleRateHz;
    int subject = 0;
    Task task = Task::Digit;
    int label = 0;

    size_t num_samples() const { return samples.empty() ? 0 : samples[0].size(); }

    // shape [14 x S], S >= 32, finite values, label in [0,9]
    void validate() const;
};

uint64_t recording_checksum(const Recording& rec, uint64_t h = 0xcbf29ce484222325ull);

}  // namespace esr
