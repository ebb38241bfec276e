#include "esr/recording.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "esr/common.hpp"

namespace esr {

int channel_index(const std::string& name) {
    for (size_t i = 0; i < kNumChannels; ++i)
        if (name == kChannelNames[i]) return int(i);
    throw std::invalid_argument("unknown channel name: " + name);
}

std::string task_name(Task t) {
    switch (t) {
        case Task::Digit: return "digit";
        case Task::Character: return "character";
        case Task::Image: return "image";
    }
    return "digit";
}

Task task_from_name(const std::string& name) {
    std::string s;
    for (char c : name) s.push_back(char(std::tolower(static_cast<unsigned char>(c))));
    if (s == "digit" || s == "digits") return Task::Digit;
    if (s == "character" || s == "characters" || s == "char") return Task::Character;
    if (s == "image" || s == "images") return Task::Image;
    throw std::invalid_argument("unknown task: " + name + " (expected digit|character|image)");
}

const std::array<std::string, 10>& class_names(Task t) {
    static const std::array<std::string, 10> digits = {"0", "1", "2", "3", "4",
                                                       "5", "6", "7", "8", "9"};
    static const std::array<std::string, 10> chars = {"A", "C", "F", "H", "J",
                                                      "M", "P", "S", "T", "Y"};
    static const std::array<std::string, 10> images = {
        "Apple", "Car",  "Dog",     "Gold",  "Mobile",
        "Rose",  "Scooter", "Tiger", "Wallet", "Watch"};
    switch (t) {
        case Task::Digit: return digits;
        case Task::Character: return chars;
        case Task::Image: return images;
    }
    return digits;
}

void Recording::validate() const {
    if (samples.size() != kNumChannels)
        throw std::runtime_error("recording must have exactly 14 channel rows, got " +
                                 std::to_string(samples.size()));
    size_t s = num_samples();
    if (s < kWindowLen)
        throw std::runtime_error("recording too short: " + std::to_string(s) +
                                 " samples, need at least " + std::to_string(kWindowLen));
    for (const auto& row : samples) {
        if (row.size() != s)
            throw std::runtime_error("ragged sample matrix: channel rows differ in length");
        for (double v : row)
            if (!std::isfinite(v)) throw std::runtime_error("non-finite sample value");
    }
    if (rate_hz != kSampleRateHz)
        throw std::runtime_error("unsupported sampling rate " + std::to_string(rate_hz) +
                                 ", expected 128");
    if (label < 0 || label > 9)
        throw std::runtime_error("label out of range [0,9]: " + std::to_string(label));
}

uint64_t recording_checksum(const Recording& rec, uint64_t h) {
    int32_t meta[3] = {rec.subject, int32_t(rec.task), rec.label};
    h = fnv1a64(meta, sizeof(meta), h);
    for (const auto& row : rec.samples) h = fnv1a64(row.data(), row.size() * sizeof(double), h);
    return h;
}

}  // namespace esr
