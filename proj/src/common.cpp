#include "esr/common.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

namespace esr {

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return std::string(buf);
}

RunLog::RunLog(const std::string& path, bool verbose) : path_(path), verbose_(verbose) {}

void RunLog::line(const std::string& msg) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!path_.empty()) {
        std::ofstream out(path_, std::ios::app);
        out << msg << '\n';
    }
    if (verbose_) std::cerr << msg << '\n';
}

}  // namespace esr
