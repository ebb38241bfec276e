#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "esr/common.hpp"
#include "esr/dataset.hpp"
#include "esr/dsp.hpp"
#include "esr/segmentation.hpp"
#include "esr/training.hpp"

namespace esr {

inline const std::vector<std::string> kCanonicalLobes = {"frontal", "temporal", "occipital",
                                                         "parietal", "all"};
inline const std::vector<std::string> kCanonicalBands = {"delta", "theta", "alpha", "beta",
                                                         "gamma", "dbg",   "all"};

struct GridConfig {
    std::vector<std::string> lobes = kCanonicalLobes;
    std::vector<std::string> bands = kCanonicalBands;
    TrainConfig train;
    SplitMode split_mode = SplitMode::WindowLevel;
    uint64_t split_seed = 4;
    int filter_order = 4;
    BandEdges band_edges = BandEdges::Standard;
    size_t repeat = 1;
    size_t workers = 0;      // 0 = available parallelism
    std::string cache_dir;   // empty disables the windowset cache
    RunLog* log = nullptr;

    uint64_t hash(const std::string& task) const;
};

// One (lobe, band) experiment. repeat > 1 reruns training with offset
// init/shuffle/dropout seeds on the same split; the confusion matrix is the
// sum over repeats, so trace/sum still equals the mean accuracy.
struct GridCell {
    std::string task, lobe, band;
    bool ok = false;
    std::string error;
    double accuracy = 0;
    double accuracy_min = 0, accuracy_max = 0;
    std::vector<double> run_accuracies;
    std::array<std::array<uint64_t, 10>, 10> confusion{};
    std::vector<TrainReport> runs;
    uint64_t seed_init = 0, seed_shuffle = 0, seed_dropout = 0, seed_split = 0;
    size_t test_count = 0;
};

struct ResultGrid {
    std::string task;
    std::vector<std::string> lobes, bands;
    std::vector<GridCell> cells;  // lobe-major
    uint64_t config_hash = 0;
    uint64_t dataset_checksum = 0;
    std::string split_mode = "window";
    size_t repeat = 1;

    const GridCell* find(const std::string& lobe, const std::string& band) const;
};

// Trains one model per grid cell (filter -> segment -> train -> evaluate on
// test). Per-cell failures are recorded in the cell and do not abort the
// sweep. Cells run on a bounded worker pool; results are deterministic under
// fixed seeds regardless of scheduling because every cell derives its own
// seed set from a stable (task, lobe, band) hash.
ResultGrid run_grid(const std::vector<Recording>& recordings, Task task,
                    const GridConfig& cfg);

std::string grid_to_json(const ResultGrid& grid);
ResultGrid grid_from_json(const std::string& text);

// Table-layout CSV: one row per lobe, one column per band, 4 decimal places,
// NA for failed cells.
std::string grid_to_csv(const ResultGrid& grid);

std::string svg_confusion(const GridCell& cell, Task task);

// Writes results_<task>.csv, results_<task>.json and one
// confusion_<task>_<lobe>_<band>.svg per entry of svg_cells.
// Returns the written paths.
std::vector<std::string> emit_reports(const ResultGrid& grid, const std::string& out_dir,
                                      const std::vector<std::pair<std::string, std::string>>&
                                          svg_cells);

}  // namespace esr
