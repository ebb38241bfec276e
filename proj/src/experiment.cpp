#include "esr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace esr {

uint64_t GridConfig::hash(const std::string& task) const {
    std::ostringstream s;
    s << "task=" << task << ";lobes=";
    for (const auto& l : lobes) s << l << ',';
    s << ";bands=";
    for (const auto& b : bands) s << b << ',';
    s << ";split=" << split_mode_name(split_mode) << ";split_seed=" << split_seed
      << ";order=" << filter_order
      << ";edges=" << (band_edges == BandEdges::Standard ? "standard" : "alternate")
      << ";repeat=" << repeat << ";batch=" << train.batch_size << ";lr=" << train.learning_rate
      << ";b1=" << train.adam_beta1 << ";b2=" << train.adam_beta2 << ";eps=" << train.adam_eps
      << ";patience=" << train.patience << ";max_epochs=" << train.max_epochs
      << ";seeds=" << train.init_seed << ',' << train.shuffle_seed << ','
      << train.dropout_seed;
    return fnv1a64(s.str());
}

const GridCell* ResultGrid::find(const std::string& lobe, const std::string& band) const {
    for (const auto& c : cells)
        if (c.lobe == lobe && c.band == band) return &c;
    return nullptr;
}

namespace {

GridCell run_cell(const std::vector<Recording>& recordings, Task task,
                  const std::string& lobe_name, const std::string& band_name,
                  const GridConfig& cfg, uint64_t dataset_hash) {
    GridCell cell;
    cell.task = task_name(task);
    cell.lobe = lobe_name;
    cell.band = band_name;

    uint64_t tag = fnv1a64(cell.task + ":" + lobe_name + ":" + band_name);
    cell.seed_split = derive_seed(cfg.split_seed, tag);

    try {
        if (recordings.empty()) throw std::runtime_error("no recordings for task " + cell.task);
        LobeSpec lobe = lobe_by_name(lobe_name);
        BandSpec band = band_by_name(band_name, cfg.band_edges);

        WindowSet ws;
        bool have_ws = false;
        std::string cache_path;
        if (!cfg.cache_dir.empty()) {
            std::ostringstream key;
            key << cell.task << '|' << lobe_name << '|' << band_name << '|' << cell.seed_split
                << '|' << split_mode_name(cfg.split_mode) << '|' << cfg.filter_order << '|'
                << (cfg.band_edges == BandEdges::Standard ? "standard" : "alternate") << '|'
                << dataset_hash;
            char hex[32];
            std::snprintf(hex, sizeof(hex), "%016llx",
                          (unsigned long long)fnv1a64(key.str()));
            cache_path = (fs::path(cfg.cache_dir) / ("ws_" + std::string(hex) + ".bin")).string();
            if (fs::exists(cache_path)) {
                ws = load_windowset(cache_path);
                have_ws = true;
                if (cfg.log) cfg.log->line("cell " + lobe_name + " / " + band_name +
                                           ": windowset from cache");
            }
        }
        if (!have_ws) {
            if (band.kind == FilterKind::Identity) {
                ws = build_windowset(recordings, lobe, cell.seed_split, cfg.split_mode,
                                     cfg.log);
            } else {
                FilterDesign design = design_filter(band, cfg.filter_order);
                std::vector<Recording> filtered;
                filtered.reserve(recordings.size());
                for (const auto& r : recordings) filtered.push_back(apply_zero_phase(design, r));
                ws = build_windowset(filtered, lobe, cell.seed_split, cfg.split_mode, cfg.log);
            }
            if (!cache_path.empty()) save_windowset(ws, cache_path);
        }

        ModelDims dims;
        dims.channels = lobe.channels.size();
        for (size_t rep = 0; rep < std::max<size_t>(1, cfg.repeat); ++rep) {
            uint64_t rep_tag = fnv1a64(cell.task + ":" + lobe_name + ":" + band_name +
                                       ":rep" + std::to_string(rep));
            TrainConfig tc = cfg.train;
            tc.init_seed = derive_seed(cfg.train.init_seed, rep_tag);
            tc.shuffle_seed = derive_seed(cfg.train.shuffle_seed, rep_tag);
            tc.dropout_seed = derive_seed(cfg.train.dropout_seed, rep_tag);
            if (rep == 0) {
                cell.seed_init = tc.init_seed;
                cell.seed_shuffle = tc.shuffle_seed;
                cell.seed_dropout = tc.dropout_seed;
            }

            Model<float> model(dims, tc.init_seed);
            TrainReport report = train(model, ws, tc, cfg.log);
            EvalResult ev = evaluate(model, ws, Partition::Test);
            cell.run_accuracies.push_back(ev.accuracy);
            for (size_t i = 0; i < 10; ++i)
                for (size_t j = 0; j < 10; ++j) cell.confusion[i][j] += ev.confusion[i][j];
            cell.runs.push_back(std::move(report));
            cell.test_count = ws.count(Partition::Test);
        }
        double sum = 0;
        cell.accuracy_min = cell.run_accuracies.front();
        cell.accuracy_max = cell.run_accuracies.front();
        for (double a : cell.run_accuracies) {
            sum += a;
            cell.accuracy_min = std::min(cell.accuracy_min, a);
            cell.accuracy_max = std::max(cell.accuracy_max, a);
        }
        cell.accuracy = sum / double(cell.run_accuracies.size());
        cell.ok = true;
    } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
    }
    return cell;
}

}  // namespace

ResultGrid run_grid(const std::vector<Recording>& recordings, Task task,
                    const GridConfig& cfg) {
    for (const auto& r : recordings)
        if (r.task != task)
            throw std::invalid_argument("run_grid: recording from a different task present");

    ResultGrid grid;
    grid.task = task_name(task);
    grid.lobes = cfg.lobes;
    grid.bands = cfg.bands;
    grid.split_mode = split_mode_name(cfg.split_mode);
    grid.repeat = std::max<size_t>(1, cfg.repeat);
    grid.dataset_checksum = dataset_checksum(recordings);
    grid.config_hash = cfg.hash(grid.task);

    std::vector<std::pair<std::string, std::string>> jobs;
    for (const auto& l : cfg.lobes)
        for (const auto& b : cfg.bands) jobs.emplace_back(l, b);
    grid.cells.resize(jobs.size());

    size_t hw = std::max<size_t>(1, std::thread::hardware_concurrency());
    size_t pool = cfg.workers == 0 ? hw : cfg.workers;
    pool = std::min(pool, jobs.size());
    pool = std::max<size_t>(1, pool);
#ifdef _OPENMP
    int omp_threads = int(std::max<size_t>(1, hw / pool));
#endif

    std::atomic<size_t> next{0};
    auto worker = [&]() {
#ifdef _OPENMP
        omp_set_num_threads(omp_threads);
#endif
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            if (cfg.log)
                cfg.log->line("cell start: " + jobs[i].first + " / " + jobs[i].second);
            grid.cells[i] =
                run_cell(recordings, task, jobs[i].first, jobs[i].second, cfg,
                         grid.dataset_checksum);
            const GridCell& c = grid.cells[i];
            if (cfg.log) {
                if (c.ok)
                    cfg.log->line("cell done: " + c.lobe + " / " + c.band + " accuracy " +
                                  format_fixed(c.accuracy, 4));
                else
                    cfg.log->line("cell failed: " + c.lobe + " / " + c.band + ": " + c.error);
            }
        }
    };

    if (pool == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (size_t i = 0; i < pool; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    return grid;
}

std::string grid_to_csv(const ResultGrid& grid) {
    std::ostringstream out;
    out << "part/band";
    std::vector<std::string> bands, lobes;
    for (const auto& b : kCanonicalBands)
        if (std::find(grid.bands.begin(), grid.bands.end(), b) != grid.bands.end())
            bands.push_back(b);
    for (const auto& l : kCanonicalLobes)
        if (std::find(grid.lobes.begin(), grid.lobes.end(), l) != grid.lobes.end())
            lobes.push_back(l);
    for (const auto& b : bands) out << ',' << b;
    out << '\n';
    for (const auto& l : lobes) {
        out << l;
        for (const auto& b : bands) {
            const GridCell* c = grid.find(l, b);
            out << ',' << (c && c->ok ? format_fixed(c->accuracy, 4) : "NA");
        }
        out << '\n';
    }
    return out.str();
}

namespace {

json cell_to_json(const GridCell& c) {
    json j;
    j["task"] = c.task;
    j["lobe"] = c.lobe;
    j["band"] = c.band;
    j["ok"] = c.ok;
    if (!c.ok) j["error"] = c.error;
    j["accuracy"] = c.accuracy;
    j["accuracy_min"] = c.accuracy_min;
    j["accuracy_max"] = c.accuracy_max;
    j["run_accuracies"] = c.run_accuracies;
    j["test_count"] = c.test_count;
    j["seeds"] = {{"init", c.seed_init},
                  {"shuffle", c.seed_shuffle},
                  {"dropout", c.seed_dropout},
                  {"split", c.seed_split}};
    json conf = json::array();
    for (const auto& row : c.confusion) conf.push_back(row);
    j["confusion"] = conf;
    j["runs"] = json::array();
    for (const auto& r : c.runs) {
        json jr;
        jr["stopping_epoch"] = r.stopping_epoch;
        jr["best_epoch"] = r.best_epoch;
        jr["best_val_accuracy"] = r.best_val_accuracy;
        json eps = json::array();
        for (const auto& e : r.epochs)
            eps.push_back({{"epoch", e.epoch},
                           {"train_loss", e.train_loss},
                           {"train_accuracy", e.train_accuracy},
                           {"val_accuracy", e.val_accuracy},
                           {"seconds", e.seconds}});
        jr["epochs"] = eps;
        j["runs"].push_back(jr);
    }
    return j;
}

GridCell cell_from_json(const json& j) {
    GridCell c;
    c.task = j.at("task").get<std::string>();
    c.lobe = j.at("lobe").get<std::string>();
    c.band = j.at("band").get<std::string>();
    c.ok = j.at("ok").get<bool>();
    if (j.contains("error")) c.error = j.at("error").get<std::string>();
    c.accuracy = j.at("accuracy").get<double>();
    c.accuracy_min = j.at("accuracy_min").get<double>();
    c.accuracy_max = j.at("accuracy_max").get<double>();
    c.run_accuracies = j.at("run_accuracies").get<std::vector<double>>();
    c.test_count = j.at("test_count").get<size_t>();
    c.seed_init = j.at("seeds").at("init").get<uint64_t>();
    c.seed_shuffle = j.at("seeds").at("shuffle").get<uint64_t>();
    c.seed_dropout = j.at("seeds").at("dropout").get<uint64_t>();
    c.seed_split = j.at("seeds").at("split").get<uint64_t>();
    for (size_t i = 0; i < 10; ++i)
        for (size_t k = 0; k < 10; ++k)
            c.confusion[i][k] = j.at("confusion").at(i).at(k).get<uint64_t>();
    for (const auto& jr : j.at("runs")) {
        TrainReport r;
        r.stopping_epoch = jr.at("stopping_epoch").get<size_t>();
        r.best_epoch = jr.at("best_epoch").get<size_t>();
        r.best_val_accuracy = jr.at("best_val_accuracy").get<double>();
        for (const auto& je : jr.at("epochs")) {
            EpochRecord e;
            e.epoch = je.at("epoch").get<size_t>();
            e.train_loss = je.at("train_loss").get<double>();
            e.train_accuracy = je.at("train_accuracy").get<double>();
            e.val_accuracy = je.at("val_accuracy").get<double>();
            e.seconds = je.at("seconds").get<double>();
            r.epochs.push_back(e);
        }
        c.runs.push_back(std::move(r));
    }
    return c;
}

}  // namespace

std::string grid_to_json(const ResultGrid& grid) {
    json j;
    j["task"] = grid.task;
    j["lobes"] = grid.lobes;
    j["bands"] = grid.bands;
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx", (unsigned long long)grid.config_hash);
    j["config_hash"] = std::string(hex);
    std::snprintf(hex, sizeof(hex), "%016llx", (unsigned long long)grid.dataset_checksum);
    j["dataset_checksum"] = std::string(hex);
    j["split_mode"] = grid.split_mode;
    j["repeat"] = grid.repeat;
    j["cells"] = json::array();
    for (const auto& c : grid.cells) j["cells"].push_back(cell_to_json(c));
    return j.dump(2);
}

ResultGrid grid_from_json(const std::string& text) {
    json j = json::parse(text);
    ResultGrid g;
    g.task = j.at("task").get<std::string>();
    g.lobes = j.at("lobes").get<std::vector<std::string>>();
    g.bands = j.at("bands").get<std::vector<std::string>>();
    g.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
    g.dataset_checksum = std::stoull(j.at("dataset_checksum").get<std::string>(), nullptr, 16);
    g.split_mode = j.at("split_mode").get<std::string>();
    g.repeat = j.at("repeat").get<size_t>();
    for (const auto& jc : j.at("cells")) g.cells.push_back(cell_from_json(jc));
    return g;
}

std::string svg_confusion(const GridCell& cell, Task task) {
    const auto& names = class_names(task);
    uint64_t mx = 1;
    for (const auto& row : cell.confusion)
        for (uint64_t v : row) mx = std::max(mx, v);

    const int cs = 42;           // cell size
    const int left = 86, top = 66;
    const int width = left + 10 * cs + 20;
    const int height = top + 10 * cs + 46;
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" font-family=\"sans-serif\">\n";
    s << "<text x=\"" << left << "\" y=\"20\" font-size=\"15\">confusion: " << cell.task
      << " / " << cell.lobe << " / " << cell.band << " (accuracy "
      << format_fixed(cell.accuracy, 4) << ")</text>\n";
    s << "<text x=\"" << (left + 5 * cs) << "\" y=\"40\" font-size=\"11\" "
      << "text-anchor=\"middle\">predicted</text>\n";
    for (int k = 0; k < 10; ++k) {
        s << "<text x=\"" << (left + k * cs + cs / 2) << "\" y=\"" << (top - 6)
          << "\" font-size=\"10\" text-anchor=\"middle\">" << names[size_t(k)] << "</text>\n";
        s << "<text x=\"" << (left - 6) << "\" y=\"" << (top + k * cs + cs / 2 + 4)
          << "\" font-size=\"10\" text-anchor=\"end\">" << names[size_t(k)] << "</text>\n";
    }
    for (int i = 0; i < 10; ++i) {
        for (int k = 0; k < 10; ++k) {
            uint64_t v = cell.confusion[size_t(i)][size_t(k)];
            double f = double(v) / double(mx);
            int r = int(255 + (8 - 255) * f);
            int g = int(255 + (81 - 255) * f);
            int b = int(255 + (156 - 255) * f);
            s << "<rect x=\"" << (left + k * cs) << "\" y=\"" << (top + i * cs) << "\" width=\""
              << cs << "\" height=\"" << cs << "\" fill=\"rgb(" << r << ',' << g << ',' << b
              << ")\" stroke=\"#999\"/>\n";
            s << "<text x=\"" << (left + k * cs + cs / 2) << "\" y=\""
              << (top + i * cs + cs / 2 + 4) << "\" font-size=\"10\" text-anchor=\"middle\""
              << (f > 0.55 ? " fill=\"white\"" : "") << ">" << v << "</text>\n";
        }
    }
    s << "<text x=\"14\" y=\"" << (top + 5 * cs) << "\" font-size=\"11\" "
      << "transform=\"rotate(-90 14 " << (top + 5 * cs) << ")\" text-anchor=\"middle\">"
      << "true</text>\n";
    s << "<text x=\"" << left << "\" y=\"" << (height - 14) << "\" font-size=\"10\">"
      << "rows sum to per-class test counts (" << cell.test_count << " windows, "
      << cell.runs.size() << " run" << (cell.runs.size() == 1 ? "" : "s") << ")</text>\n";
    s << "</svg>\n";
    return s.str();
}

std::vector<std::string> emit_reports(
    const ResultGrid& grid, const std::string& out_dir,
    const std::vector<std::pair<std::string, std::string>>& svg_cells) {
    fs::create_directories(out_dir);
    std::vector<std::string> written;

    auto write_file = [&](const std::string& name, const std::string& content) {
        fs::path p = fs::path(out_dir) / name;
        std::ofstream out(p);
        if (!out) throw std::runtime_error("cannot write report file: " + p.string());
        out << content;
        if (!out) throw std::runtime_error("write failed: " + p.string());
        written.push_back(p.string());
    };

    write_file("results_" + grid.task + ".csv", grid_to_csv(grid));
    write_file("results_" + grid.task + ".json", grid_to_json(grid));
    Task task = task_from_name(grid.task);
    for (const auto& [lobe, band] : svg_cells) {
        const GridCell* c = grid.find(lobe, band);
        if (!c || !c->ok) continue;
        write_file("confusion_" + grid.task + "_" + lobe + "_" + band + ".svg",
                   svg_confusion(*c, task));
    }
    return written;
}

}  // namespace esr
