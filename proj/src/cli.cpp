#include "esr/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "esr/dataset.hpp"
#include "esr/dsp.hpp"
#include "esr/experiment.hpp"
#include "esr/nn.hpp"
#include "esr/segmentation.hpp"
#include "esr/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace esr {

namespace {

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : csv) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

void echo_config(RunLog& log, const CLI::App* cmd) {
    log.line("command: " + cmd->get_name());
    for (const auto* opt : cmd->get_options()) {
        if (opt->get_name() == "--help") continue;
        std::string value = opt->count() ? opt->as<std::string>() : opt->get_default_str();
        log.line("config: " + opt->get_name() + " = " + value);
    }
}

// train options shared by the train and sweep subcommands
struct TrainFlags {
    TrainConfig cfg;
    uint64_t split_seed = 4;
    std::string split = "window";
    int order = 4;
    std::string edges = "standard";

    void attach(CLI::App* cmd) {
        cmd->add_option("--batch-size", cfg.batch_size, "Mini-batch size")
            ->capture_default_str();
        cmd->add_option("--lr", cfg.learning_rate, "Adam learning rate")
            ->capture_default_str();
        cmd->add_option("--beta1", cfg.adam_beta1, "Adam beta1")->capture_default_str();
        cmd->add_option("--beta2", cfg.adam_beta2, "Adam beta2")->capture_default_str();
        cmd->add_option("--adam-eps", cfg.adam_eps, "Adam epsilon")->capture_default_str();
        cmd->add_option("--patience", cfg.patience, "Early-stopping patience in epochs")
            ->capture_default_str();
        cmd->add_option("--max-epochs", cfg.max_epochs, "Epoch cap")->capture_default_str();
        cmd->add_option("--seed-init", cfg.init_seed, "Weight init seed")
            ->capture_default_str();
        cmd->add_option("--seed-shuffle", cfg.shuffle_seed, "Batch shuffle seed")
            ->capture_default_str();
        cmd->add_option("--seed-dropout", cfg.dropout_seed, "Dropout mask seed")
            ->capture_default_str();
        cmd->add_option("--seed-split", split_seed, "Partition split seed")
            ->capture_default_str();
        cmd->add_option("--split", split, "Split granularity: window|recording")
            ->capture_default_str();
        cmd->add_option("--order", order, "Butterworth prototype order (even)")
            ->capture_default_str();
        cmd->add_option("--band-edges", edges, "Band edge preset: standard|alternate")
            ->capture_default_str();
    }
};

std::vector<int> parse_code_channels(const std::string& spec) {
    if (spec == "all") return {};
    return lobe_by_name(spec).channels;
}

int cmd_synth(const std::string& out_dir, int subjects, const std::string& task_str,
              uint64_t seed, SyntheticSpec spec, const std::string& code_channels,
              const std::string& manifest_name, RunLog& log) {
    spec.code_channels = parse_code_channels(code_channels);
    Task task = task_from_name(task_str);
    fs::create_directories(out_dir);
    auto recs = generate_synthetic(subjects, task, seed, spec);
    Manifest manifest;
    for (const auto& rec : recs) {
        char name[64];
        std::snprintf(name, sizeof(name), "rec_s%02d_%s_%d.csv", rec.subject,
                      task_name(task).c_str(), rec.label);
        export_recording(rec, (fs::path(out_dir) / name).string());
        manifest.entries.push_back({name, rec.subject, rec.task, rec.label});
    }
    std::string manifest_path = (fs::path(out_dir) / manifest_name).string();
    save_manifest(manifest, manifest_path);
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx", (unsigned long long)dataset_checksum(recs));
    log.line("synth: wrote " + std::to_string(recs.size()) + " recordings, checksum " + hex);
    std::cout << "wrote " << recs.size() << " recordings and " << manifest_path
              << " (checksum " << hex << ")\n";
    return 0;
}

int cmd_import(const std::string& index_path, const std::string& out_manifest, RunLog& log) {
    std::ifstream in(index_path);
    if (!in) throw std::runtime_error("cannot open index file: " + index_path);
    fs::path base = fs::path(index_path).parent_path();
    Manifest manifest;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto cells = split_list(line);
        if (cells.size() != 4)
            throw std::runtime_error(index_path + ":" + std::to_string(line_no) +
                                     ": expected path,subject,task,label");
        ManifestEntry e;
        fs::path p = cells[0];
        if (p.is_relative()) p = base / p;
        e.path = fs::absolute(p).string();
        e.subject = std::stoi(cells[1]);
        e.task = task_from_name(cells[2]);
        e.label = std::stoi(cells[3]);
        import_recording(e.path, e.subject, e.task, e.label);  // validate now
        manifest.entries.push_back(std::move(e));
    }
    save_manifest(manifest, out_manifest);
    log.line("import: validated " + std::to_string(manifest.entries.size()) +
             " recordings into " + out_manifest);
    std::cout << "validated " << manifest.entries.size() << " recordings, wrote "
              << out_manifest << "\n";
    return 0;
}

int cmd_train(const std::string& manifest_path, const std::string& task_str,
              const std::string& lobe_name, const std::string& band_name,
              const TrainFlags& tf, const std::string& out_dir, RunLog& log) {
    Task task = task_from_name(task_str);
    Manifest manifest = load_manifest(manifest_path);
    auto recs = load_task_recordings(manifest, manifest_path, task);
    if (recs.empty())
        throw std::runtime_error("manifest has no recordings for task " + task_str);

    LobeSpec lobe = lobe_by_name(lobe_name);
    BandSpec band = band_by_name(band_name, band_edges_from_name(tf.edges));
    if (band.kind != FilterKind::Identity) {
        FilterDesign design = design_filter(band, tf.order);
        for (auto& r : recs) r = apply_zero_phase(design, r);
    }
    WindowSet ws = build_windowset(recs, lobe, tf.split_seed,
                                   split_mode_from_name(tf.split), &log);
    log.line("windowset: " + std::to_string(ws.size()) + " windows (" +
             std::to_string(ws.count(Partition::Train)) + " train, " +
             std::to_string(ws.count(Partition::Val)) + " val, " +
             std::to_string(ws.count(Partition::Test)) + " test)");

    ModelDims dims;
    dims.channels = lobe.channels.size();
    Model<float> model(dims, tf.cfg.init_seed);
    TrainReport report = train(model, ws, tf.cfg, &log);
    EvalResult ev = evaluate(model, ws, Partition::Test);

    fs::create_directories(out_dir);
    std::string ckpt = (fs::path(out_dir) / "checkpoint.bin").string();
    AdamState<float> opt = AdamState<float>::sized(dims);  // post-restore moments not kept
    save_checkpoint(dims, model.params(), opt, ckpt);
    report.checkpoint_path = ckpt;

    json j = json::parse(train_report_to_json(report));
    j["task"] = task_name(task);
    j["lobe"] = lobe.name;
    j["band"] = band.name;
    j["split_mode"] = tf.split;
    j["test_accuracy"] = ev.accuracy;
    j["test_count"] = ev.total();
    json conf = json::array();
    for (const auto& row : ev.confusion) conf.push_back(row);
    j["confusion"] = conf;
    std::string report_path = (fs::path(out_dir) / "report.json").string();
    std::ofstream out(report_path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + report_path);

    log.line("train: test accuracy " + format_fixed(ev.accuracy, 4) + " after " +
             std::to_string(report.stopping_epoch) + " epochs (best epoch " +
             std::to_string(report.best_epoch) + ")");
    std::cout << "test accuracy " << format_fixed(ev.accuracy, 4) << ", report " << report_path
              << "\n";
    return 0;
}

std::vector<std::pair<std::string, std::string>> resolve_svg_cells(const ResultGrid& grid,
                                                                   const std::string& spec) {
    std::vector<std::pair<std::string, std::string>> cells;
    if (spec == "none") return cells;
    if (spec == "all") {
        for (const auto& c : grid.cells)
            if (c.ok) cells.emplace_back(c.lobe, c.band);
        return cells;
    }
    if (spec == "best") {
        const GridCell* best = nullptr;
        for (const auto& c : grid.cells)
            if (c.ok && (!best || c.accuracy > best->accuracy)) best = &c;
        if (best) cells.emplace_back(best->lobe, best->band);
        return cells;
    }
    for (const auto& item : split_list(spec)) {
        auto pos = item.find(':');
        if (pos == std::string::npos)
            throw std::runtime_error("bad cell spec '" + item + "', expected lobe:band");
        cells.emplace_back(item.substr(0, pos), item.substr(pos + 1));
    }
    return cells;
}

int cmd_sweep(const std::string& manifest_path, const std::string& task_str,
              const std::string& lobes_csv, const std::string& bands_csv, size_t repeat,
              size_t workers, const std::string& cache_dir, const TrainFlags& tf,
              const std::string& out_dir, const std::string& svg_spec, RunLog& log) {
    Task task = task_from_name(task_str);
    Manifest manifest = load_manifest(manifest_path);
    auto recs = load_task_recordings(manifest, manifest_path, task);

    GridConfig cfg;
    cfg.lobes = split_list(lobes_csv);
    cfg.bands = split_list(bands_csv);
    for (const auto& l : cfg.lobes) lobe_by_name(l);  // validate early
    cfg.band_edges = band_edges_from_name(tf.edges);
    for (const auto& b : cfg.bands) band_by_name(b, cfg.band_edges);
    cfg.train = tf.cfg;
    cfg.split_mode = split_mode_from_name(tf.split);
    cfg.split_seed = tf.split_seed;
    cfg.filter_order = tf.order;
    cfg.repeat = repeat;
    cfg.workers = workers;
    cfg.cache_dir = cache_dir;
    cfg.log = &log;
    if (!cache_dir.empty()) fs::create_directories(cache_dir);

    ResultGrid grid = run_grid(recs, task, cfg);
    auto files = emit_reports(grid, out_dir, resolve_svg_cells(grid, svg_spec));
    for (const auto& f : files) log.line("wrote " + f);

    size_t failed = 0;
    for (const auto& c : grid.cells)
        if (!c.ok) ++failed;
    std::cout << "sweep complete: " << grid.cells.size() << " cells";
    if (failed) std::cout << " (" << failed << " failed, see run.log)";
    std::cout << ", results in " << out_dir << "\n";
    return failed == 0 ? 0 : 1;
}

int cmd_report(const std::string& json_path, const std::string& out_dir,
               const std::string& cells_spec, RunLog& log) {
    std::ifstream in(json_path);
    if (!in) throw std::runtime_error("cannot open results JSON: " + json_path);
    std::stringstream buf;
    buf << in.rdbuf();
    ResultGrid grid = grid_from_json(buf.str());
    auto files = emit_reports(grid, out_dir, resolve_svg_cells(grid, cells_spec));
    for (const auto& f : files) log.line("wrote " + f);
    std::cout << "regenerated " << files.size() << " files in " << out_dir << "\n";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"EEG band / lobe sweep toolkit: synthesize or import recordings, "
                 "filter and segment them, train the conv-LSTM classifier, and emit "
                 "accuracy tables and confusion matrices"};
    // `esr --config file <cmd>`: flat [subcommand] sections of key=value
    // lines mirroring that command's flags; flags override file values
    app.set_config("--config", "", "Config file (TOML-style, [subcommand] sections)");
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic band-coded dataset");
    std::string sy_out = "synth_out";
    int sy_subjects = 1;
    std::string sy_task = "digit";
    uint64_t sy_seed = 7;
    SyntheticSpec sy_spec;
    std::string sy_code = "all";
    std::string sy_manifest = "manifest.json";
    synth->add_option("--out-dir", sy_out, "Output directory")
        ->envname("ESR_OUT_DIR")
        ->capture_default_str();
    synth->add_option("--subjects", sy_subjects, "Number of subjects (10 recordings each)")
        ->required()
        ->check(CLI::PositiveNumber);
    synth->add_option("--task", sy_task, "Task: digit|character|image")->capture_default_str();
    synth->add_option("--seed", sy_seed, "Generator seed")->capture_default_str();
    synth->add_option("--band-low", sy_spec.band_low_hz, "Class-code band lower edge (Hz)")
        ->capture_default_str();
    synth->add_option("--band-high", sy_spec.band_high_hz, "Class-code band upper edge (Hz)")
        ->capture_default_str();
    synth->add_option("--amplitude", sy_spec.amplitude, "Class sinusoid amplitude")
        ->capture_default_str();
    synth->add_option("--noise", sy_spec.noise_sigma, "Gaussian noise sigma")
        ->capture_default_str();
    synth->add_option("--code-channels", sy_code,
                      "Channels carrying the class code: all or a lobe name")
        ->capture_default_str();
    synth->add_option("--manifest-name", sy_manifest, "Manifest file name")
        ->capture_default_str();

    // import
    auto* import = app.add_subcommand("import", "Validate external recordings into a manifest");
    std::string im_index, im_out = "manifest.json";
    import->add_option("--index", im_index, "Index CSV: path,subject,task,label per line")
        ->required();
    import->add_option("--out-manifest", im_out, "Manifest to write")->capture_default_str();

    // train
    auto* train_cmd = app.add_subcommand("train", "Train one (lobe, band) model");
    std::string tr_manifest, tr_task = "digit", tr_lobe = "all", tr_band = "all";
    std::string tr_out = "train_out";
    TrainFlags tr_flags;
    train_cmd->add_option("--manifest", tr_manifest, "Dataset manifest")->required();
    train_cmd->add_option("--task", tr_task, "Task: digit|character|image")
        ->capture_default_str();
    train_cmd->add_option("--lobe", tr_lobe, "Lobe: frontal|temporal|occipital|parietal|all")
        ->capture_default_str();
    train_cmd->add_option("--band", tr_band, "Band: delta|theta|alpha|beta|gamma|dbg|all")
        ->capture_default_str();
    train_cmd->add_option("--out-dir", tr_out, "Output directory")
        ->envname("ESR_OUT_DIR")
        ->capture_default_str();
    tr_flags.attach(train_cmd);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run the lobe x band grid and emit reports");
    std::string sw_manifest, sw_task = "digit";
    std::string sw_lobes = "frontal,temporal,occipital,parietal,all";
    std::string sw_bands = "delta,theta,alpha,beta,gamma,dbg,all";
    size_t sw_repeat = 1, sw_workers = 0;
    std::string sw_cache, sw_out = "sweep_out", sw_svg = "best";
    TrainFlags sw_flags;
    sweep->add_option("--manifest", sw_manifest, "Dataset manifest")->required();
    sweep->add_option("--task", sw_task, "Task: digit|character|image")->capture_default_str();
    sweep->add_option("--lobes", sw_lobes, "Comma-separated lobe subset")
        ->capture_default_str();
    sweep->add_option("--bands", sw_bands, "Comma-separated band subset")
        ->capture_default_str();
    sweep->add_option("--repeat", sw_repeat, "Training runs per cell (mean/min/max reported)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sweep->add_option("--workers", sw_workers, "Worker pool size (0 = available parallelism)")
        ->capture_default_str();
    sweep->add_option("--cache-dir", sw_cache, "Window cache directory (skips re-segmentation)")
        ->capture_default_str();
    sweep->add_option("--out-dir", sw_out, "Output directory")
        ->envname("ESR_OUT_DIR")
        ->capture_default_str();
    sweep->add_option("--svg", sw_svg, "Confusion SVGs: best|all|none|lobe:band[,...]")
        ->capture_default_str();
    sw_flags.attach(sweep);

    // report
    auto* report = app.add_subcommand("report", "Regenerate CSV/SVGs from stored results JSON");
    std::string rp_json, rp_out = "report_out", rp_cells = "best";
    report->add_option("--json", rp_json, "results_<task>.json from a sweep")->required();
    report->add_option("--out-dir", rp_out, "Output directory")
        ->envname("ESR_OUT_DIR")
        ->capture_default_str();
    report->add_option("--cells", rp_cells, "Confusion SVGs: best|all|none|lobe:band[,...]")
        ->capture_default_str();

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        auto log_path = [](const std::string& dir) {
            fs::create_directories(dir);
            return (fs::path(dir) / "run.log").string();
        };
        if (synth->parsed()) {
            RunLog log(log_path(sy_out));
            echo_config(log, synth);
            return cmd_synth(sy_out, sy_subjects, sy_task, sy_seed, sy_spec, sy_code,
                             sy_manifest, log);
        }
        if (import->parsed()) {
            std::string dir = fs::path(im_out).parent_path().string();
            RunLog log(log_path(dir.empty() ? "." : dir));
            echo_config(log, import);
            return cmd_import(im_index, im_out, log);
        }
        if (train_cmd->parsed()) {
            RunLog log(log_path(tr_out));
            echo_config(log, train_cmd);
            return cmd_train(tr_manifest, tr_task, tr_lobe, tr_band, tr_flags, tr_out, log);
        }
        if (sweep->parsed()) {
            RunLog log(log_path(sw_out));
            echo_config(log, sweep);
            return cmd_sweep(sw_manifest, sw_task, sw_lobes, sw_bands, sw_repeat, sw_workers,
                             sw_cache, sw_flags, sw_out, sw_svg, log);
        }
        if (report->parsed()) {
            RunLog log(log_path(rp_out));
            echo_config(log, report);
            return cmd_report(rp_json, rp_out, rp_cells, log);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace esr
