#include "subco/cli.hpp"
#include "subco/errors.hpp"
#include "subco/experiment.hpp"
#include "subco/grad_check.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <optional>

namespace subco {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App& cmd, CommonOptions& o) {
    cmd.add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
    cmd.add_option("--seed", o.seed, "Overrides the configuration seed");
}

RunConfig resolve(const CommonOptions& o) {
    RunConfig cfg = o.config.empty() ? RunConfig{} : load_run_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    cfg.validate();
    return cfg;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) ensure_dir(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

std::string sequence_name(int k) { return fmt::format("seq_{:03}", k); }

void write_split(const std::vector<SyntheticSequence>& seqs, const fs::path& dir) {
    for (std::size_t k = 0; k < seqs.size(); ++k) write_sequence_dir(seqs[k], dir / sequence_name(static_cast<int>(k)));
}

std::vector<SyntheticSequence> training_data(const RunConfig& cfg, const std::string& data) {
    if (!data.empty()) return load_dataset(data, true);
    return generate_dataset(cfg.synthetic, cfg.train_sequences, cfg.train_data_seed());
}

EmbedderParams checked_checkpoint(const fs::path& path, const RunConfig& cfg, bool config_given) {
    EmbedderParams p = load_checkpoint(path);
    if (config_given && !(p.shape == cfg.embedder))
        throw DimensionError(fmt::format("checkpoint {} has embedder {}x{} -> {} -> {}, config expects {}x{} -> {} -> {}",
                                         path.string(), p.shape.patch.width, p.shape.patch.height, p.shape.hidden,
                                         p.shape.dim, cfg.embedder.patch.width, cfg.embedder.patch.height,
                                         cfg.embedder.hidden, cfg.embedder.dim));
    return p;
}

int cmd_generate(const CommonOptions& o, const std::string& out, bool occlusion) {
    const RunConfig cfg = resolve(o);
    const fs::path root(out);
    ensure_dir(root);
    write_split(generate_dataset(cfg.synthetic, cfg.train_sequences, cfg.train_data_seed()), root / "train");
    const SyntheticConfig eval_cfg = occlusion ? occlusion_heavy(cfg.synthetic) : cfg.synthetic;
    write_split(generate_dataset(eval_cfg, cfg.eval_sequences, cfg.eval_data_seed()), root / "eval");
    write_resolved_config(cfg, root);
    std::cout << fmt::format("wrote {} training and {} evaluation sequences to {}\n", cfg.train_sequences,
                             cfg.eval_sequences, root.string());
    return 0;
}

int cmd_train(const CommonOptions& o, const std::string& data, const std::string& out, std::string log) {
    const RunConfig cfg = resolve(o);
    const fs::path ckpt(out);
    const fs::path dir = ckpt.has_parent_path() ? ckpt.parent_path() : fs::path(".");
    if (log.empty()) log = (dir / "train_log.jsonl").string();
    ensure_dir(dir);
    auto log_file = open_output(log);
    const auto seqs = training_data(cfg, data);
    const TrainResult r = train_embedder(seqs, cfg, [&](const EpochRecord& e) {
        log_file << format_epoch_record(e) << '\n';
        log_file.flush();
        std::cout << fmt::format("epoch {:>3}  inter {:.6f}  intra {:.6f}  skipped {}  lr {:.2e}\n", e.epoch, e.mean_inter,
                                 e.mean_intra, e.skipped, e.learning_rate);
        if (!e.warning.empty()) std::cerr << "subco: warning: epoch " << e.epoch << ": " << e.warning << '\n';
    });
    save_checkpoint(r.params, ckpt);
    write_resolved_config(cfg, dir);
    return 0;
}

int cmd_grad_check(const CommonOptions& o, std::optional<int> instances) {
    RunConfig cfg = resolve(o);
    LossConfig loss = cfg.loss;
    loss.sequence_length = cfg.grad_check_sequence_length;
    const int n = instances.value_or(cfg.grad_check_instances);
    if (n < 1) throw ConfigError("grad-check needs at least one instance");
    const GradCheckReport r = run_gradient_check(loss, n, cfg.grad_check_tolerance, cfg.seed);
    std::cout << fmt::format("{} {}/{}, max rel err {:.3e} (tolerance {:.0e}; {} degenerate, {} near a kink)\n",
                             r.ok() ? "PASS" : "FAIL", r.passed, n, r.max_relative_error, cfg.grad_check_tolerance,
                             r.degenerate, r.near_kink);
    return r.ok() ? 0 : 1;
}

int cmd_track(const CommonOptions& o, const std::string& checkpoint, const std::string& data, const std::string& out) {
    const RunConfig cfg = resolve(o);
    std::optional<EmbedderParams> params;
    if (!checkpoint.empty()) params = checked_checkpoint(checkpoint, cfg, !o.config.empty());
    if (cfg.tracker.uses_reid() && !params) throw ConfigError("the tracker uses ReID costs: pass --checkpoint");
    const fs::path root(out);
    ensure_dir(root);
    const auto dirs = list_sequence_dirs(data);
    for (const auto& dir : dirs) {
        const LoadedSequence seq = load_sequence_dir(dir, cfg.tracker.uses_reid());
        const auto rows = params ? track_sequence(seq.sample, *params, cfg.tracker) : track_sequence(seq.sample, cfg.tracker);
        write_mot_file(rows, root / (seq.name + ".txt"));
    }
    write_resolved_config(cfg, root);
    std::cout << fmt::format("tracked {} sequence(s) into {}\n", dirs.size(), root.string());
    return 0;
}

// Pairs of (ground truth, results) files: either two files or a dataset root
// whose sequence names match result files in a directory.
std::vector<std::pair<fs::path, fs::path>> eval_pairs(const std::string& gt, const std::string& data,
                                                      const std::string& results) {
    if (!gt.empty()) {
        if (!fs::is_regular_file(results)) throw IoError("results file not found: " + results);
        return {{gt, results}};
    }
    std::vector<std::pair<fs::path, fs::path>> out;
    for (const auto& dir : list_sequence_dirs(data)) {
        const fs::path res = fs::path(results) / (dir.filename().string() + ".txt");
        if (!fs::is_regular_file(res)) throw IoError("missing results file " + res.string());
        out.emplace_back(dir / "gt.txt", res);
    }
    return out;
}

int cmd_eval(const CommonOptions& o, const std::string& gt, const std::string& data, const std::string& results,
             const std::string& json) {
    const RunConfig cfg = resolve(o);
    if (gt.empty() == data.empty()) throw ConfigError("eval needs exactly one of --gt or --data");
    std::optional<MetricReport> total;
    for (const auto& [g, r] : eval_pairs(gt, data, results)) {
        const auto report = evaluate_all(parse_mot_file(g), parse_mot_file(r), cfg.eval_iou_threshold);
        total = total ? combine(*total, report) : report;
    }
    std::cout << format_report_table(*total);
    if (!json.empty()) open_output(json) << report_to_json(*total) << '\n';
    return 0;
}

int cmd_ablate(const CommonOptions& o, const std::string& grid_path, const std::string& data, const std::string& out) {
    const RunConfig cfg = resolve(o);
    const AblationGrid grid = grid_path.empty() ? ablation_grid_from_json("{}", cfg) : load_ablation_grid(grid_path, cfg);
    std::vector<SyntheticSequence> train_set, eval_set;
    if (!data.empty()) {
        train_set = load_dataset(fs::path(data) / "train", true);
        eval_set = load_dataset(fs::path(data) / "eval", true);
    } else {
        train_set = generate_dataset(cfg.synthetic, cfg.train_sequences, cfg.train_data_seed());
        eval_set = generate_dataset(cfg.synthetic, cfg.eval_sequences, cfg.eval_data_seed());
    }
    const fs::path root(out);
    ensure_dir(root);
    const auto cells = run_ablation(cfg, grid, train_set, eval_set, root, [](const AblationCell& c) {
        std::cerr << "cell " << c.name() << (c.valid ? " done\n" : " n/a\n");
    });
    const std::string table = format_ablation_table(cells);
    std::cout << table;
    open_output(root / "ablation.txt") << table;
    open_output(root / "ablation.json") << ablation_to_json(cells) << '\n';
    write_resolved_config(cfg, root);
    return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Self-supervised ReID training and tracking on synthetic sequences", "subco"};
    app.require_subcommand(1);

    CommonOptions common;
    std::string out, data, checkpoint, grid, gt, results, json, log;
    std::optional<int> instances;
    bool occlusion = false;

    auto* gen = app.add_subcommand("generate", "Write a synthetic train/eval dataset");
    add_common(*gen, common);
    gen->add_option("--out", out, "Dataset root")->required();
    gen->add_flag("--occlusion-heavy", occlusion, "Generate the evaluation split with long occlusions");

    auto* tr = app.add_subcommand("train", "Train the embedder and write a checkpoint");
    add_common(*tr, common);
    tr->add_option("--data", data, "Dataset directory (default: generate from the configuration)");
    tr->add_option("--out", out, "Checkpoint path")->required();
    tr->add_option("--log", log, "Per-epoch JSON lines log (default: next to the checkpoint)");

    auto* gc = app.add_subcommand("grad-check", "Finite-difference check of the loss gradient");
    add_common(*gc, common);
    gc->add_option("--instances", instances, "Number of random instances");

    auto* tk = app.add_subcommand("track", "Track every sequence of a dataset");
    add_common(*tk, common);
    tk->add_option("--checkpoint", checkpoint, "Embedder checkpoint (needed for ReID costs)")->check(CLI::ExistingFile);
    tk->add_option("--data", data, "Dataset directory")->required();
    tk->add_option("--out", out, "Directory for result files")->required();

    auto* ev = app.add_subcommand("eval", "Score tracking results against ground truth");
    add_common(*ev, common);
    ev->add_option("--gt", gt, "Ground-truth MOT file")->check(CLI::ExistingFile);
    ev->add_option("--data", data, "Dataset directory (gt.txt per sequence)");
    ev->add_option("--results", results, "Results file, or directory of <sequence>.txt with --data")->required();
    ev->add_option("--json", json, "Also write the report as JSON");

    auto* ab = app.add_subcommand("ablate", "Train and evaluate every cell of an ablation grid");
    add_common(*ab, common);
    ab->add_option("--grid", grid, "Grid file (JSON lists per axis)")->check(CLI::ExistingFile);
    ab->add_option("--data", data, "Dataset root with train/ and eval/ (default: generate)");
    ab->add_option("--out", out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*gen) return cmd_generate(common, out, occlusion);
        if (*tr) return cmd_train(common, data, out, log);
        if (*gc) return cmd_grad_check(common, instances);
        if (*tk) return cmd_track(common, checkpoint, data, out);
        if (*ev) return cmd_eval(common, gt, data, results, json);
        if (*ab) return cmd_ablate(common, grid, data, out);
    } catch (const std::exception& e) {
        std::cerr << "subco: error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace subco
