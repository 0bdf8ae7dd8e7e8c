#include "subco/errors.hpp"
#include "subco/experiment.hpp"
#include "subco/random.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace subco {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<SyntheticSequence> generate_dataset(const SyntheticConfig& base, int count, std::uint64_t seed) {
    base.validate();
    std::vector<SyntheticSequence> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int k = 0; k < count; ++k) {
        SyntheticConfig cfg = base;
        cfg.seed = Rng::mix(seed, static_cast<std::uint64_t>(k));
        out.push_back(generate_synthetic(cfg));
    }
    return out;
}

SyntheticConfig occlusion_heavy(SyntheticConfig base) {
    base.num_frames = 48;
    base.occluder_count = 4;
    base.detector_dropout = 0.05;
    base.velocity_jitter = 0.5;
    return base;
}

std::vector<SequenceSample> training_samples(std::span<const SyntheticSequence> sequences, int sequence_length) {
    std::vector<SequenceSample> out;
    for (const auto& s : sequences) {
        auto windows = make_windows(s.sample, sequence_length);
        for (auto& w : windows) out.push_back(std::move(w));
    }
    return out;
}

TrainResult train_embedder(std::span<const SyntheticSequence> sequences, const RunConfig& cfg,
                           const EpochCallback& on_epoch) {
    const auto samples = training_samples(sequences, cfg.loss.sequence_length);
    if (samples.empty()) throw ConfigError("no training windows: sequences are shorter than loss.sequence_length");
    OptimizerConfig opt = cfg.optimizer;
    opt.seed = cfg.shuffle_seed();
    return train(samples, EmbedderParams::random(cfg.embedder, cfg.init_seed()), cfg.loss, opt, on_epoch);
}

TrackingEvaluation evaluate_tracking(std::span<const SyntheticSequence> sequences,
                                     const std::optional<EmbedderParams>& params, const TrackerConfig& tracker,
                                     double iou_threshold) {
    if (tracker.uses_reid() && !params) throw ConfigError("ReID association needs an embedder checkpoint");
    TrackingEvaluation out;
    bool first = true;
    for (const auto& s : sequences) {
        SequenceEvaluation e;
        e.rows = params ? track_sequence(s.sample, *params, tracker) : track_sequence(s.sample, tracker);
        e.report = evaluate_all(s.ground_truth, rows_to_frames(e.rows), iou_threshold);
        out.total = first ? e.report : combine(out.total, e.report);
        first = false;
        out.sequences.push_back(std::move(e));
    }
    return out;
}

namespace {

template <typename T>
std::vector<T> read_list(const json& j, const char* key) {
    const auto& node = j.at(key);
    if (!node.is_array() || node.empty()) throw ConfigError(std::string("grid axis '") + key + "' must be a non-empty list");
    std::vector<T> out;
    for (const auto& v : node) out.push_back(v.get<T>());
    return out;
}

double inter_of(const EpochRecord& r) { return r.mean_inter; }

}  // namespace

AblationGrid ablation_grid_from_json(const std::string& text, const RunConfig& base) {
    AblationGrid grid{{base.loss.sequence_length}, {base.loss.intra_weight > 0.0}, {base.tracker.stage_costs}};
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("grid is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("grid must be a JSON object");
    try {
        for (const auto& item : j.items()) {
            const auto& key = item.key();
            if (key == "sequence_length") {
                grid.sequence_length = read_list<int>(j, "sequence_length");
                for (int t : grid.sequence_length)
                    if (t < 1) throw ConfigError("grid sequence_length entries must be >= 1");
            } else if (key == "intra") {
                grid.intra = read_list<bool>(j, "intra");
            } else if (key == "stage_costs") {
                grid.stage_costs.clear();
                const auto pairs = read_list<std::vector<std::string>>(j, "stage_costs");
                for (const auto& p : pairs) {
                    if (p.size() != 2) throw ConfigError("grid stage_costs entries must be pairs");
                    grid.stage_costs.push_back({cost_kind_from_string(p[0]), cost_kind_from_string(p[1])});
                }
            } else {
                throw ConfigError("unknown grid axis '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("grid has the wrong shape: ") + e.what());
    }
    return grid;
}

AblationGrid load_ablation_grid(const fs::path& path, const RunConfig& base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open grid " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return ablation_grid_from_json(buf.str(), base);
}

std::string AblationCell::name() const {
    return fmt::format("T{}_intra-{}_{}-{}", sequence_length, intra ? "on" : "off", to_string(stage_costs.first),
                       to_string(stage_costs.second));
}

std::vector<AblationCell> run_ablation(const RunConfig& base, const AblationGrid& grid,
                                       std::span<const SyntheticSequence> train_set,
                                       std::span<const SyntheticSequence> eval_set,
                                       const std::optional<fs::path>& out_dir, const CellCallback& on_cell) {
    std::vector<AblationCell> cells;
    for (int t : grid.sequence_length) {
        for (bool intra : grid.intra) {
            AblationCell proto;
            proto.sequence_length = t;
            proto.intra = intra;
            proto.valid = t >= 2 || intra;
            if (!proto.valid) {
                for (const auto& costs : grid.stage_costs) {
                    AblationCell c = proto;
                    c.stage_costs = costs;
                    c.first_inter = c.final_inter = std::nan("");
                    if (on_cell) on_cell(c);
                    cells.push_back(c);
                }
                continue;
            }

            RunConfig cfg = base;
            cfg.loss.sequence_length = t;
            cfg.loss.intra_weight = intra ? (base.loss.intra_weight > 0.0 ? base.loss.intra_weight : 1.0) : 0.0;
            const auto trained = train_embedder(train_set, cfg);
            if (!trained.history.empty()) {
                proto.first_inter = inter_of(trained.history.front());
                proto.final_inter = inter_of(trained.history.back());
            }
            const auto train_dir = out_dir ? std::optional<fs::path>(*out_dir / fmt::format("T{}_intra-{}", t, intra ? "on" : "off"))
                                           : std::nullopt;
            if (train_dir) {
                write_resolved_config(cfg, *train_dir);
                save_checkpoint(trained.params, *train_dir / "checkpoint.json");
                std::ofstream log(*train_dir / "train_log.jsonl", std::ios::trunc);
                for (const auto& r : trained.history) log << format_epoch_record(r) << '\n';
            }
            for (const auto& costs : grid.stage_costs) {
                AblationCell c = proto;
                c.stage_costs = costs;
                TrackerConfig tracker = base.tracker;
                tracker.stage_costs = costs;
                c.report = evaluate_tracking(eval_set, trained.params, tracker, base.eval_iou_threshold).total;
                if (train_dir) {
                    std::ofstream rep(*train_dir / fmt::format("metrics_{}-{}.json", to_string(costs.first), to_string(costs.second)),
                                      std::ios::trunc);
                    rep << report_to_json(c.report) << '\n';
                }
                if (on_cell) on_cell(c);
                cells.push_back(c);
            }
        }
    }
    return cells;
}

std::string format_ablation_table(std::span<const AblationCell> cells) {
    std::string out = fmt::format("{:>4} {:>6} {:>19} {:>7} {:>7} {:>7} {:>7} {:>7} {:>6} {:>9}\n", "T", "intra", "stages",
                                  "HOTA", "AssA", "DetA", "MOTA", "IDF1", "IDSw", "inter");
    for (const auto& c : cells) {
        const auto stages = to_string(c.stage_costs.first) + "/" + to_string(c.stage_costs.second);
        if (!c.valid) {
            out += fmt::format("{:>4} {:>6} {:>19} {:>7}\n", c.sequence_length, c.intra ? "on" : "off", stages, "n/a");
            continue;
        }
        const auto& r = c.report;
        out += fmt::format("{:>4} {:>6} {:>19} {:>7.3f} {:>7.3f} {:>7.3f} {:>7.3f} {:>7.3f} {:>6} {:>9.4f}\n",
                           c.sequence_length, c.intra ? "on" : "off", stages, r.hota.hota, r.hota.assa, r.hota.deta,
                           r.clear.mota, r.identity.idf1, r.clear.idsw, c.final_inter);
    }
    return out;
}

std::string ablation_to_json(std::span<const AblationCell> cells) {
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json arr = json::array();
    for (const auto& c : cells) {
        json j;
        j["name"] = c.name();
        j["sequence_length"] = c.sequence_length;
        j["intra"] = c.intra;
        j["stage_costs"] = {to_string(c.stage_costs.first), to_string(c.stage_costs.second)};
        j["valid"] = c.valid;
        if (c.valid) {
            j["first_epoch_inter"] = num(c.first_inter);
            j["final_epoch_inter"] = num(c.final_inter);
            j["metrics"] = json::parse(report_to_json(c.report));
        }
        arr.push_back(j);
    }
    return arr.dump(2);
}

std::vector<SyntheticSequence> load_dataset(const fs::path& root, bool with_images) {
    std::vector<SyntheticSequence> out;
    for (const auto& dir : list_sequence_dirs(root)) {
        auto loaded = load_sequence_dir(dir, with_images);
        out.push_back({std::move(loaded.sample), std::move(loaded.ground_truth)});
    }
    if (out.empty()) throw IoError("no sequence directories found under " + root.string());
    return out;
}

}  // namespace subco
