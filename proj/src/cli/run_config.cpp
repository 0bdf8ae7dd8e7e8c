#include "subco/errors.hpp"
#include "subco/random.hpp"
#include "subco/run_config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace subco {

namespace {

using nlohmann::json;

// Reads or writes one JSON object section, remembering the keys it knows so
// leftovers can be reported as unknown.
class Section {
public:
    Section(json& node, bool reading, std::string path) : node_(node), reading_(reading), path_(std::move(path)) {
        if (reading_ && !node_.is_object()) throw ConfigError(where() + " must be an object");
    }

    template <typename T>
    void field(const char* key, T& value) {
        known_.insert(key);
        if (!reading_) {
            node_[key] = value;
            return;
        }
        const auto it = node_.find(key);
        if (it == node_.end()) return;
        try {
            value = it->template get<T>();
        } catch (const json::exception&) {
            throw ConfigError(where(key) + " has the wrong type");
        }
    }

    void costs(const char* key, StageCosts& value) {
        known_.insert(key);
        if (!reading_) {
            node_[key] = json::array({to_string(value.first), to_string(value.second)});
            return;
        }
        const auto it = node_.find(key);
        if (it == node_.end()) return;
        if (!it->is_array() || it->size() != 2 || !(*it)[0].is_string() || !(*it)[1].is_string())
            throw ConfigError(where(key) + " must be a pair of cost names");
        value = {cost_kind_from_string((*it)[0].get<std::string>()), cost_kind_from_string((*it)[1].get<std::string>())};
    }

    Section child(const char* key) {
        known_.insert(key);
        if (!reading_) {
            node_[key] = json::object();
            return {node_[key], false, where(key)};
        }
        if (!node_.contains(key)) node_[key] = json::object();
        return {node_[key], true, where(key)};
    }

    void finish() const {
        if (!reading_) return;
        for (const auto& item : node_.items())
            if (!known_.count(item.key())) throw ConfigError("unknown configuration key '" + where(item.key()) + "'");
    }

private:
    std::string where(const std::string& key = {}) const {
        if (key.empty()) return path_.empty() ? "configuration" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    json& node_;
    bool reading_;
    std::string path_;
    std::set<std::string> known_;
};

void bind(json& root, bool reading, RunConfig& c) {
    Section top(root, reading, "");
    top.field("seed", c.seed);
    top.field("train_sequences", c.train_sequences);
    top.field("eval_sequences", c.eval_sequences);

    {
        auto s = top.child("synthetic");
        auto& y = c.synthetic;
        s.field("num_objects", y.num_objects);
        s.field("num_frames", y.num_frames);
        s.field("image_width", y.image_width);
        s.field("image_height", y.image_height);
        s.field("min_object_size", y.min_object_size);
        s.field("max_object_size", y.max_object_size);
        s.field("min_speed", y.min_speed);
        s.field("max_speed", y.max_speed);
        s.field("occluder_count", y.occluder_count);
        s.field("appearance_noise", y.appearance_noise);
        s.field("pixel_noise", y.pixel_noise);
        s.field("detector_dropout", y.detector_dropout);
        s.field("clutter_rate", y.clutter_rate);
        s.field("position_jitter", y.position_jitter);
        s.field("velocity_jitter", y.velocity_jitter);
        s.field("box_noise", y.box_noise);
        s.field("occlusion_drop_threshold", y.occlusion_drop_threshold);
        s.field("brightness_ramp", y.brightness_ramp);
        s.field("illumination_gradient", y.illumination_gradient);
        s.finish();
    }
    {
        auto s = top.child("embedder");
        auto& e = c.embedder;
        s.field("patch_width", e.patch.width);
        s.field("patch_height", e.patch.height);
        s.field("hidden", e.hidden);
        s.field("dim", e.dim);
        s.field("l2_normalize", e.l2_normalize);
        s.finish();
    }
    {
        auto s = top.child("loss");
        auto& l = c.loss;
        s.field("sequence_length", l.sequence_length);
        s.field("delta_match", l.assignment.delta_match);
        s.field("tau", l.assignment.tau);
        s.field("intra_weight", l.intra_weight);
        s.field("deletion_threshold", l.deletion_threshold);
        s.field("epsilon_log", l.epsilon_log);
        s.finish();
    }
    {
        auto s = top.child("optimizer");
        auto& o = c.optimizer;
        s.field("epochs", o.epochs);
        s.field("learning_rate", o.learning_rate);
        s.field("decay_epoch", o.decay_epoch);
        s.field("decay_factor", o.decay_factor);
        s.field("beta1", o.beta1);
        s.field("beta2", o.beta2);
        s.field("epsilon", o.epsilon);
        s.field("weight_decay", o.weight_decay);
        s.field("accumulate", o.accumulate);
        s.field("shuffle", o.shuffle);
        s.finish();
    }
    {
        auto s = top.child("tracker");
        auto& t = c.tracker;
        s.field("high_thresh", t.high_thresh);
        s.field("low_thresh", t.low_thresh);
        s.field("new_track_thresh", t.new_track_thresh);
        s.field("omega_reid", t.omega_reid);
        s.field("match_iou_min", t.match_iou_min);
        s.field("reid_min_similarity", t.reid_min_similarity);
        s.field("max_age", t.max_age);
        s.field("ema_alpha", t.ema_alpha);
        s.field("min_hits", t.min_hits);
        s.costs("stage_costs", t.stage_costs);
        s.finish();
    }
    {
        auto s = top.child("eval");
        s.field("iou_threshold", c.eval_iou_threshold);
        s.finish();
    }
    {
        auto s = top.child("grad_check");
        s.field("instances", c.grad_check_instances);
        s.field("sequence_length", c.grad_check_sequence_length);
        s.field("tolerance", c.grad_check_tolerance);
        s.finish();
    }
    top.finish();
}

}  // namespace

void RunConfig::validate() const {
    synthetic.validate();
    embedder.validate();
    loss.validate();
    optimizer.validate();
    tracker.validate();
    if (train_sequences < 1 || eval_sequences < 1) throw ConfigError("train_sequences and eval_sequences must be >= 1");
    if (loss.sequence_length > synthetic.num_frames)
        throw ConfigError("loss.sequence_length exceeds synthetic.num_frames");
    if (!(eval_iou_threshold > 0.0 && eval_iou_threshold <= 1.0)) throw ConfigError("eval.iou_threshold must be in (0, 1]");
    if (grad_check_instances < 1) throw ConfigError("grad_check.instances must be >= 1");
    if (grad_check_sequence_length < 1) throw ConfigError("grad_check.sequence_length must be >= 1");
    if (!(grad_check_tolerance > 0.0)) throw ConfigError("grad_check.tolerance must be > 0");
}

std::uint64_t RunConfig::train_data_seed() const { return Rng::mix(seed, 1); }
std::uint64_t RunConfig::eval_data_seed() const { return Rng::mix(seed, 2); }
std::uint64_t RunConfig::init_seed() const { return Rng::mix(seed, 3); }
std::uint64_t RunConfig::shuffle_seed() const { return Rng::mix(seed, 4); }

RunConfig run_config_from_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    bind(root, true, cfg);
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open configuration " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return run_config_from_json(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string run_config_to_json(const RunConfig& cfg) {
    json root = json::object();
    RunConfig copy = cfg;
    bind(root, false, copy);
    return root.dump(2) + "\n";
}

void write_resolved_config(const RunConfig& cfg, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto path = dir / "config.json";
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << run_config_to_json(cfg);
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace subco
