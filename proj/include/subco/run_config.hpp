#pragma once

#include "subco/data.hpp"
#include "subco/embedder.hpp"
#include "subco/loss.hpp"
#include "subco/tracker.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace subco {

/// Everything a command needs besides file paths. Read from a JSON document
/// whose keys mirror the field names below; every key is optional and
/// unknown keys are rejected.
struct RunConfig {
    std::uint64_t seed = 0;

    SyntheticConfig synthetic;  // synthetic.seed is ignored: sequence seeds derive from `seed`
    int train_sequences = 30;
    int eval_sequences = 10;

    EmbedderShape embedder;
    LossConfig loss;
    OptimizerConfig optimizer;  // optimizer.seed is ignored: derived from `seed`
    TrackerConfig tracker;
    double eval_iou_threshold = 0.5;

    int grad_check_instances = 20;
    int grad_check_sequence_length = 3;
    double grad_check_tolerance = 1e-4;

    void validate() const;

    // Seeds of the independent random streams of a run.
    std::uint64_t train_data_seed() const;
    std::uint64_t eval_data_seed() const;
    std::uint64_t init_seed() const;
    std::uint64_t shuffle_seed() const;
};

/// Throws ConfigError on unknown keys, wrong types or invalid values.
RunConfig run_config_from_json(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
/// Complete document with every field, suitable for run_config_from_json.
std::string run_config_to_json(const RunConfig& cfg);
/// Writes `config.json` (the resolved configuration) into `dir`.
void write_resolved_config(const RunConfig& cfg, const std::filesystem::path& dir);

}  // namespace subco
