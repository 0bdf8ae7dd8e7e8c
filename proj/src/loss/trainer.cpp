#include "subco/errors.hpp"
#include "subco/loss.hpp"
#include "subco/random.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace subco {

void OptimizerConfig::validate() const {
    if (epochs < 0) throw ConfigError("optimizer epochs must be >= 0");
    if (!(learning_rate >= 0.0)) throw ConfigError("optimizer learning_rate must be >= 0");
    if (decay_epoch < 0) throw ConfigError("optimizer decay_epoch must be >= 0");
    if (!(decay_factor > 0.0)) throw ConfigError("optimizer decay_factor must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("optimizer betas must be in [0, 1)");
    if (!(epsilon > 0.0)) throw ConfigError("optimizer epsilon must be > 0");
    if (!(weight_decay >= 0.0)) throw ConfigError("optimizer weight_decay must be >= 0");
    if (accumulate < 1) throw ConfigError("optimizer accumulate must be >= 1");
}

double OptimizerConfig::rate_for_epoch(int epoch) const {
    return (decay_epoch > 0 && epoch >= decay_epoch) ? learning_rate * decay_factor : learning_rate;
}

AdamW::AdamW(const OptimizerConfig& cfg, const EmbedderShape& shape)
    : cfg_(cfg), first_(MlpWeights::zeros(shape)), second_(MlpWeights::zeros(shape)) {}

void AdamW::step(MlpWeights& params, const MlpWeights& grad, double lr) {
    ++steps_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
    auto p_blocks = params.blocks();
    const auto g_blocks = grad.blocks();
    auto m_blocks = first_.blocks();
    auto v_blocks = second_.blocks();
    for (std::size_t b = 0; b < p_blocks.size(); ++b) {
        auto p = p_blocks[b];
        const auto g = g_blocks[b];
        auto m = m_blocks[b];
        auto v = v_blocks[b];
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            p[i] *= 1.0 - lr * cfg_.weight_decay;
            p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.epsilon);
        }
    }
}

TrainResult train(std::span<const SequenceSample> dataset, EmbedderParams params, const LossConfig& loss_cfg,
                  const OptimizerConfig& opt_cfg, const EpochCallback& on_epoch) {
    if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
    loss_cfg.validate();
    opt_cfg.validate();
    params.validate();

    std::vector<PreparedSample> prepared;
    prepared.reserve(dataset.size());
    for (const auto& s : dataset) prepared.push_back(prepare_sample(s, params.shape.patch));

    TrainResult result{std::move(params), {}};
    AdamW optimizer(opt_cfg, result.params.shape);
    std::vector<std::size_t> order(prepared.size());
    std::vector<LossBreakdown> losses(prepared.size());

    for (int epoch = 1; epoch <= opt_cfg.epochs; ++epoch) {
        const double lr = opt_cfg.rate_for_epoch(epoch);
        std::iota(order.begin(), order.end(), std::size_t{0});
        if (opt_cfg.shuffle) {
            Rng rng(Rng::mix(opt_cfg.seed, static_cast<std::uint64_t>(epoch)));
            for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.learning_rate = lr;
        MlpWeights batch = MlpWeights::zeros(result.params.shape);
        int in_batch = 0;
        int visited = 0;
        for (const std::size_t idx : order) {
            ++visited;
            LossAndGradient lg = subco_loss_gradient(prepared[idx], result.params, loss_cfg);
            losses[idx] = lg.breakdown;
            if (!lg.breakdown.skipped) {
                batch += lg.gradient;
                ++in_batch;
            }
            const bool flush = visited % opt_cfg.accumulate == 0 || visited == static_cast<int>(order.size());
            if (flush && in_batch > 0) {
                batch *= 1.0 / in_batch;
                optimizer.step(result.params.weights, batch, lr);
                ++rec.updates;
                batch = MlpWeights::zeros(result.params.shape);
                in_batch = 0;
            }
        }

        // Reduce in dataset order so the epoch means do not depend on the shuffle.
        double inter = 0.0, intra = 0.0, total = 0.0;
        int used = 0;
        for (const auto& l : losses) {
            if (l.skipped) {
                ++rec.skipped;
                continue;
            }
            inter += l.inter;
            intra += l.intra;
            total += l.total;
            ++used;
        }
        if (used == 0) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            rec.mean_inter = rec.mean_intra = rec.mean_total = nan;
            rec.warning = "every sample was skipped (no surviving tracks)";
        } else {
            rec.mean_inter = inter / used;
            rec.mean_intra = intra / used;
            rec.mean_total = total / used;
        }
        result.history.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    return result;
}

std::string format_epoch_record(const EpochRecord& r) {
    auto num = [](double v) { return std::isfinite(v) ? fmt::format("{:.17g}", v) : std::string("null"); };
    std::string line = fmt::format(
        R"({{"epoch":{},"mean_inter":{},"mean_intra":{},"mean_total":{},"skipped":{},"updates":{},"lr":{:.17g})",
        r.epoch, num(r.mean_inter), num(r.mean_intra), num(r.mean_total), r.skipped, r.updates, r.learning_rate);
    if (!r.warning.empty()) line += fmt::format(R"(,"warning":"{}")", r.warning);
    line += "}";
    return line;
}

}  // namespace subco
