#include "eeae/stacking.hpp"

#include <cmath>

namespace eeae {

namespace {

// Ratios this close to a band edge count as inside it, so projection is idempotent.
constexpr double kBandSlack = 1e-12;

}  // namespace

void StackConfig::validate() const {
    if (levels.empty()) throw std::invalid_argument("StackConfig: need at least one level");
    for (std::size_t k = 0; k < levels.size(); ++k) {
        levels[k].validate();
        if (k > 0 && levels[k].layer_sizes.front() != levels[k - 1].layer_sizes.back()) {
            throw std::invalid_argument("StackConfig: level " + std::to_string(k) + " input width " +
                                        std::to_string(levels[k].layer_sizes.front()) +
                                        " does not match level " + std::to_string(k - 1) + " latent width " +
                                        std::to_string(levels[k - 1].layer_sizes.back()));
        }
    }
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("StackConfig: eta must be >= 0");
    if (!(p >= 1.0)) throw std::invalid_argument("StackConfig: p must be >= 1");
    if (!(finetune.lr > 0.0)) throw std::invalid_argument("StackConfig: finetune lr must be > 0");
    if (finetune.batch_size < 1) throw std::invalid_argument("StackConfig: finetune batch_size must be >= 1");
}

StackConfig uniform_stack(const AEConfig& base, const std::vector<std::size_t>& widths, double eta) {
    if (widths.size() < 2) throw std::invalid_argument("uniform_stack: need at least input and one latent width");
    StackConfig config;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        AEConfig level = base;
        level.layer_sizes = {widths[k], widths[k + 1]};
        level.seed = base.seed + k;
        config.levels.push_back(std::move(level));
    }
    config.eta = eta;
    config.finetune.lr = base.lr;
    config.finetune.batch_size = base.batch_size;
    config.finetune.seed = base.seed;
    config.finetune.lambda = base.lambda;
    config.finetune.m = base.m;
    return config;
}

StackedModel assemble(std::vector<AEModel> levels, double p) {
    if (levels.empty()) throw std::invalid_argument("assemble: no levels");
    std::vector<DenseLayer> encoder, decoder;
    for (const auto& level : levels) encoder.insert(encoder.end(), level.encoder().begin(), level.encoder().end());
    for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
        decoder.insert(decoder.end(), it->decoder().begin(), it->decoder().end());
    }
    StackedModel out;
    out.assembled = AEModel(std::move(encoder), std::move(decoder));
    out.levels = std::move(levels);
    for (const auto& layer : out.assembled.layers()) {
        const double n = norm_p(layer.weight.flat(), p);
        if (!(n > 0.0)) throw StackingError("assemble: layer with zero weight norm cannot anchor a ratio band");
        out.snapshots.push_back(n);
    }
    return out;
}

StackedModel train_stack(const StackConfig& config, const Matrix& data, std::vector<PhaseHistory>* history) {
    config.validate();
    if (data.cols() != config.levels.front().layer_sizes.front()) {
        throw ShapeError("train_stack: data has " + std::to_string(data.cols()) + " columns, level 0 expects " +
                         std::to_string(config.levels.front().layer_sizes.front()));
    }
    std::vector<AEModel> levels;
    Matrix input = data;
    for (std::size_t k = 0; k < config.levels.size(); ++k) {
        const auto& level = config.levels[k];
        try {
            auto trained = train(make_model(level), level, input);
            if (history) history->push_back({"pretrain-level-" + std::to_string(k + 1), std::move(trained.history)});
            if (k + 1 < config.levels.size()) input = encode(trained.model, input);
            levels.push_back(std::move(trained.model));
        } catch (const std::exception& e) {
            throw StackingError("train_stack: level " + std::to_string(k + 1) + ": " + e.what());
        }
    }
    return assemble(std::move(levels), config.p);
}

double weight_ratio(double snapshot_norm, const Matrix& current, double p) {
    if (!(snapshot_norm > 0.0)) throw std::invalid_argument("weight_ratio: snapshot norm must be > 0");
    const double n = norm_p(current.flat(), p);
    if (!(n > 0.0)) throw std::domain_error("weight_ratio: current weight has zero norm");
    return snapshot_norm / n;
}

Matrix project_to_band(double snapshot_norm, const Matrix& current, double eta, double p) {
    if (!(eta >= 0.0)) throw std::invalid_argument("project_to_band: eta must be >= 0");
    const double r = weight_ratio(snapshot_norm, current, p);
    const double lo = eta >= 1.0 ? 0.0 : 1.0 - eta;
    const double hi = 1.0 + eta;
    double target = r;
    if (r < lo * (1.0 - kBandSlack)) target = lo;
    else if (r > hi * (1.0 + kBandSlack)) target = hi;
    if (target == r) return current;
    Matrix out = current;
    const double scale = r / target;
    for (double& v : out.flat()) v *= scale;
    return out;
}

void project_all(AEModel& model, const std::vector<double>& snapshots, double eta, double p) {
    auto layers = model.layers();
    if (snapshots.size() != layers.size()) {
        throw ShapeError("project_all: " + std::to_string(snapshots.size()) + " snapshots for " +
                         std::to_string(layers.size()) + " layers");
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        layers[i].weight = project_to_band(snapshots[i], layers[i].weight, eta, p);
    }
}

StackedModel fine_tune(StackedModel stacked, const Matrix& data, const StackConfig& config,
                       const TargetTable* targets, std::vector<PhaseHistory>* history, const EpochHook& on_epoch) {
    config.validate();
    if (stacked.snapshots.size() != stacked.assembled.layers().size()) {
        throw StackingError("fine_tune: snapshots missing for the assembled model");
    }
    const auto& ft = config.finetune;
    if (ft.epochs == 0) {
        if (history) history->push_back({"finetune", {}});
        return stacked;
    }
    TargetTable owned;
    if (!targets) {
        owned = build_targets(build_context(data, ft.m), data);
        targets = &owned;
    }
    TrainOptions options;
    options.objective = {ft.with_exclusivity ? ft.lambda : 0.0, config.levels.front().reduction,
                         config.levels.front().mean_grad};
    options.lr = ft.lr;
    options.epochs = ft.epochs;
    options.batch_size = ft.batch_size;
    options.seed = ft.seed;

    const auto& snapshots = stacked.snapshots;
    auto hook = [&](std::size_t epoch, const LossBreakdown& loss, AEModel& model) {
        project_all(model, snapshots, config.eta, config.p);
        if (on_epoch) on_epoch(epoch, loss, model);
    };
    auto epochs = train(stacked.assembled, options, data, *targets, hook);
    if (history) history->push_back({"finetune", std::move(epochs)});
    return stacked;
}

}  // namespace eeae
