#include "eeae/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace eeae {

std::string_view to_string(Reduction r) { return r == Reduction::batch_mean ? "batch-mean" : "paper-sum"; }

Reduction parse_reduction(std::string_view name) {
    if (name == "batch-mean") return Reduction::batch_mean;
    if (name == "paper-sum") return Reduction::sum;
    throw std::invalid_argument("unknown sum_mode '" + std::string(name) + "' (expected batch-mean|paper-sum)");
}

std::string_view to_string(MeanGrad g) { return g == MeanGrad::full ? "full" : "stopped"; }

MeanGrad parse_mean_grad(std::string_view name) {
    if (name == "full") return MeanGrad::full;
    if (name == "stopped") return MeanGrad::stopped;
    throw std::invalid_argument("unknown mean_grad '" + std::string(name) + "' (expected full|stopped)");
}

void AEConfig::validate() const {
    if (layer_sizes.size() < 2) throw std::invalid_argument("AEConfig: layer_sizes needs at least 2 entries");
    for (std::size_t s : layer_sizes) {
        if (s == 0) throw std::invalid_argument("AEConfig: layer sizes must be positive");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("AEConfig: lambda must be >= 0");
    if (m < 1) throw std::invalid_argument("AEConfig: m must be >= 1");
    if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("AEConfig: lr must be > 0");
    if (batch_size < 1) throw std::invalid_argument("AEConfig: batch_size must be >= 1");
}

AEModel::AEModel(std::vector<DenseLayer> encoder, std::vector<DenseLayer> decoder)
    : encoder_depth_(encoder.size()) {
    if (encoder.empty() || decoder.empty()) throw std::invalid_argument("AEModel: encoder and decoder need layers");
    layers_ = std::move(encoder);
    layers_.insert(layers_.end(), std::make_move_iterator(decoder.begin()), std::make_move_iterator(decoder.end()));
    for (std::size_t i = 1; i < layers_.size(); ++i) {
        if (layers_[i].in_dim() != layers_[i - 1].out_dim()) {
            throw ShapeError("AEModel: layer " + std::to_string(i) + " expects " +
                             std::to_string(layers_[i].in_dim()) + " inputs, previous layer gives " +
                             std::to_string(layers_[i - 1].out_dim()));
        }
    }
    if (layers_.back().out_dim() != layers_.front().in_dim()) {
        throw ShapeError("AEModel: decoder output " + std::to_string(layers_.back().out_dim()) +
                         " differs from encoder input " + std::to_string(layers_.front().in_dim()));
    }
}

std::size_t AEModel::input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }

std::size_t AEModel::latent_dim() const { return encoder_depth_ == 0 ? 0 : layers_[encoder_depth_ - 1].out_dim(); }

AEModel make_model(const AEConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    const auto& sizes = config.layer_sizes;
    const std::size_t depth = sizes.size() - 1;
    std::vector<DenseLayer> encoder, decoder;
    for (std::size_t i = 0; i < depth; ++i) {
        const Activation act = i + 1 == depth ? config.latent_activation : config.encoder_activation;
        encoder.push_back(make_layer(sizes[i], sizes[i + 1], act, rng));
    }
    for (std::size_t i = depth; i > 0; --i) {
        const Activation act = i == 1 ? config.output_activation : config.decoder_activation;
        decoder.push_back(make_layer(sizes[i], sizes[i - 1], act, rng));
    }
    return AEModel(std::move(encoder), std::move(decoder));
}

LossBreakdown LossBreakdown::compose(double reconstruction, double hetero, double homo, double lambda) {
    LossBreakdown b;
    b.reconstruction = reconstruction;
    b.hetero = hetero;
    b.homo = homo;
    b.exclusivity = hetero + (1.0 - homo);
    b.total = reconstruction + lambda * b.exclusivity;
    b.lambda = lambda;
    return b;
}

namespace {

/// Activations at every depth: trace[0] is the input, trace[k] the output of layer k−1.
std::vector<Matrix> forward_trace(std::span<const DenseLayer> layers, const Matrix& x) {
    std::vector<Matrix> trace;
    trace.reserve(layers.size() + 1);
    trace.push_back(x);
    for (const auto& l : layers) trace.push_back(affine_forward(l, trace.back()));
    return trace;
}

Matrix run(std::span<const DenseLayer> layers, const Matrix& x) {
    Matrix cur = x;
    for (const auto& l : layers) cur = affine_forward(l, cur);
    return cur;
}

/// Backpropagates `grad_top` through `layers`, adding parameter gradients into `grads`
/// (aligned with `layers`). Returns the gradient w.r.t. the stack input.
Matrix backward_trace(std::span<const DenseLayer> layers, const std::vector<Matrix>& trace, Matrix grad_top,
                      std::span<LayerGrad> grads, bool need_input_grad) {
    for (std::size_t k = layers.size(); k-- > 0;) {
        auto step = affine_backward(layers[k], trace[k], trace[k + 1], grad_top);
        add_inplace(grads[k].weight, step.grad.weight);
        for (std::size_t c = 0; c < grads[k].bias.size(); ++c) grads[k].bias[c] += step.grad.bias[c];
        if (k > 0 || need_input_grad) grad_top = std::move(step.grad_input);
    }
    return grad_top;
}

}  // namespace

Matrix encode(const AEModel& model, const Matrix& x) {
    if (x.cols() != model.input_dim()) {
        throw ShapeError("encode: input has " + std::to_string(x.cols()) + " columns, model expects " +
                         std::to_string(model.input_dim()));
    }
    return run(model.encoder(), x);
}

Matrix decode(const AEModel& model, const Matrix& codes) {
    if (codes.cols() != model.latent_dim()) {
        throw ShapeError("decode: codes have " + std::to_string(codes.cols()) + " columns, model expects " +
                         std::to_string(model.latent_dim()));
    }
    return run(model.decoder(), codes);
}

ReconLoss recon_loss(const Matrix& x, const Matrix& xhat, Reduction reduction) {
    require_same_shape(x, xhat, "recon_loss");
    const double scale =
        reduction == Reduction::batch_mean && x.rows() > 0 ? 1.0 / static_cast<double>(x.rows()) : 1.0;
    ReconLoss out{0.0, Matrix(x.rows(), x.cols())};
    auto a = x.flat();
    auto b = xhat.flat();
    auto g = out.grad.flat();
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = b[i] - a[i];
        sum += d * d;
        g[i] = 2.0 * scale * d;
    }
    out.value = scale * sum;
    return out;
}

namespace {

struct Prototypes {
    const Matrix* hetero_raw = nullptr;  // traced through the encoder when set
    const Matrix* homo_raw = nullptr;
    const Matrix* hetero_fixed = nullptr;  // used as constants otherwise
    const Matrix* homo_fixed = nullptr;
};

LossAndGrads total_loss_impl(const AEModel& model, const Objective& objective, const Matrix& x,
                             const Prototypes& protos) {
    const auto encoder = model.encoder();
    const auto decoder = model.decoder();

    auto enc_trace = forward_trace(encoder, x);
    auto dec_trace = forward_trace(decoder, enc_trace.back());
    const Matrix& codes = enc_trace.back();
    const auto recon = recon_loss(x, dec_trace.back(), objective.reduction);

    std::vector<Matrix> hetero_trace, homo_trace;
    if (protos.hetero_raw) {
        hetero_trace = forward_trace(encoder, *protos.hetero_raw);
        homo_trace = forward_trace(encoder, *protos.homo_raw);
    }
    const Matrix& enc_hetero = protos.hetero_raw ? hetero_trace.back() : *protos.hetero_fixed;
    const Matrix& enc_homo = protos.hetero_raw ? homo_trace.back() : *protos.homo_fixed;
    auto excl = exclusivity_loss(codes, enc_hetero, enc_homo, objective.reduction);

    LossAndGrads out;
    out.loss = LossBreakdown::compose(recon.value, excl.hetero, excl.homo, objective.lambda);
    out.grads = zero_grads(model.layers());
    std::span<LayerGrad> all(out.grads);
    auto enc_grads = all.first(encoder.size());
    auto dec_grads = all.subspan(encoder.size());

    Matrix d_codes = backward_trace(decoder, dec_trace, recon.grad, dec_grads, true);
    if (objective.lambda != 0.0) {
        auto lc = excl.d_codes.flat();
        auto dc = d_codes.flat();
        for (std::size_t i = 0; i < dc.size(); ++i) dc[i] += objective.lambda * lc[i];
        if (protos.hetero_raw && objective.mean_grad == MeanGrad::full) {
            for (double& v : excl.d_hetero.flat()) v *= objective.lambda;
            for (double& v : excl.d_homo.flat()) v *= objective.lambda;
            backward_trace(encoder, hetero_trace, std::move(excl.d_hetero), enc_grads, false);
            backward_trace(encoder, homo_trace, std::move(excl.d_homo), enc_grads, false);
        }
    }
    backward_trace(encoder, enc_trace, std::move(d_codes), enc_grads, false);
    return out;
}

void check_batch_inputs(const Matrix& data, const TargetTable& targets, std::span<const std::size_t> batch) {
    if (batch.empty()) throw std::invalid_argument("total_loss: empty batch");
    require_same_shape(targets.hetero, data, "total_loss(targets)");
    require_same_shape(targets.homo, data, "total_loss(targets)");
}

}  // namespace

LossAndGrads total_loss(const AEModel& model, const Objective& objective, const Matrix& data,
                        const TargetTable& targets, std::span<const std::size_t> batch) {
    check_batch_inputs(data, targets, batch);
    // Prototypes go through the live encoder; their raw means are fixed.
    const Matrix hetero = gather_rows(targets.hetero, batch);
    const Matrix homo = gather_rows(targets.homo, batch);
    return total_loss_impl(model, objective, gather_rows(data, batch), {&hetero, &homo, nullptr, nullptr});
}

EncodedPrototypes encode_prototypes(const AEModel& model, const TargetTable& targets,
                                    std::span<const std::size_t> batch) {
    return {encode(model, gather_rows(targets.hetero, batch)), encode(model, gather_rows(targets.homo, batch))};
}

LossAndGrads total_loss(const AEModel& model, const Objective& objective, const Matrix& data,
                        std::span<const std::size_t> batch, const EncodedPrototypes& frozen) {
    if (batch.empty()) throw std::invalid_argument("total_loss: empty batch");
    return total_loss_impl(model, objective, gather_rows(data, batch),
                           {nullptr, nullptr, &frozen.hetero, &frozen.homo});
}

TrainOptions train_options(const AEConfig& config) {
    TrainOptions o;
    o.objective = {config.lambda, config.reduction, config.mean_grad};
    o.lr = config.lr;
    o.epochs = config.epochs;
    o.batch_size = config.batch_size;
    o.seed = config.seed;
    return o;
}

std::vector<LossBreakdown> train(AEModel& model, const TrainOptions& options, const Matrix& data,
                                 const TargetTable& targets, const EpochHook& on_epoch) {
    if (!(options.lr > 0.0)) throw std::invalid_argument("train: lr must be > 0");
    if (options.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (data.cols() != model.input_dim()) {
        throw ShapeError("train: data has " + std::to_string(data.cols()) + " columns, model expects " +
                         std::to_string(model.input_dim()));
    }
    std::vector<LossBreakdown> history;
    if (options.epochs == 0) return history;
    if (data.rows() == 0) throw std::invalid_argument("train: empty dataset");

    std::mt19937_64 rng(options.seed);
    std::vector<std::size_t> order(data.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double rec = 0.0, het = 0.0, hom = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += options.batch_size, ++batch_index) {
            const std::size_t len = std::min(options.batch_size, order.size() - start);
            std::span<const std::size_t> batch(order.data() + start, len);
            auto step = total_loss(model, options.objective, data, targets, batch);
            if (!std::isfinite(step.loss.total)) {
                throw TrainingError("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                    std::to_string(batch_index));
            }
            const double w = static_cast<double>(len);
            rec += w * step.loss.reconstruction;
            het += w * step.loss.hetero;
            hom += w * step.loss.homo;
            try {
                sgd_step(model.layers(), step.grads, options.lr);
            } catch (const std::runtime_error& e) {
                throw TrainingError("train: epoch " + std::to_string(epoch) + ", batch " +
                                    std::to_string(batch_index) + ": " + e.what());
            }
        }
        const double inv = 1.0 / static_cast<double>(order.size());
        history.push_back(LossBreakdown::compose(rec * inv, het * inv, hom * inv, options.objective.lambda));
        if (on_epoch) on_epoch(epoch, history.back(), model);
    }
    return history;
}

TrainResult train(AEModel model, const AEConfig& config, const Matrix& data) {
    config.validate();
    if (data.rows() < std::max<std::size_t>(2, config.m + 1)) {
        throw std::invalid_argument("train: need at least max(2, m+1) = " +
                                    std::to_string(std::max<std::size_t>(2, config.m + 1)) + " examples, have " +
                                    std::to_string(data.rows()));
    }
    const auto ctx = build_context(data, config.m);
    const auto targets = build_targets(ctx, data);
    TrainResult result{std::move(model), {}};
    result.history = train(result.model, train_options(config), data, targets);
    return result;
}

}  // namespace eeae
