#pragma once

#include "eeae/exclusivity.hpp"
#include "eeae/layer.hpp"
#include "eeae/matrix.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace eeae {

enum class MeanGrad { full, stopped };

std::string_view to_string(Reduction r);
Reduction parse_reduction(std::string_view name);
std::string_view to_string(MeanGrad g);
MeanGrad parse_mean_grad(std::string_view name);

struct AEConfig {
    /// input → … → latent. The decoder mirrors these widths.
    std::vector<std::size_t> layer_sizes{784, 128};
    Activation encoder_activation = Activation::relu;
    Activation latent_activation = Activation::relu;
    Activation decoder_activation = Activation::relu;
    Activation output_activation = Activation::sigmoid;
    double lambda = 7.0;
    std::size_t m = 6;
    double lr = 0.05;
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    Reduction reduction = Reduction::batch_mean;
    MeanGrad mean_grad = MeanGrad::full;

    /// Throws std::invalid_argument describing the first violated constraint.
    void validate() const;
};

/// Encoder layers followed by decoder layers in one contiguous parameter list.
class AEModel {
public:
    AEModel() = default;
    AEModel(std::vector<DenseLayer> encoder, std::vector<DenseLayer> decoder);

    std::span<DenseLayer> encoder() { return {layers_.data(), encoder_depth_}; }
    std::span<const DenseLayer> encoder() const { return {layers_.data(), encoder_depth_}; }
    std::span<DenseLayer> decoder() { return std::span<DenseLayer>(layers_).subspan(encoder_depth_); }
    std::span<const DenseLayer> decoder() const { return std::span<const DenseLayer>(layers_).subspan(encoder_depth_); }
    std::span<DenseLayer> layers() { return layers_; }
    std::span<const DenseLayer> layers() const { return layers_; }

    std::size_t encoder_depth() const { return encoder_depth_; }
    std::size_t input_dim() const;
    std::size_t latent_dim() const;

    bool operator==(const AEModel&) const = default;

private:
    std::vector<DenseLayer> layers_;
    std::size_t encoder_depth_ = 0;
};

/// Randomly initialized model shaped by `config` (seeded by config.seed).
AEModel make_model(const AEConfig& config);

struct LossBreakdown {
    double reconstruction = 0.0;  // L_a
    double hetero = 0.0;          // L_h1
    double homo = 0.0;            // L_h2
    double exclusivity = 0.0;     // L_h = L_h1 + (1 − L_h2)
    double total = 0.0;           // L = L_a + λ·L_h
    double lambda = 0.0;

    static LossBreakdown compose(double reconstruction, double hetero, double homo, double lambda);
};

Matrix encode(const AEModel& model, const Matrix& x);
Matrix decode(const AEModel& model, const Matrix& codes);

struct ReconLoss {
    double value = 0.0;
    Matrix grad;  // w.r.t. the reconstruction
};

/// Σ‖x − x̂‖² over rows, divided by the row count under batch_mean.
ReconLoss recon_loss(const Matrix& x, const Matrix& xhat, Reduction reduction = Reduction::batch_mean);

struct Objective {
    double lambda = 7.0;
    Reduction reduction = Reduction::batch_mean;
    MeanGrad mean_grad = MeanGrad::full;
};

struct LossAndGrads {
    LossBreakdown loss;
    GradSet grads;  // encoder layers then decoder layers
};

/// Full objective L = L_a + λ·L_h on the rows `batch` of `data`. `targets` must be
/// row-aligned with `data`.
LossAndGrads total_loss(const AEModel& model, const Objective& objective, const Matrix& data,
                        const TargetTable& targets, std::span<const std::size_t> batch);

struct EncodedPrototypes {
    Matrix hetero;
    Matrix homo;
};

/// Encoded heterogeneous and homologous prototypes of the rows `batch`.
EncodedPrototypes encode_prototypes(const AEModel& model, const TargetTable& targets,
                                    std::span<const std::size_t> batch);

/// Objective with the encoded prototypes held constant; its gradient equals the
/// stopped-gradient variant of the full objective.
LossAndGrads total_loss(const AEModel& model, const Objective& objective, const Matrix& data,
                        std::span<const std::size_t> batch, const EncodedPrototypes& frozen);

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Called after every epoch with the epoch index and the batch-size-weighted mean losses.
/// May modify the model (used by band projection during fine-tuning).
using EpochHook = std::function<void(std::size_t epoch, const LossBreakdown&, AEModel&)>;

struct TrainOptions {
    Objective objective;
    double lr = 0.05;
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
};

TrainOptions train_options(const AEConfig& config);

/// Minibatch SGD over shuffled rows. Returns one LossBreakdown per epoch.
std::vector<LossBreakdown> train(AEModel& model, const TrainOptions& options, const Matrix& data,
                                 const TargetTable& targets, const EpochHook& on_epoch = {});

struct TrainResult {
    AEModel model;
    std::vector<LossBreakdown> history;
};

/// Builds the exclusivity context over `data`, then trains `model` per `config`.
TrainResult train(AEModel model, const AEConfig& config, const Matrix& data);

}  // namespace eeae
