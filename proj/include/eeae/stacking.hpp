#pragma once

#include "eeae/autoencoder.hpp"

#include <functional>
#include <string>
#include <vector>

namespace eeae {

struct FineTuneConfig {
    std::size_t epochs = 30;
    double lr = 0.05;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    /// Keep the exclusivity term during fine-tuning (ablation; off by default).
    bool with_exclusivity = false;
    double lambda = 7.0;
    std::size_t m = 6;
};

struct StackConfig {
    /// One config per stacked AE; level k's input width is level k−1's latent width.
    std::vector<AEConfig> levels;
    double eta = 0.6;
    double p = 2.0;
    FineTuneConfig finetune;

    void validate() const;
};

/// Builds `s` levels of single-layer autoencoders along `widths` (input, latent_1, …, latent_s)
/// sharing every other setting with `base`. Each level gets seed base.seed + level.
StackConfig uniform_stack(const AEConfig& base, const std::vector<std::size_t>& widths, double eta);

struct StackedModel {
    std::vector<AEModel> levels;
    /// All level encoders in order, then level decoders in reverse level order.
    AEModel assembled;
    /// ‖W‖_p of every assembled layer at assembly time, aligned with assembled.layers().
    std::vector<double> snapshots;
};

/// Training record of one phase (a pretraining level or the fine-tuning run).
struct PhaseHistory {
    std::string phase;
    std::vector<LossBreakdown> epochs;
};

StackedModel assemble(std::vector<AEModel> levels, double p);

class StackingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Greedy layerwise pretraining. Level k trains on the codes of level k−1 with an
/// exclusivity context rebuilt in that level's input space.
StackedModel train_stack(const StackConfig& config, const Matrix& data, std::vector<PhaseHistory>* history = nullptr);

/// ‖W_F‖_p / ‖W_F′‖_p, W_F′ being `current` flattened.
double weight_ratio(double snapshot_norm, const Matrix& current, double p = 2.0);

/// Rescales `current` so its ratio to the snapshot lies in [1−η, 1+η]; the lower
/// edge is dropped once η ≥ 1.
Matrix project_to_band(double snapshot_norm, const Matrix& current, double eta, double p = 2.0);

/// Projects every weight matrix of the assembled model onto its band in place.
void project_all(AEModel& model, const std::vector<double>& snapshots, double eta, double p);

/// End-to-end training of the assembled network on raw data with reconstruction loss,
/// projecting every layer onto its η-band after each epoch. `targets`, when given,
/// are raw-space exclusivity targets used for reporting (and for the loss when
/// config.finetune.with_exclusivity is set).
StackedModel fine_tune(StackedModel stacked, const Matrix& data, const StackConfig& config,
                       const TargetTable* targets = nullptr, std::vector<PhaseHistory>* history = nullptr,
                       const EpochHook& on_epoch = {});

}  // namespace eeae
