#pragma once

#include "eeae/autoencoder.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace eeae {

/// Max relative error of total_loss gradients for every parameter of `model`
/// on rows `batch` of `data`.
double check_total_loss(const AEModel& model, const Objective& objective, const Matrix& data,
                        const TargetTable& targets, std::span<const std::size_t> batch, double epsilon = 1e-5);

struct GradcheckCase {
    std::string description;
    Reduction reduction = Reduction::batch_mean;
    MeanGrad mean_grad = MeanGrad::full;
    double max_relative_error = 0.0;
};

/// Random small autoencoders (widths ≤ 8, batches ≤ 6), each checked under every
/// combination of reduction and mean-gradient mode.
std::vector<GradcheckCase> run_gradcheck_suite(std::size_t configs, std::uint64_t seed, double epsilon = 1e-5);

}  // namespace eeae
