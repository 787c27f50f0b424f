#pragma once

#include "eeae/matrix.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace eeae {

enum class Activation : std::uint8_t { identity = 0, relu = 1, sigmoid = 2 };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

/// Fully connected layer: y = act(x · Wᵀ + b), with W stored out_dim × in_dim.
struct DenseLayer {
    Matrix weight;
    std::vector<double> bias;
    Activation activation = Activation::identity;

    DenseLayer() = default;
    DenseLayer(Matrix w, std::vector<double> b, Activation act);

    std::size_t in_dim() const { return weight.cols(); }
    std::size_t out_dim() const { return weight.rows(); }

    bool operator==(const DenseLayer&) const = default;
};

/// Uniform Glorot initialization in ±sqrt(6/(in+out)), zero bias.
DenseLayer make_layer(std::size_t in_dim, std::size_t out_dim, Activation act, std::mt19937_64& rng);

struct LayerGrad {
    Matrix weight;
    std::vector<double> bias;
};

/// One LayerGrad per DenseLayer, in the same order as the parameter list.
using GradSet = std::vector<LayerGrad>;

GradSet zero_grads(std::span<const DenseLayer> layers);
void accumulate(GradSet& acc, const GradSet& other);

Matrix affine_forward(const DenseLayer& layer, const Matrix& input);

struct BackwardResult {
    LayerGrad grad;
    Matrix grad_input;
};

/// Backward pass given the cached forward output (avoids recomputation).
BackwardResult affine_backward(const DenseLayer& layer, const Matrix& input, const Matrix& output,
                               const Matrix& grad_output);
/// Backward pass that recomputes the forward output.
BackwardResult affine_backward(const DenseLayer& layer, const Matrix& input, const Matrix& grad_output);

/// p ← p − lr·g for every weight and bias. Throws before touching anything if a
/// gradient entry is non-finite.
void sgd_step(std::span<DenseLayer> layers, const GradSet& grads, double lr);

/// Flattened view helpers used by gradient checking and checkpointing.
std::size_t parameter_count(std::span<const DenseLayer> layers);
std::vector<double> flatten_parameters(std::span<const DenseLayer> layers);
void assign_parameters(std::span<DenseLayer> layers, std::span<const double> values);
std::vector<double> flatten_grads(const GradSet& grads);

struct LossAndGrad {
    double value = 0.0;
    std::vector<double> grad;
};

using DifferentiableLoss = std::function<LossAndGrad(std::span<const double>)>;

/// Maximum over coordinates of |analytic − numeric| / max(1, |analytic|, |numeric|),
/// numeric being the central difference with step `epsilon`. The loss must be
/// deterministic in its argument; a non-finite value is an error.
double grad_check(const DifferentiableLoss& loss, std::span<const double> params, double epsilon = 1e-5);

}  // namespace eeae
