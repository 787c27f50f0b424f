#include "eeae/layer.hpp"

#include <algorithm>
#include <cmath>

namespace eeae {

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::relu: return "relu";
        case Activation::sigmoid: return "sigmoid";
    }
    throw std::invalid_argument("unknown activation tag " + std::to_string(static_cast<int>(a)));
}

Activation parse_activation(std::string_view name) {
    if (name == "identity") return Activation::identity;
    if (name == "relu") return Activation::relu;
    if (name == "sigmoid") return Activation::sigmoid;
    throw std::invalid_argument("unknown activation '" + std::string(name) + "' (expected identity|relu|sigmoid)");
}

DenseLayer::DenseLayer(Matrix w, std::vector<double> b, Activation act)
    : weight(std::move(w)), bias(std::move(b)), activation(act) {
    if (bias.size() != weight.rows()) {
        throw ShapeError("DenseLayer: weight " + weight.shape_string() + " with bias of length " +
                         std::to_string(bias.size()));
    }
    if (static_cast<std::uint8_t>(act) > 2) throw std::invalid_argument("DenseLayer: invalid activation tag");
}

DenseLayer make_layer(std::size_t in_dim, std::size_t out_dim, Activation act, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix w(out_dim, in_dim);
    for (double& v : w.flat()) v = dist(rng);
    return DenseLayer(std::move(w), std::vector<double>(out_dim, 0.0), act);
}

GradSet zero_grads(std::span<const DenseLayer> layers) {
    GradSet g;
    g.reserve(layers.size());
    for (const auto& l : layers) g.push_back({Matrix(l.out_dim(), l.in_dim()), std::vector<double>(l.out_dim(), 0.0)});
    return g;
}

void accumulate(GradSet& acc, const GradSet& other) {
    if (acc.size() != other.size()) throw ShapeError("accumulate: grad sets differ in layer count");
    for (std::size_t i = 0; i < acc.size(); ++i) {
        add_inplace(acc[i].weight, other[i].weight);
        if (acc[i].bias.size() != other[i].bias.size()) throw ShapeError("accumulate: bias length mismatch");
        for (std::size_t k = 0; k < acc[i].bias.size(); ++k) acc[i].bias[k] += other[i].bias[k];
    }
}

Matrix affine_forward(const DenseLayer& layer, const Matrix& input) {
    if (input.cols() != layer.in_dim()) {
        throw ShapeError("affine_forward: input " + input.shape_string() + " does not match weight " +
                         layer.weight.shape_string());
    }
    Matrix out = matmul_nt(input, layer.weight);
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            double z = row[c] + layer.bias[c];
            switch (layer.activation) {
                case Activation::identity: break;
                case Activation::relu: z = z > 0.0 ? z : 0.0; break;
                case Activation::sigmoid: z = 1.0 / (1.0 + std::exp(-z)); break;
            }
            row[c] = z;
        }
    }
    return out;
}

BackwardResult affine_backward(const DenseLayer& layer, const Matrix& input, const Matrix& output,
                               const Matrix& grad_output) {
    if (input.cols() != layer.in_dim()) {
        throw ShapeError("affine_backward: input " + input.shape_string() + " does not match weight " +
                         layer.weight.shape_string());
    }
    if (grad_output.rows() != input.rows() || grad_output.cols() != layer.out_dim()) {
        throw ShapeError("affine_backward: grad_output " + grad_output.shape_string() + " expected " +
                         std::to_string(input.rows()) + "x" + std::to_string(layer.out_dim()));
    }
    require_same_shape(output, grad_output, "affine_backward(output)");

    // Gradient w.r.t. the pre-activation. relu'(0) = 0; the output is > 0 iff z > 0.
    Matrix grad_pre = grad_output;
    auto gp = grad_pre.flat();
    auto y = output.flat();
    switch (layer.activation) {
        case Activation::identity: break;
        case Activation::relu:
            for (std::size_t i = 0; i < gp.size(); ++i) gp[i] = y[i] > 0.0 ? gp[i] : 0.0;
            break;
        case Activation::sigmoid:
            for (std::size_t i = 0; i < gp.size(); ++i) gp[i] *= y[i] * (1.0 - y[i]);
            break;
    }

    BackwardResult res;
    res.grad.weight = matmul_tn(grad_pre, input);
    res.grad.bias.assign(layer.out_dim(), 0.0);
    for (std::size_t r = 0; r < grad_pre.rows(); ++r) {
        auto row = grad_pre.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) res.grad.bias[c] += row[c];
    }
    res.grad_input = matmul_nn(grad_pre, layer.weight);
    return res;
}

BackwardResult affine_backward(const DenseLayer& layer, const Matrix& input, const Matrix& grad_output) {
    return affine_backward(layer, input, affine_forward(layer, input), grad_output);
}

void sgd_step(std::span<DenseLayer> layers, const GradSet& grads, double lr) {
    if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("sgd_step: learning rate must be > 0");
    if (grads.size() != layers.size()) {
        throw ShapeError("sgd_step: " + std::to_string(grads.size()) + " gradients for " +
                         std::to_string(layers.size()) + " layers");
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        require_same_shape(layers[i].weight, grads[i].weight, "sgd_step");
        if (grads[i].bias.size() != layers[i].bias.size()) throw ShapeError("sgd_step: bias length mismatch");
        if (!all_finite(grads[i].weight.flat()) || !all_finite(grads[i].bias)) {
            throw std::runtime_error("sgd_step: non-finite gradient in layer " + std::to_string(i));
        }
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        auto w = layers[i].weight.flat();
        auto gw = grads[i].weight.flat();
        for (std::size_t k = 0; k < w.size(); ++k) w[k] -= lr * gw[k];
        for (std::size_t k = 0; k < layers[i].bias.size(); ++k) layers[i].bias[k] -= lr * grads[i].bias[k];
    }
}

std::size_t parameter_count(std::span<const DenseLayer> layers) {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weight.size() + l.bias.size();
    return n;
}

std::vector<double> flatten_parameters(std::span<const DenseLayer> layers) {
    std::vector<double> out;
    out.reserve(parameter_count(layers));
    for (const auto& l : layers) {
        out.insert(out.end(), l.weight.flat().begin(), l.weight.flat().end());
        out.insert(out.end(), l.bias.begin(), l.bias.end());
    }
    return out;
}

void assign_parameters(std::span<DenseLayer> layers, std::span<const double> values) {
    if (values.size() != parameter_count(layers)) {
        throw ShapeError("assign_parameters: " + std::to_string(values.size()) + " values for " +
                         std::to_string(parameter_count(layers)) + " parameters");
    }
    std::size_t pos = 0;
    for (auto& l : layers) {
        auto w = l.weight.flat();
        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(pos), w.size(), w.begin());
        pos += w.size();
        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(pos), l.bias.size(), l.bias.begin());
        pos += l.bias.size();
    }
}

std::vector<double> flatten_grads(const GradSet& grads) {
    std::vector<double> out;
    for (const auto& g : grads) {
        out.insert(out.end(), g.weight.flat().begin(), g.weight.flat().end());
        out.insert(out.end(), g.bias.begin(), g.bias.end());
    }
    return out;
}

double grad_check(const DifferentiableLoss& loss, std::span<const double> params, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("grad_check: epsilon must be > 0");
    std::vector<double> p(params.begin(), params.end());
    const LossAndGrad base = loss(p);
    if (!std::isfinite(base.value)) throw std::runtime_error("grad_check: loss is not finite at the base point");
    if (base.grad.size() != p.size()) {
        throw ShapeError("grad_check: analytic gradient has " + std::to_string(base.grad.size()) + " entries for " +
                         std::to_string(p.size()) + " parameters");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double saved = p[i];
        p[i] = saved + epsilon;
        const double up = loss(p).value;
        p[i] = saved - epsilon;
        const double down = loss(p).value;
        p[i] = saved;
        if (!std::isfinite(up) || !std::isfinite(down)) {
            throw std::runtime_error("grad_check: loss is not finite near coordinate " + std::to_string(i));
        }
        const double numeric = (up - down) / (2.0 * epsilon);
        const double analytic = base.grad[i];
        const double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
        worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
    return worst;
}

}  // namespace eeae
