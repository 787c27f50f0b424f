#pragma once

#include "eeae/matrix.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace eeae {

inline constexpr double kNormEps = 1e-12;

/// Dimension-wise nonnegative clamp: v_i if v_i ≥ 0, else 0.
std::vector<double> omega(std::span<const double> v);

struct CosineGrad {
    double value = 0.0;
    std::vector<double> d_prototype;  // ∂/∂u
    std::vector<double> d_code;       // ∂/∂h
};

/// Ω[u − h]·h / (‖Ω[u − h]‖ ‖h‖). Returns 0 when either norm is below `eps`.
double clamped_cosine(std::span<const double> prototype, std::span<const double> code, double eps = kNormEps);

/// Same quotient plus its gradient w.r.t. both arguments. The degenerate rule
/// gives a zero gradient; the clamp's subgradient at exactly 0 is 0.
CosineGrad clamped_cosine_grad(std::span<const double> prototype, std::span<const double> code,
                               double eps = kNormEps);

/// Precomputed global statistics of one training set, built once in its input space.
struct ExclusivityContext {
    std::vector<double> dataset_sum;
    std::size_t n = 0;
    std::size_t m = 0;
    /// neighbor_table[i] holds the m rows most cosine-similar to row i, best first, never i itself.
    std::vector<std::vector<std::size_t>> neighbor_table;
};

struct ExclusivityTargets {
    std::vector<double> hetero_mean;  // mean of every row except i
    std::vector<double> homo_mean;    // mean of row i's m neighbors
};

/// Per-row targets for a whole dataset, row-aligned with it.
struct TargetTable {
    Matrix hetero;
    Matrix homo;
};

/// (dataset_sum − x_j) / (n − 1).
std::vector<double> exclude_one_mean(const ExclusivityContext& ctx, std::span<const double> x_j);

/// The m rows (excluding j) of highest cosine similarity with row j; ties go to
/// the lower index. Zero-norm rows score −1.
std::vector<std::size_t> top_m_neighbors(const Matrix& dataset, std::size_t j, std::size_t m);

ExclusivityContext build_context(const Matrix& dataset, std::size_t m);

ExclusivityTargets targets_for(const ExclusivityContext& ctx, const Matrix& dataset, std::size_t i);

TargetTable build_targets(const ExclusivityContext& ctx, const Matrix& dataset);

enum class Reduction { batch_mean, sum };

struct ExclusivityLoss {
    double hetero = 0.0;  // L_h1
    double homo = 0.0;    // L_h2
    double total = 0.0;   // L_h1 + (1 − L_h2)
    Matrix d_codes;
    Matrix d_hetero;
    Matrix d_homo;
};

/// Heterogeneous repulsion and homologous attraction over a batch of latent codes.
/// Row i of `enc_hetero` / `enc_homo` must be the encoded prototypes of row i of
/// `codes`. Gradients are w.r.t. all three inputs.
ExclusivityLoss exclusivity_loss(const Matrix& codes, const Matrix& enc_hetero, const Matrix& enc_homo,
                                 Reduction reduction = Reduction::batch_mean, double eps = kNormEps);

}  // namespace eeae
