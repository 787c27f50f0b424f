#include "eeae/exclusivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace eeae {

std::vector<double> omega(std::span<const double> v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] >= 0.0 ? v[i] : 0.0;
    return out;
}

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b, const char* what) {
    if (a.size() != b.size()) {
        throw ShapeError(std::string(what) + ": lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
    }
}

}  // namespace

double clamped_cosine(std::span<const double> prototype, std::span<const double> code, double eps) {
    require_same_length(prototype, code, "clamped_cosine");
    double rh = 0.0, rr = 0.0, hh = 0.0;
    for (std::size_t k = 0; k < code.size(); ++k) {
        const double d = prototype[k] - code[k];
        const double r = d >= 0.0 ? d : 0.0;
        rh += r * code[k];
        rr += r * r;
        hh += code[k] * code[k];
    }
    const double rn = std::sqrt(rr);
    const double hn = std::sqrt(hh);
    if (rn < eps || hn < eps) return 0.0;
    return rh / (rn * hn);
}

CosineGrad clamped_cosine_grad(std::span<const double> prototype, std::span<const double> code, double eps) {
    require_same_length(prototype, code, "clamped_cosine");
    const std::size_t dim = code.size();
    CosineGrad out;
    out.d_prototype.assign(dim, 0.0);
    out.d_code.assign(dim, 0.0);

    std::vector<double> r(dim);
    double rh = 0.0, rr = 0.0, hh = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        const double d = prototype[k] - code[k];
        r[k] = d >= 0.0 ? d : 0.0;
        rh += r[k] * code[k];
        rr += r[k] * r[k];
        hh += code[k] * code[k];
    }
    const double rn = std::sqrt(rr);
    const double hn = std::sqrt(hh);
    if (rn < eps || hn < eps) return out;

    const double inv = 1.0 / (rn * hn);
    const double c = rh * inv;
    out.value = c;
    const double r_scale = c / rr;
    const double h_scale = c / hh;
    for (std::size_t k = 0; k < dim; ++k) {
        // ∂c/∂r_k, masked by the clamp (active only where u_k − h_k > 0).
        const double dr = r[k] > 0.0 ? code[k] * inv - r[k] * r_scale : 0.0;
        out.d_prototype[k] = dr;
        out.d_code[k] = r[k] * inv - code[k] * h_scale - dr;
    }
    return out;
}

std::vector<double> exclude_one_mean(const ExclusivityContext& ctx, std::span<const double> x_j) {
    if (ctx.n < 2) throw std::invalid_argument("exclude_one_mean: need at least 2 examples, have " + std::to_string(ctx.n));
    require_same_length(ctx.dataset_sum, x_j, "exclude_one_mean");
    std::vector<double> out(x_j.size());
    const double denom = static_cast<double>(ctx.n - 1);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = (ctx.dataset_sum[k] - x_j[k]) / denom;
    return out;
}

namespace {

std::vector<double> row_norms(const Matrix& dataset) {
    std::vector<double> norms(dataset.rows());
    for (std::size_t i = 0; i < dataset.rows(); ++i) norms[i] = norm2(dataset.row(i));
    return norms;
}

std::vector<std::size_t> top_m_with_norms(const Matrix& dataset, std::span<const double> norms, std::size_t j,
                                          std::size_t m) {
    const std::size_t n = dataset.rows();
    if (j >= n) throw std::out_of_range("top_m_neighbors: row " + std::to_string(j) + " of " + std::to_string(n));
    if (m < 1 || m + 1 > n) {
        throw std::invalid_argument("top_m_neighbors: m=" + std::to_string(m) + " outside [1, " +
                                    std::to_string(n > 0 ? n - 1 : 0) + "]");
    }
    std::vector<double> sim(n, -1.0);
    const auto xj = dataset.row(j);
    for (std::size_t k = 0; k < n; ++k) {
        if (k == j || norms[k] == 0.0 || norms[j] == 0.0) continue;
        sim[k] = dot(xj, dataset.row(k)) / (norms[j] * norms[k]);
    }
    std::vector<std::size_t> idx;
    idx.reserve(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
        if (k != j) idx.push_back(k);
    }
    auto better = [&](std::size_t a, std::size_t b) { return sim[a] > sim[b] || (sim[a] == sim[b] && a < b); };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m), idx.end(), better);
    idx.resize(m);
    return idx;
}

}  // namespace

std::vector<std::size_t> top_m_neighbors(const Matrix& dataset, std::size_t j, std::size_t m) {
    const auto norms = row_norms(dataset);
    return top_m_with_norms(dataset, norms, j, m);
}

ExclusivityContext build_context(const Matrix& dataset, std::size_t m) {
    const std::size_t n = dataset.rows();
    if (n < 2) throw std::invalid_argument("build_context: need at least 2 examples, have " + std::to_string(n));
    if (m < 1 || m > n - 1) {
        throw std::invalid_argument("build_context: m=" + std::to_string(m) + " outside [1, " + std::to_string(n - 1) +
                                    "]");
    }
    ExclusivityContext ctx;
    ctx.n = n;
    ctx.m = m;
    ctx.dataset_sum.assign(dataset.cols(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = dataset.row(i);
        for (std::size_t k = 0; k < row.size(); ++k) ctx.dataset_sum[k] += row[k];
    }
    const auto norms = row_norms(dataset);
    ctx.neighbor_table.resize(n);
    for (std::size_t i = 0; i < n; ++i) ctx.neighbor_table[i] = top_m_with_norms(dataset, norms, i, m);
    return ctx;
}

ExclusivityTargets targets_for(const ExclusivityContext& ctx, const Matrix& dataset, std::size_t i) {
    if (i >= dataset.rows() || i >= ctx.neighbor_table.size()) {
        throw std::out_of_range("targets_for: row " + std::to_string(i) + " out of range");
    }
    ExclusivityTargets t;
    t.hetero_mean = exclude_one_mean(ctx, dataset.row(i));
    t.homo_mean.assign(dataset.cols(), 0.0);
    const auto& nbrs = ctx.neighbor_table[i];
    for (std::size_t k : nbrs) {
        auto row = dataset.row(k);
        for (std::size_t c = 0; c < row.size(); ++c) t.homo_mean[c] += row[c];
    }
    const double inv = 1.0 / static_cast<double>(nbrs.size());
    for (double& v : t.homo_mean) v *= inv;
    return t;
}

TargetTable build_targets(const ExclusivityContext& ctx, const Matrix& dataset) {
    if (ctx.n != dataset.rows()) {
        throw ShapeError("build_targets: context built over " + std::to_string(ctx.n) + " rows, dataset has " +
                         std::to_string(dataset.rows()));
    }
    TargetTable table{Matrix(dataset.rows(), dataset.cols()), Matrix(dataset.rows(), dataset.cols())};
    for (std::size_t i = 0; i < dataset.rows(); ++i) {
        const auto t = targets_for(ctx, dataset, i);
        std::copy(t.hetero_mean.begin(), t.hetero_mean.end(), table.hetero.row(i).begin());
        std::copy(t.homo_mean.begin(), t.homo_mean.end(), table.homo.row(i).begin());
    }
    return table;
}

ExclusivityLoss exclusivity_loss(const Matrix& codes, const Matrix& enc_hetero, const Matrix& enc_homo,
                                 Reduction reduction, double eps) {
    require_same_shape(codes, enc_hetero, "exclusivity_loss(hetero)");
    require_same_shape(codes, enc_homo, "exclusivity_loss(homo)");
    ExclusivityLoss out;
    out.d_codes = Matrix(codes.rows(), codes.cols());
    out.d_hetero = Matrix(codes.rows(), codes.cols());
    out.d_homo = Matrix(codes.rows(), codes.cols());
    if (codes.rows() == 0) {
        out.total = 1.0;
        return out;
    }
    const double scale = reduction == Reduction::batch_mean ? 1.0 / static_cast<double>(codes.rows()) : 1.0;
    double hetero = 0.0, homo = 0.0;
    for (std::size_t i = 0; i < codes.rows(); ++i) {
        const auto far = clamped_cosine_grad(enc_hetero.row(i), codes.row(i), eps);
        const auto near = clamped_cosine_grad(enc_homo.row(i), codes.row(i), eps);
        hetero += far.value;
        homo += near.value;
        auto dc = out.d_codes.row(i);
        auto dh = out.d_hetero.row(i);
        auto dm = out.d_homo.row(i);
        // L_h = L_h1 + 1 − L_h2: the homologous term enters with a minus sign.
        for (std::size_t k = 0; k < dc.size(); ++k) {
            dc[k] = scale * (far.d_code[k] - near.d_code[k]);
            dh[k] = scale * far.d_prototype[k];
            dm[k] = -scale * near.d_prototype[k];
        }
    }
    out.hetero = scale * hetero;
    out.homo = scale * homo;
    out.total = out.hetero + (1.0 - out.homo);
    return out;
}

}  // namespace eeae
