#pragma once

// Brute-force reference implementations used only by the tests. They share no
// code path with the library beyond the Matrix container.

#include "eeae/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

inline eeae::Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double lo = 0.0,
                                  double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    eeae::Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = u(rng);
    }
    return m;
}

inline std::vector<double> mean_except(const eeae::Matrix& x, std::size_t j) {
    std::vector<double> out(x.cols(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        if (i == j) continue;
        for (std::size_t c = 0; c < x.cols(); ++c) out[c] += x(i, c);
    }
    for (double& v : out) v /= static_cast<double>(x.rows() - 1);
    return out;
}

inline double cosine(const eeae::Matrix& x, std::size_t a, std::size_t b) {
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) {
        ab += x(a, c) * x(b, c);
        aa += x(a, c) * x(a, c);
    }
    for (std::size_t c = 0; c < x.cols(); ++c) bb += x(b, c) * x(b, c);
    const double na = std::sqrt(aa), nb = std::sqrt(bb);
    if (na == 0.0 || nb == 0.0) return -1.0;
    return ab / (na * nb);
}

/// Full sort of every candidate by (similarity desc, index asc).
inline std::vector<std::size_t> top_m(const eeae::Matrix& x, std::size_t j, std::size_t m) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t k = 0; k < x.rows(); ++k) {
        if (k != j) all.emplace_back(cosine(x, j, k), k);
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < m; ++i) out.push_back(all[i].second);
    return out;
}

inline std::vector<double> mean_of_rows(const eeae::Matrix& x, const std::vector<std::size_t>& rows) {
    std::vector<double> out(x.cols(), 0.0);
    for (auto r : rows) {
        for (std::size_t c = 0; c < x.cols(); ++c) out[c] += x(r, c);
    }
    for (double& v : out) v /= static_cast<double>(rows.size());
    return out;
}

/// Exhaustive k-NN: sort every training row by (euclidean distance, index), vote,
/// break vote ties by summed distance then label.
inline std::vector<int> knn(const eeae::Matrix& train, const std::vector<int>& labels, const eeae::Matrix& query,
                            std::size_t k) {
    std::vector<int> out;
    for (std::size_t q = 0; q < query.rows(); ++q) {
        std::vector<std::pair<double, std::size_t>> d;
        for (std::size_t t = 0; t < train.rows(); ++t) {
            double s = 0.0;
            for (std::size_t c = 0; c < train.cols(); ++c) s += (query(q, c) - train(t, c)) * (query(q, c) - train(t, c));
            d.emplace_back(std::sqrt(s), t);
        }
        std::sort(d.begin(), d.end());
        std::map<int, int> count;
        std::map<int, double> sum;
        for (std::size_t i = 0; i < k; ++i) {
            count[labels[d[i].second]] += 1;
            sum[labels[d[i].second]] += d[i].first;
        }
        int best = count.begin()->first;
        for (const auto& [label, c] : count) {
            if (c > count[best] || (c == count[best] && sum[label] < sum[best])) best = label;
        }
        out.push_back(best);
    }
    return out;
}

/// Central differences of a scalar function of a flat vector.
inline std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> x, double eps = 1e-5) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + eps;
        const double up = f(x);
        x[i] = saved - eps;
        const double down = f(x);
        x[i] = saved;
        g[i] = (up - down) / (2 * eps);
    }
    return g;
}

inline double relative_error(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace oracle
