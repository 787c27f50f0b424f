#include "eeae/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace eeae {

Matrix extract_features(const StackedModel& stacked, const Matrix& data) { return encode(stacked.assembled, data); }

std::string_view to_string(Metric m) { return m == Metric::euclidean ? "euclidean" : "cosine"; }

Metric parse_metric(std::string_view name) {
    if (name == "euclidean") return Metric::euclidean;
    if (name == "cosine") return Metric::cosine;
    throw std::invalid_argument("unknown metric '" + std::string(name) + "' (expected euclidean|cosine)");
}

namespace {

double distance(std::span<const double> a, std::span<const double> b, Metric metric) {
    if (metric == Metric::euclidean) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            s += d * d;
        }
        return std::sqrt(s);
    }
    const double na = norm2(a);
    const double nb = norm2(b);
    if (na == 0.0 || nb == 0.0) return 2.0;
    return 1.0 - dot(a, b) / (na * nb);
}

}  // namespace

std::vector<int> knn_classify(const Matrix& train_features, std::span<const int> train_labels,
                              const Matrix& query_features, const KnnOptions& options) {
    if (train_features.rows() == 0) throw std::invalid_argument("knn_classify: empty training set");
    if (train_labels.size() != train_features.rows()) {
        throw ShapeError("knn_classify: " + std::to_string(train_labels.size()) + " labels for " +
                         std::to_string(train_features.rows()) + " training rows");
    }
    if (query_features.cols() != train_features.cols()) {
        throw ShapeError("knn_classify: query width " + std::to_string(query_features.cols()) +
                         " differs from training width " + std::to_string(train_features.cols()));
    }
    const std::size_t candidates = train_features.rows() - (options.exclude_self ? 1 : 0);
    if (options.k < 1 || options.k > candidates) {
        throw std::invalid_argument("knn_classify: k=" + std::to_string(options.k) + " with " +
                                    std::to_string(candidates) + " candidates");
    }
    if (options.exclude_self && query_features.rows() != train_features.rows()) {
        throw ShapeError("knn_classify: exclude_self needs the query set to be the training set");
    }

    std::vector<int> predicted(query_features.rows());
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(train_features.rows());
    for (std::size_t q = 0; q < query_features.rows(); ++q) {
        dist.clear();
        for (std::size_t t = 0; t < train_features.rows(); ++t) {
            if (options.exclude_self && t == q) continue;
            dist.emplace_back(distance(query_features.row(q), train_features.row(t), options.metric), t);
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(options.k), dist.end());

        std::map<int, std::pair<std::size_t, double>> votes;  // label → (count, summed distance)
        for (std::size_t i = 0; i < options.k; ++i) {
            auto& v = votes[train_labels[dist[i].second]];
            ++v.first;
            v.second += dist[i].first;
        }
        auto best = votes.begin();
        for (auto it = std::next(votes.begin()); it != votes.end(); ++it) {
            const auto [count, sum] = it->second;
            if (count > best->second.first || (count == best->second.first && sum < best->second.second)) best = it;
        }
        predicted[q] = best->first;
    }
    return predicted;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) {
        throw ShapeError("accuracy: " + std::to_string(predicted.size()) + " predictions for " +
                         std::to_string(truth.size()) + " labels");
    }
    if (truth.empty()) throw std::invalid_argument("accuracy: empty label set");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace eeae
