#pragma once

#include "eeae/matrix.hpp"
#include "eeae/stacking.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace eeae {

/// Latent codes of the full assembled encoder.
Matrix extract_features(const StackedModel& stacked, const Matrix& data);

enum class Metric { euclidean, cosine };

std::string_view to_string(Metric m);
Metric parse_metric(std::string_view name);

struct KnnOptions {
    std::size_t k = 1;
    Metric metric = Metric::euclidean;
    /// Skip the candidate with the query's own index (query set is the training set).
    bool exclude_self = false;
};

/// Majority vote among the k nearest training rows. Neighbors are ordered by
/// (distance, index); vote ties go to the smaller summed distance, then the lower label.
std::vector<int> knn_classify(const Matrix& train_features, std::span<const int> train_labels,
                              const Matrix& query_features, const KnnOptions& options = {});

/// Fraction of matching entries.
double accuracy(std::span<const int> predicted, std::span<const int> truth);

}  // namespace eeae
