#pragma once

#include "eeae/dataio.hpp"
#include "eeae/evaluation.hpp"
#include "eeae/stacking.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace eeae {

struct DataSource {
    enum class Kind { synth, idx, image_dir };
    Kind kind = Kind::synth;
    std::filesystem::path images;  // idx
    std::filesystem::path labels;  // idx
    std::filesystem::path root;    // image_dir
    std::size_t synth_classes = 3;
    std::size_t synth_dim = 32;
    std::size_t synth_per_class = 100;
    double synth_spread = 0.12;
    std::uint64_t synth_seed = 0;
    /// When nonzero, keep at most this many rows per class (seeded by base_seed).
    std::size_t subsample_per_class = 0;
};

/// Everything one run needs. Each field has a default; JSON keys mirror these names.
struct ExperimentConfig {
    DataSource data;
    /// mirror_train defaults to true for image sources and false for synth.
    SplitSpec split{10, 0, false};
    /// Template for every level; layer_sizes is ignored in favour of `widths`.
    AEConfig model;
    /// Latent width of each stacked level (s = widths.size()). The input width comes from the data.
    std::vector<std::size_t> widths{512, 256, 128};
    double eta = 0.6;
    double p = 2.0;
    FineTuneConfig finetune;
    std::size_t trials = 10;
    std::uint64_t base_seed = 0;
    KnnOptions knn;
    std::filesystem::path output_dir = "eeae-run";

    void validate() const;
    /// Stack layout for a given input width and trial seed.
    StackConfig stack_config(std::size_t input_dim, std::uint64_t seed) const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string dump_config(const ExperimentConfig& config);

Dataset load_source(const DataSource& source, std::uint64_t seed);

struct MetricsRecord {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::vector<PhaseHistory> history;
    std::optional<double> accuracy;
    double seconds = 0.0;
    std::string error;
};

struct Summary {
    std::size_t trials = 0;
    std::size_t completed = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for fewer than two trials
    bool partial = false;
};

Summary summarize(const std::vector<MetricsRecord>& records);
Summary summarize_accuracies(const std::vector<double>& accuracies);

/// Output of one split → pretrain → fine-tune → 1-NN pipeline.
struct TrialResult {
    StackedModel model;
    std::vector<PhaseHistory> history;
    double accuracy = 0.0;
};

TrialResult run_trial(const ExperimentConfig& config, const Dataset& dataset, std::uint64_t seed);

struct ExperimentResult {
    std::vector<MetricsRecord> records;
    Summary summary;
};

/// Runs config.trials trials with seeds base_seed + t. Failed trials are recorded and
/// skipped. With `write_files`, writes metrics.csv, timings.csv and summary.json into
/// config.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& config, bool write_files = true);

/// CSV header and rows of metrics.csv.
std::string metrics_csv(const std::vector<MetricsRecord>& records);

}  // namespace eeae
