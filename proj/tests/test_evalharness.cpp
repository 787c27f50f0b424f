#include "eeae/checkpoint.hpp"
#include "eeae/experiment.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace eeae;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_experiment(const fs::path& out) {
    ExperimentConfig c;
    c.data.synth_classes = 3;
    c.data.synth_dim = 8;
    c.data.synth_per_class = 12;
    c.split.per_class_train = 6;
    c.model.epochs = 3;
    c.model.m = 3;
    c.model.batch_size = 8;
    c.widths = {4, 2};
    c.finetune.epochs = 2;
    c.finetune.batch_size = 8;
    c.finetune.m = 3;
    c.trials = 2;
    c.output_dir = out;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("eeae_eval_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST(Knn, NearestLabelWins) {
    const Matrix train{{0, 0}, {10, 10}};
    const std::vector<int> labels{0, 1};
    EXPECT_EQ(knn_classify(train, labels, Matrix{{1, 1}, {9, 8}}), (std::vector<int>{0, 1}));
}

TEST(Knn, EquidistantGoesToLowerIndex) {
    const Matrix train{{1, 0}, {-1, 0}};
    EXPECT_EQ(knn_classify(train, std::vector<int>{5, 2}, Matrix{{0, 0}}), std::vector<int>{5});
}

TEST(Knn, VoteTieUsesSummedDistanceThenLabel) {
    const Matrix train{{1, 0}, {3, 0}, {-2, 0}, {-2.5, 0}};
    const std::vector<int> labels{1, 1, 0, 0};
    // k=4: two votes each; label 1 sums 4, label 0 sums 4.5.
    EXPECT_EQ(knn_classify(train, labels, Matrix{{0, 0}}, {4}), std::vector<int>{1});
    const Matrix sym{{1, 0}, {-1, 0}};
    EXPECT_EQ(knn_classify(sym, std::vector<int>{7, 3}, Matrix{{0, 0}}, {2}), std::vector<int>{3});
}

TEST(Knn, ExcludeSelf) {
    const Matrix train{{0, 0}, {0.1, 0}, {5, 5}};
    const std::vector<int> labels{0, 1, 1};
    KnnOptions o;
    o.exclude_self = true;
    EXPECT_EQ(knn_classify(train, labels, train, o), (std::vector<int>{1, 0, 1}));
}

TEST(Knn, CosineMetric) {
    const Matrix train{{1, 0}, {0, 1}};
    KnnOptions o;
    o.metric = Metric::cosine;
    EXPECT_EQ(knn_classify(train, std::vector<int>{0, 1}, Matrix{{0.1, 5}}, o), std::vector<int>{1});
}

TEST(Knn, Errors) {
    const Matrix train{{0, 0}, {1, 1}};
    const std::vector<int> labels{0, 1};
    EXPECT_THROW(knn_classify(Matrix(0, 2), {}, train), std::invalid_argument);
    EXPECT_THROW(knn_classify(train, std::vector<int>{0}, train), ShapeError);
    EXPECT_THROW(knn_classify(train, labels, Matrix{{1, 2, 3}}), ShapeError);
    EXPECT_THROW(knn_classify(train, labels, train, {3}), std::invalid_argument);
    EXPECT_THROW(parse_metric("manhattan"), std::invalid_argument);
}

TEST(Knn, MatchesBruteForce) {
    std::mt19937_64 rng(71);
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 5 + static_cast<std::size_t>(t) * 9;
        const Matrix train = oracle::random_matrix(n, 3, rng);
        std::vector<int> labels(n);
        for (auto& l : labels) l = static_cast<int>(rng() % 4);
        const Matrix query = oracle::random_matrix(15, 3, rng);
        for (std::size_t k : {1u, 3u, 4u}) {
            EXPECT_EQ(knn_classify(train, labels, query, {k}), oracle::knn(train, labels, query, k));
        }
    }
}

TEST(Accuracy, Basics) {
    EXPECT_EQ(accuracy(std::vector<int>{1, 2, 3, 4}, std::vector<int>{1, 0, 3, 0}), 0.5);
    EXPECT_THROW(accuracy(std::vector<int>{1}, std::vector<int>{1, 2}), ShapeError);
    EXPECT_THROW(accuracy(std::vector<int>{}, std::vector<int>{}), std::invalid_argument);
}

TEST(ExtractFeatures, EqualsAssembledEncoder) {
    AEConfig c;
    c.layer_sizes = {5, 3};
    StackedModel s;
    s.assembled = make_model(c);
    std::mt19937_64 rng(1);
    const Matrix x = oracle::random_matrix(4, 5, rng);
    EXPECT_EQ(extract_features(s, x), encode(s.assembled, x));
}

TEST(Checkpoint, RoundTripPreservesFeatures) {
    AEConfig c;
    c.layer_sizes = {6, 4};
    c.latent_activation = Activation::sigmoid;
    Checkpoint ck{make_model(c), {1.25, 2.5}, "{\"note\": 1}"};
    const auto bytes = serialize(ck);
    const auto back = deserialize(bytes);
    EXPECT_EQ(back.model, ck.model);
    EXPECT_EQ(back.snapshots, ck.snapshots);
    EXPECT_EQ(back.config, ck.config);
    std::mt19937_64 rng(2);
    const Matrix x = oracle::random_matrix(5, 6, rng);
    EXPECT_EQ(encode(back.model, x), encode(ck.model, x));

    const auto path = scratch("ckpt.bin");
    save_checkpoint(ck, path);
    EXPECT_EQ(load_checkpoint(path).model, ck.model);
    fs::remove(path);
}

TEST(Checkpoint, CorruptionIsDetected) {
    AEConfig c;
    c.layer_sizes = {3, 2};
    const auto bytes = serialize({make_model(c), {}, ""});

    auto magic = bytes;
    magic[0] = 'X';
    EXPECT_THROW(deserialize(magic), CheckpointHeaderError);

    auto version = bytes;
    version[8] = 99;
    EXPECT_THROW(deserialize(version), CheckpointVersionError);

    const std::vector<unsigned char> truncated(bytes.begin(), bytes.end() - 12);
    EXPECT_THROW(deserialize(truncated), CheckpointTruncatedError);

    auto flipped = bytes;
    flipped[bytes.size() - 20] ^= 0x01;
    EXPECT_THROW(deserialize(flipped), CheckpointChecksumError);

    EXPECT_THROW(load_checkpoint(scratch("absent.bin")), CheckpointError);
}

TEST(Config, DefaultsAndOverrides) {
    const auto c = parse_config(R"({"model": {"lambda": 3, "latent_activation": "sigmoid"},
                                    "stack": {"widths": [16, 8], "eta": 0.2},
                                    "experiment": {"trials": 4}})");
    EXPECT_EQ(c.model.lambda, 3.0);
    EXPECT_EQ(c.model.latent_activation, Activation::sigmoid);
    EXPECT_EQ(c.widths, (std::vector<std::size_t>{16, 8}));
    EXPECT_EQ(c.eta, 0.2);
    EXPECT_EQ(c.trials, 4u);
    EXPECT_EQ(c.data.kind, DataSource::Kind::synth);
    EXPECT_FALSE(c.split.mirror_train);
    EXPECT_EQ(c.finetune.lr, c.model.lr);
}

TEST(Config, ImageSourcesMirrorByDefault) {
    const auto c = parse_config(R"({"data": {"source": "image_dir", "root": "/x"}})");
    EXPECT_TRUE(c.split.mirror_train);
}

TEST(Config, Rejects) {
    EXPECT_THROW(parse_config(R"({"model": {"lamda": 3}})"), std::invalid_argument);
    EXPECT_THROW(parse_config(R"({"bogus": {}})"), std::invalid_argument);
    EXPECT_THROW(parse_config(R"({"data": {"source": "csv"}})"), std::invalid_argument);
    EXPECT_THROW(parse_config(R"({"stack": {"widths": []}})"), std::invalid_argument);
    EXPECT_THROW(parse_config(R"({"split": {"mirror_train": true}})"), std::invalid_argument);
    EXPECT_THROW(parse_config("{not json"), std::invalid_argument);
    EXPECT_THROW(parse_config(R"({"model": {"lr": "fast"}})"), std::invalid_argument);
}

TEST(Config, DumpRoundTrips) {
    auto c = tiny_experiment("out");
    c.model.mean_grad = MeanGrad::stopped;
    c.knn.metric = Metric::cosine;
    const auto back = parse_config(dump_config(c));
    EXPECT_EQ(dump_config(back), dump_config(c));
}

TEST(Summary, SampleStddev) {
    const auto s = summarize_accuracies({0.5, 0.7});
    EXPECT_DOUBLE_EQ(s.mean, 0.6);
    EXPECT_NEAR(s.stddev, std::sqrt(0.02), 1e-15);
    EXPECT_EQ(summarize_accuracies({0.9}).stddev, 0.0);
    std::vector<MetricsRecord> recs(3);
    recs[0].accuracy = 0.5;
    recs[2].accuracy = 0.7;
    const auto partial = summarize(recs);
    EXPECT_TRUE(partial.partial);
    EXPECT_EQ(partial.completed, 2u);
    EXPECT_DOUBLE_EQ(partial.mean, 0.6);
}

TEST(Experiment, ByteIdenticalMetricsAndFiles) {
    const auto out = scratch("exp");
    const auto cfg = tiny_experiment(out);
    const auto a = run_experiment(cfg);
    const std::string first = slurp(out / "metrics.csv");
    const auto b = run_experiment(cfg);
    EXPECT_EQ(first, slurp(out / "metrics.csv"));
    EXPECT_EQ(metrics_csv(a.records), metrics_csv(b.records));
    EXPECT_TRUE(fs::exists(out / "summary.json"));
    EXPECT_TRUE(fs::exists(out / "timings.csv"));
    EXPECT_TRUE(fs::exists(out / "config.json"));
    EXPECT_EQ(first.substr(0, first.find('\n')), "trial,epoch,L_a,L_h1,L_h2,L_h,L,phase,accuracy");
    EXPECT_NE(first.find(",result,"), std::string::npos);
    EXPECT_EQ(a.summary.completed, 2u);
    fs::remove_all(out);
}

TEST(Experiment, FailedTrialRecordedAsPartial) {
    auto cfg = tiny_experiment(scratch("fail"));
    cfg.model.m = 40;  // more neighbors than training rows
    const auto r = run_experiment(cfg, false);
    EXPECT_EQ(r.summary.completed, 0u);
    EXPECT_TRUE(r.summary.partial);
    EXPECT_FALSE(r.records[0].error.empty());
    EXPECT_NE(metrics_csv(r.records).find(",error,"), std::string::npos);
}
