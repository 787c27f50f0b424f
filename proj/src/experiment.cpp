#include "eeae/experiment.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace eeae {

namespace fs = std::filesystem;
using nlohmann::json;

void ExperimentConfig::validate() const {
    if (widths.empty()) throw std::invalid_argument("config: stack.widths needs at least one latent width");
    for (auto w : widths) {
        if (w == 0) throw std::invalid_argument("config: stack.widths entries must be positive");
    }
    if (trials < 1) throw std::invalid_argument("config: experiment.trials must be >= 1");
    if (knn.k < 1) throw std::invalid_argument("config: eval.knn_k must be >= 1");
    if (split.per_class_train < 1) throw std::invalid_argument("config: split.per_class_train must be >= 1");
    if (split.mirror_train && data.kind == DataSource::Kind::synth) {
        throw std::invalid_argument("config: split.mirror_train needs image data; set it to false for synth sources");
    }
    AEConfig probe = model;
    probe.layer_sizes = {1, widths.front()};
    probe.validate();
    stack_config(1, 0).validate();
}

StackConfig ExperimentConfig::stack_config(std::size_t input_dim, std::uint64_t seed) const {
    AEConfig base = model;
    base.seed = seed;
    std::vector<std::size_t> all{input_dim};
    all.insert(all.end(), widths.begin(), widths.end());
    StackConfig sc = uniform_stack(base, all, eta);
    sc.p = p;
    sc.finetune = finetune;
    sc.finetune.seed = seed;
    return sc;
}

namespace {

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

void read_path(const json& obj, const char* key, fs::path& out) {
    if (auto it = obj.find(key); it != obj.end()) out = it->get<std::string>();
}

void reject_unknown(const json& obj, const char* section, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) throw std::invalid_argument(std::string("config: '") + section + "' must be an object");
    const std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& [k, _] : obj.items()) {
        if (!known.contains(k)) throw std::invalid_argument(std::string("config: unknown key '") + section + "." + k + "'");
    }
}

const json& section(const json& root, const char* name) {
    static const json empty = json::object();
    auto it = root.find(name);
    return it == root.end() ? empty : *it;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    reject_unknown(root, "<root>", {"data", "split", "model", "stack", "experiment", "eval", "output"});
    ExperimentConfig c;
    try {
        const auto& d = section(root, "data");
        reject_unknown(d, "data", {"source", "images", "labels", "root", "synth", "subsample_per_class"});
        std::string source = "synth";
        read(d, "source", source);
        if (source == "synth") c.data.kind = DataSource::Kind::synth;
        else if (source == "idx") c.data.kind = DataSource::Kind::idx;
        else if (source == "image_dir") c.data.kind = DataSource::Kind::image_dir;
        else throw std::invalid_argument("config: data.source must be synth|idx|image_dir, got '" + source + "'");
        read_path(d, "images", c.data.images);
        read_path(d, "labels", c.data.labels);
        read_path(d, "root", c.data.root);
        read(d, "subsample_per_class", c.data.subsample_per_class);
        const auto& s = section(d, "synth");
        reject_unknown(s, "data.synth", {"classes", "dim", "per_class", "spread", "seed"});
        read(s, "classes", c.data.synth_classes);
        read(s, "dim", c.data.synth_dim);
        read(s, "per_class", c.data.synth_per_class);
        read(s, "spread", c.data.synth_spread);
        read(s, "seed", c.data.synth_seed);

        c.split.mirror_train = c.data.kind != DataSource::Kind::synth;
        const auto& sp = section(root, "split");
        reject_unknown(sp, "split", {"per_class_train", "mirror_train"});
        read(sp, "per_class_train", c.split.per_class_train);
        read(sp, "mirror_train", c.split.mirror_train);

        const auto& m = section(root, "model");
        reject_unknown(m, "model", {"encoder_activation", "latent_activation", "decoder_activation",
                                    "output_activation", "lambda", "m", "lr", "epochs", "batch_size", "sum_mode",
                                    "mean_grad"});
        if (m.contains("encoder_activation")) c.model.encoder_activation = parse_activation(m["encoder_activation"].get<std::string>());
        if (m.contains("latent_activation")) c.model.latent_activation = parse_activation(m["latent_activation"].get<std::string>());
        if (m.contains("decoder_activation")) c.model.decoder_activation = parse_activation(m["decoder_activation"].get<std::string>());
        if (m.contains("output_activation")) c.model.output_activation = parse_activation(m["output_activation"].get<std::string>());
        read(m, "lambda", c.model.lambda);
        read(m, "m", c.model.m);
        read(m, "lr", c.model.lr);
        read(m, "epochs", c.model.epochs);
        read(m, "batch_size", c.model.batch_size);
        if (m.contains("sum_mode")) c.model.reduction = parse_reduction(m["sum_mode"].get<std::string>());
        if (m.contains("mean_grad")) c.model.mean_grad = parse_mean_grad(m["mean_grad"].get<std::string>());

        const auto& st = section(root, "stack");
        reject_unknown(st, "stack", {"widths", "eta", "p", "finetune"});
        read(st, "widths", c.widths);
        read(st, "eta", c.eta);
        read(st, "p", c.p);
        c.finetune.lr = c.model.lr;
        c.finetune.batch_size = c.model.batch_size;
        c.finetune.lambda = c.model.lambda;
        c.finetune.m = c.model.m;
        const auto& ft = section(st, "finetune");
        reject_unknown(ft, "stack.finetune", {"epochs", "lr", "batch_size", "with_exclusivity"});
        read(ft, "epochs", c.finetune.epochs);
        read(ft, "lr", c.finetune.lr);
        read(ft, "batch_size", c.finetune.batch_size);
        read(ft, "with_exclusivity", c.finetune.with_exclusivity);

        const auto& ex = section(root, "experiment");
        reject_unknown(ex, "experiment", {"trials", "base_seed"});
        read(ex, "trials", c.trials);
        read(ex, "base_seed", c.base_seed);

        const auto& ev = section(root, "eval");
        reject_unknown(ev, "eval", {"knn_k", "metric"});
        read(ev, "knn_k", c.knn.k);
        if (ev.contains("metric")) c.knn.metric = parse_metric(ev["metric"].get<std::string>());

        const auto& out = section(root, "output");
        reject_unknown(out, "output", {"dir"});
        read_path(out, "dir", c.output_dir);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const ExperimentConfig& c) {
    static const char* kinds[] = {"synth", "idx", "image_dir"};
    json root;
    root["data"] = {{"source", kinds[static_cast<int>(c.data.kind)]},
                    {"images", c.data.images.string()},
                    {"labels", c.data.labels.string()},
                    {"root", c.data.root.string()},
                    {"subsample_per_class", c.data.subsample_per_class},
                    {"synth",
                     {{"classes", c.data.synth_classes},
                      {"dim", c.data.synth_dim},
                      {"per_class", c.data.synth_per_class},
                      {"spread", c.data.synth_spread},
                      {"seed", c.data.synth_seed}}}};
    root["split"] = {{"per_class_train", c.split.per_class_train}, {"mirror_train", c.split.mirror_train}};
    root["model"] = {{"encoder_activation", to_string(c.model.encoder_activation)},
                     {"latent_activation", to_string(c.model.latent_activation)},
                     {"decoder_activation", to_string(c.model.decoder_activation)},
                     {"output_activation", to_string(c.model.output_activation)},
                     {"lambda", c.model.lambda},
                     {"m", c.model.m},
                     {"lr", c.model.lr},
                     {"epochs", c.model.epochs},
                     {"batch_size", c.model.batch_size},
                     {"sum_mode", to_string(c.model.reduction)},
                     {"mean_grad", to_string(c.model.mean_grad)}};
    root["stack"] = {{"widths", c.widths},
                     {"eta", c.eta},
                     {"p", c.p},
                     {"finetune",
                      {{"epochs", c.finetune.epochs},
                       {"lr", c.finetune.lr},
                       {"batch_size", c.finetune.batch_size},
                       {"with_exclusivity", c.finetune.with_exclusivity}}}};
    root["experiment"] = {{"trials", c.trials}, {"base_seed", c.base_seed}};
    root["eval"] = {{"knn_k", c.knn.k}, {"metric", to_string(c.knn.metric)}};
    root["output"] = {{"dir", c.output_dir.string()}};
    return root.dump(2);
}

Dataset load_source(const DataSource& source, std::uint64_t seed) {
    Dataset d;
    switch (source.kind) {
        case DataSource::Kind::synth:
            d = synth_gaussian(source.synth_classes, source.synth_dim, source.synth_per_class, source.synth_spread,
                               source.synth_seed);
            break;
        case DataSource::Kind::idx: d = load_idx(source.images, source.labels); break;
        case DataSource::Kind::image_dir: d = load_image_dir(source.root); break;
    }
    if (source.subsample_per_class > 0) d = subsample_per_class(d, source.subsample_per_class, seed);
    d.validate();
    return d;
}

Summary summarize_accuracies(const std::vector<double>& accuracies) {
    Summary s;
    s.trials = accuracies.size();
    s.completed = accuracies.size();
    if (accuracies.empty()) return s;
    s.mean = std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / static_cast<double>(accuracies.size());
    if (accuracies.size() > 1) {
        double ss = 0.0;
        for (double a : accuracies) ss += (a - s.mean) * (a - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(accuracies.size() - 1));
    }
    return s;
}

Summary summarize(const std::vector<MetricsRecord>& records) {
    std::vector<double> acc;
    for (const auto& r : records) {
        if (r.accuracy) acc.push_back(*r.accuracy);
    }
    Summary s = summarize_accuracies(acc);
    s.trials = records.size();
    s.partial = s.completed != s.trials;
    return s;
}

TrialResult run_trial(const ExperimentConfig& config, const Dataset& dataset, std::uint64_t seed) {
    SplitSpec spec = config.split;
    spec.seed = seed;
    const Split split = split_per_class(dataset, spec);
    const StackConfig sc = config.stack_config(dataset.dim(), seed);

    TrialResult result;
    result.model = train_stack(sc, split.train.examples, &result.history);
    result.model = fine_tune(std::move(result.model), split.train.examples, sc, nullptr, &result.history);

    const Matrix train_features = extract_features(result.model, split.train.examples);
    const Matrix test_features = extract_features(result.model, split.test.examples);
    KnnOptions knn = config.knn;
    knn.exclude_self = false;
    const auto predicted = knn_classify(train_features, *split.train.labels, test_features, knn);
    result.accuracy = accuracy(predicted, *split.test.labels);
    return result;
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

}  // namespace

std::string metrics_csv(const std::vector<MetricsRecord>& records) {
    std::ostringstream os;
    os << "trial,epoch,L_a,L_h1,L_h2,L_h,L,phase,accuracy\n";
    for (const auto& r : records) {
        for (const auto& phase : r.history) {
            for (std::size_t e = 0; e < phase.epochs.size(); ++e) {
                const auto& l = phase.epochs[e];
                os << r.trial << ',' << e << ',' << fmt_double(l.reconstruction) << ',' << fmt_double(l.hetero) << ','
                   << fmt_double(l.homo) << ',' << fmt_double(l.exclusivity) << ',' << fmt_double(l.total) << ','
                   << phase.phase << ",\n";
            }
        }
        if (r.accuracy) {
            os << r.trial << ",,,,,,,result," << fmt_double(*r.accuracy) << '\n';
        } else {
            os << r.trial << ",,,,,,,error,\n";
        }
    }
    return os.str();
}

ExperimentResult run_experiment(const ExperimentConfig& config, bool write_files) {
    config.validate();
    const Dataset dataset = load_source(config.data, config.base_seed);
    ExperimentResult result;
    for (std::size_t t = 0; t < config.trials; ++t) {
        MetricsRecord rec;
        rec.trial = t;
        rec.seed = config.base_seed + t;
        const auto start = std::chrono::steady_clock::now();
        try {
            auto trial = run_trial(config, dataset, rec.seed);
            rec.history = std::move(trial.history);
            rec.accuracy = trial.accuracy;
        } catch (const std::exception& e) {
            rec.error = e.what();
        }
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.records.push_back(std::move(rec));
    }
    result.summary = summarize(result.records);

    if (write_files) {
        fs::create_directories(config.output_dir);
        write_text(config.output_dir / "metrics.csv", metrics_csv(result.records));
        std::ostringstream timings;
        timings << "trial,seed,seconds,error\n";
        for (const auto& r : result.records) {
            timings << r.trial << ',' << r.seed << ',' << fmt_double(r.seconds) << ',' << json(r.error).dump() << '\n';
        }
        write_text(config.output_dir / "timings.csv", timings.str());
        json summary = {{"trials", result.summary.trials},
                        {"completed", result.summary.completed},
                        {"partial", result.summary.partial},
                        {"mean_accuracy", result.summary.mean},
                        {"stddev_accuracy", result.summary.stddev}};
        json per_trial = json::array();
        for (const auto& r : result.records) {
            per_trial.push_back({{"trial", r.trial},
                                 {"seed", r.seed},
                                 {"accuracy", r.accuracy ? json(*r.accuracy) : json(nullptr)},
                                 {"error", r.error}});
        }
        summary["per_trial"] = std::move(per_trial);
        write_text(config.output_dir / "summary.json", summary.dump(2) + "\n");
        write_text(config.output_dir / "config.json", dump_config(config) + "\n");
    }
    return result;
}

}  // namespace eeae
