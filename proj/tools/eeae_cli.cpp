// eeae: command-line front end for training, stacking, fine-tuning and evaluating
// exclusivity-regularized autoencoders.

#include "eeae/checkpoint.hpp"
#include "eeae/experiment.hpp"
#include "eeae/gradcheck.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

using namespace eeae;

void print_epochs(const PhaseHistory& phase) {
    for (std::size_t e = 0; e < phase.epochs.size(); ++e) {
        const auto& l = phase.epochs[e];
        std::printf("%s epoch %zu  L_a %.6g  L_h1 %.6g  L_h2 %.6g  L_h %.6g  L %.6g\n", phase.phase.c_str(), e,
                    l.reconstruction, l.hetero, l.homo, l.exclusivity, l.total);
    }
}

Split load_split(const ExperimentConfig& cfg) {
    const Dataset data = load_source(cfg.data, cfg.base_seed);
    SplitSpec spec = cfg.split;
    spec.seed = cfg.base_seed;
    return split_per_class(data, spec);
}

int cmd_train(const ExperimentConfig& cfg, const std::string& out) {
    const Split split = load_split(cfg);
    AEConfig ae = cfg.model;
    ae.layer_sizes = {split.train.dim()};
    ae.layer_sizes.insert(ae.layer_sizes.end(), cfg.widths.begin(), cfg.widths.end());
    ae.seed = cfg.base_seed;
    auto result = train(make_model(ae), ae, split.train.examples);
    print_epochs({"train", result.history});
    save_checkpoint({result.model, {}, dump_config(cfg)}, out);
    return 0;
}

int cmd_stack(const ExperimentConfig& cfg, const std::string& out) {
    const Split split = load_split(cfg);
    std::vector<PhaseHistory> history;
    const auto stacked = train_stack(cfg.stack_config(split.train.dim(), cfg.base_seed), split.train.examples, &history);
    for (const auto& h : history) print_epochs(h);
    save_checkpoint({stacked.assembled, stacked.snapshots, dump_config(cfg)}, out);
    return 0;
}

int cmd_finetune(const ExperimentConfig& cfg, const std::string& in, const std::string& out) {
    const Split split = load_split(cfg);
    auto ckpt = load_checkpoint(in);
    StackedModel stacked;
    stacked.assembled = std::move(ckpt.model);
    stacked.snapshots = std::move(ckpt.snapshots);
    if (stacked.snapshots.empty()) {
        for (const auto& l : stacked.assembled.layers()) stacked.snapshots.push_back(norm_p(l.weight.flat(), cfg.p));
    }
    std::vector<PhaseHistory> history;
    stacked = fine_tune(std::move(stacked), split.train.examples, cfg.stack_config(split.train.dim(), cfg.base_seed),
                        nullptr, &history);
    for (const auto& h : history) print_epochs(h);
    for (std::size_t i = 0; i < stacked.snapshots.size(); ++i) {
        std::printf("layer %zu ratio %.12f\n", i,
                    weight_ratio(stacked.snapshots[i], stacked.assembled.layers()[i].weight, cfg.p));
    }
    save_checkpoint({stacked.assembled, stacked.snapshots, dump_config(cfg)}, out);
    return 0;
}

int cmd_eval(const ExperimentConfig& cfg, const std::string& in) {
    const Split split = load_split(cfg);
    StackedModel stacked;
    stacked.assembled = load_checkpoint(in).model;
    const Matrix train_f = extract_features(stacked, split.train.examples);
    const Matrix test_f = extract_features(stacked, split.test.examples);
    const auto predicted = knn_classify(train_f, *split.train.labels, test_f, cfg.knn);
    std::printf("features %zu  train %zu  test %zu  k %zu  accuracy %.6f\n", test_f.cols(), train_f.rows(),
                test_f.rows(), cfg.knn.k, accuracy(predicted, *split.test.labels));
    return 0;
}

int cmd_experiment(ExperimentConfig cfg, const std::string& out_dir) {
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    const auto result = run_experiment(cfg);
    for (const auto& r : result.records) {
        if (r.accuracy) {
            std::printf("trial %zu seed %llu accuracy %.6f (%.1fs)\n", r.trial, static_cast<unsigned long long>(r.seed),
                        *r.accuracy, r.seconds);
        } else {
            std::printf("trial %zu seed %llu FAILED: %s\n", r.trial, static_cast<unsigned long long>(r.seed),
                        r.error.c_str());
        }
    }
    std::printf("mean %.6f  std %.6f  completed %zu/%zu%s\n", result.summary.mean, result.summary.stddev,
                result.summary.completed, result.summary.trials, result.summary.partial ? "  (partial)" : "");
    std::printf("wrote %s\n", cfg.output_dir.string().c_str());
    return result.summary.completed > 0 ? 0 : 1;
}

int cmd_gradcheck(std::size_t configs, std::uint64_t seed, double tol) {
    const auto cases = run_gradcheck_suite(configs, seed);
    double worst = 0.0;
    for (const auto& c : cases) {
        std::printf("%-10s %-8s %.3e  %s\n", std::string(to_string(c.reduction)).c_str(),
                    std::string(to_string(c.mean_grad)).c_str(), c.max_relative_error, c.description.c_str());
        worst = std::max(worst, c.max_relative_error);
    }
    std::printf("max relative error %.3e over %zu checks (tolerance %.1e): %s\n", worst, cases.size(), tol,
                worst < tol ? "PASS" : "FAIL");
    return worst < tol ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exclusivity-enhanced autoencoder toolkit"};
    app.require_subcommand(1);

    std::string config_path, in, out, out_dir;
    auto add_config = [&](CLI::App* sub) { sub->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile); };

    auto* train_cmd = app.add_subcommand("train", "Train a single autoencoder and save a checkpoint");
    add_config(train_cmd);
    train_cmd->add_option("-o,--out", out, "Checkpoint to write")->required();

    auto* stack_cmd = app.add_subcommand("stack", "Greedy layerwise pretraining and assembly");
    add_config(stack_cmd);
    stack_cmd->add_option("-o,--out", out, "Checkpoint to write")->required();

    auto* ft_cmd = app.add_subcommand("finetune", "Fine-tune an assembled stack under the weight-ratio band");
    add_config(ft_cmd);
    ft_cmd->add_option("-i,--in", in, "Checkpoint to read")->required()->check(CLI::ExistingFile);
    ft_cmd->add_option("-o,--out", out, "Checkpoint to write")->required();

    auto* eval_cmd = app.add_subcommand("eval", "Extract features and report nearest-neighbor accuracy");
    add_config(eval_cmd);
    eval_cmd->add_option("-i,--in", in, "Checkpoint to read")->required()->check(CLI::ExistingFile);

    auto* exp_cmd = app.add_subcommand("experiment", "Repeated split/pretrain/fine-tune/evaluate trials");
    add_config(exp_cmd);
    exp_cmd->add_option("-o,--out-dir", out_dir, "Output directory (overrides output.dir)");

    std::size_t gc_configs = 20;
    std::uint64_t gc_seed = 1;
    double gc_tol = 1e-4;
    auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference check of the full objective");
    gc_cmd->add_option("--configs", gc_configs, "Random configurations")->capture_default_str();
    gc_cmd->add_option("--seed", gc_seed, "Generator seed")->capture_default_str();
    gc_cmd->add_option("--tolerance", gc_tol, "Maximum relative error")->capture_default_str();

    std::size_t classes = 3, dim = 32, per_class = 100;
    double spread = 0.12;
    std::uint64_t synth_seed = 0;
    std::string images, labels;
    auto* synth_cmd = app.add_subcommand("synth", "Write a Gaussian-cluster dataset as an IDX pair");
    synth_cmd->add_option("--classes", classes)->capture_default_str();
    synth_cmd->add_option("--dim", dim)->capture_default_str();
    synth_cmd->add_option("--per-class", per_class)->capture_default_str();
    synth_cmd->add_option("--spread", spread)->capture_default_str();
    synth_cmd->add_option("--seed", synth_seed)->capture_default_str();
    synth_cmd->add_option("--images", images, "Image IDX file to write")->required();
    synth_cmd->add_option("--labels", labels, "Label IDX file to write")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        auto config = [&] { return config_path.empty() ? ExperimentConfig{} : load_config(config_path); };
        if (*train_cmd) return cmd_train(config(), out);
        if (*stack_cmd) return cmd_stack(config(), out);
        if (*ft_cmd) return cmd_finetune(config(), in, out);
        if (*eval_cmd) return cmd_eval(config(), in);
        if (*exp_cmd) return cmd_experiment(config(), out_dir);
        if (*gc_cmd) return cmd_gradcheck(gc_configs, gc_seed, gc_tol);
        if (*synth_cmd) {
            const auto d = synth_gaussian(classes, dim, per_class, spread, synth_seed);
            save_idx(d, images, labels);
            std::printf("wrote %zu rows of %zu values\n", d.size(), d.dim());
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "eeae: %s\n", e.what());
        return 1;
    }
    return 0;
}
