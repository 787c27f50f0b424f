#include "eeae/gradcheck.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace eeae {

double check_total_loss(const AEModel& model, const Objective& objective, const Matrix& data,
                        const TargetTable& targets, std::span<const std::size_t> batch, double epsilon) {
    AEModel probe = model;
    // Stopped mode differentiates a surrogate whose prototypes are constants.
    const bool stopped = objective.mean_grad == MeanGrad::stopped && objective.lambda != 0.0;
    const EncodedPrototypes frozen = stopped ? encode_prototypes(model, targets, batch) : EncodedPrototypes{};
    auto loss = [&](std::span<const double> params) {
        assign_parameters(probe.layers(), params);
        auto r = stopped ? total_loss(probe, objective, data, batch, frozen)
                         : total_loss(probe, objective, data, targets, batch);
        return LossAndGrad{r.loss.total, flatten_grads(r.grads)};
    };
    return grad_check(loss, flatten_parameters(model.layers()), epsilon);
}

std::vector<GradcheckCase> run_gradcheck_suite(std::size_t configs, std::uint64_t seed, double epsilon) {
    std::mt19937_64 rng(seed);
    auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
    constexpr Activation kActs[] = {Activation::identity, Activation::relu, Activation::sigmoid};

    std::vector<GradcheckCase> out;
    for (std::size_t c = 0; c < configs; ++c) {
        AEConfig cfg;
        cfg.layer_sizes = {pick(2, 8)};
        const std::size_t depth = pick(1, 2);
        for (std::size_t d = 0; d < depth; ++d) cfg.layer_sizes.push_back(pick(2, 8));
        cfg.encoder_activation = kActs[pick(0, 2)];
        cfg.latent_activation = kActs[pick(0, 2)];
        cfg.decoder_activation = kActs[pick(0, 2)];
        cfg.output_activation = pick(0, 1) ? Activation::sigmoid : Activation::identity;
        cfg.lambda = std::uniform_real_distribution<double>(0.5, 10.0)(rng);
        cfg.seed = rng();

        const std::size_t n = pick(4, 10);
        cfg.m = pick(1, std::min<std::size_t>(4, n - 1));
        Matrix data(n, cfg.layer_sizes.front());
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (double& v : data.flat()) v = unit(rng);
        const auto targets = build_targets(build_context(data, cfg.m), data);
        AEModel model = make_model(cfg);
        // Nonzero biases keep relu units away from the all-dead corner.
        std::uniform_real_distribution<double> bias(-0.2, 0.5);
        for (auto& l : model.layers()) {
            for (double& b : l.bias) b = bias(rng);
        }

        std::vector<std::size_t> rows(n);
        for (std::size_t i = 0; i < n; ++i) rows[i] = i;
        std::shuffle(rows.begin(), rows.end(), rng);
        rows.resize(pick(1, std::min<std::size_t>(6, n)));

        std::ostringstream desc;
        desc << "dims";
        for (auto s : cfg.layer_sizes) desc << ' ' << s;
        desc << " acts " << to_string(cfg.encoder_activation) << '/' << to_string(cfg.latent_activation) << '/'
             << to_string(cfg.decoder_activation) << '/' << to_string(cfg.output_activation) << " n " << n << " m "
             << cfg.m << " batch " << rows.size() << " lambda " << cfg.lambda;

        for (Reduction red : {Reduction::batch_mean, Reduction::sum}) {
            for (MeanGrad mg : {MeanGrad::full, MeanGrad::stopped}) {
                const Objective objective{cfg.lambda, red, mg};
                out.push_back({desc.str(), red, mg, check_total_loss(model, objective, data, targets, rows, epsilon)});
            }
        }
    }
    return out;
}

}  // namespace eeae
