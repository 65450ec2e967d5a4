#include <doctest.h>

#include <algorithm>

#include "mhdeep/growprune.hpp"

using namespace mhdeep;
using growprune::GrowPruneConfig;
using Mlp = nn::MaskedMlp<double>;

namespace {

void separable(int n, std::uint64_t seed, Eigen::MatrixXd& x, Eigen::VectorXi& y, int dim = 6,
               double gap = 3.0) {
    Rng rng(seed);
    x.resize(n, dim);
    y.resize(n);
    for (int i = 0; i < n; ++i) {
        const int label = i % 2;
        for (int j = 0; j < dim; ++j) x(i, j) = (label ? gap : 0.0) + rng.normal();
        y(i) = label;
    }
}

GrowPruneConfig quick_config() {
    GrowPruneConfig cfg;
    cfg.alpha = 0.5;
    cfg.num_iterations = 2;
    cfg.epochs_per_change = 5;
    cfg.initial_lr = 0.02;
    cfg.batch_size = 16;
    cfg.pretrain_epochs = 10;
    cfg.pretrain_lr = 0.02;
    cfg.warmup_epochs = 5;
    cfg.warmup_lr = 0.02;
    return cfg;
}

}  // namespace

TEST_SUITE("growprune") {

TEST_CASE("prune drops the smallest magnitudes") {
    auto mlp = nn::init_mlp<double>({2, 2}, 1);
    mlp.layers[0].weights << 0.1, 0.9, 0.5, -0.3;
    growprune::prune(mlp, 0.5);
    Eigen::MatrixXd expected_mask(2, 2);
    expected_mask << 0, 1, 1, 0;  // 0.1 and 0.3 pruned
    CHECK(mlp.layers[0].mask == expected_mask);
    CHECK(mlp.layers[0].weights(0, 0) == 0.0);
    CHECK(mlp.layers[0].weights(1, 1) == 0.0);
    CHECK(mlp.layers[0].weights(0, 1) == 0.9);
    CHECK(mlp.layers[0].weights(1, 0) == 0.5);
}

TEST_CASE("tiny alpha keeps every weight") {
    auto mlp = nn::init_mlp<double>({4, 3, 2}, 2);
    const auto before = mlp;
    growprune::prune(mlp, 1e-6);  // floor(alpha * MN) == 0 for these layers
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        CHECK(mlp.layers[l].weights == before.layers[l].weights);
        CHECK(mlp.layers[l].mask == before.layers[l].mask);
    }
}

TEST_CASE("prune count and magnitude ordering against a sort oracle") {
    Rng rng(5);
    for (double alpha : {0.25, 0.5, 0.8}) {
        auto mlp = nn::init_mlp<double>({9, 7, 2}, rng.next_u64());
        auto reference = mlp;
        growprune::prune(mlp, alpha);
        for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
            const auto& layer = mlp.layers[l];
            const auto total = static_cast<long long>(layer.weights.size());
            const auto k = static_cast<long long>(std::floor(alpha * static_cast<double>(total)));
            CHECK(static_cast<long long>(layer.mask.sum()) == total - k);

            // oracle: full sort of the original magnitudes
            std::vector<double> magnitudes;
            for (Eigen::Index r = 0; r < layer.mask.rows(); ++r) {
                for (Eigen::Index c = 0; c < layer.mask.cols(); ++c) {
                    magnitudes.push_back(std::abs(reference.layers[l].weights(r, c)));
                }
            }
            std::sort(magnitudes.begin(), magnitudes.end());
            double max_pruned = 0.0, min_active = 1e300;
            for (Eigen::Index r = 0; r < layer.mask.rows(); ++r) {
                for (Eigen::Index c = 0; c < layer.mask.cols(); ++c) {
                    const double mag = std::abs(reference.layers[l].weights(r, c));
                    if (layer.mask(r, c) == 0.0) {
                        max_pruned = std::max(max_pruned, mag);
                        CHECK(layer.weights(r, c) == 0.0);
                    } else {
                        min_active = std::min(min_active, mag);
                    }
                }
            }
            if (k > 0) {
                CHECK(max_pruned == magnitudes[static_cast<std::size_t>(k - 1)]);
                CHECK(min_active >= max_pruned);
            }
        }
    }
}

TEST_CASE("grow restores a dense mask without touching weights") {
    auto mlp = nn::init_mlp<double>({5, 4, 2}, 3);
    growprune::prune(mlp, 0.5);
    const auto pruned = mlp;
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(6, 5);
    const auto before = nn::forward(mlp, x);

    growprune::grow(mlp);
    CHECK(nn::count_params(mlp) == nn::count_dense_params(mlp.sizes));
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        CHECK(mlp.layers[l].weights == pruned.layers[l].weights);  // regrown weights stay zero
        CHECK(mlp.layers[l].mask.minCoeff() == 1.0);
    }
    CHECK(nn::forward(mlp, x) == before);  // zero weights contribute nothing

    const auto once = mlp;
    growprune::grow(mlp);
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        CHECK(mlp.layers[l].mask == once.layers[l].mask);
        CHECK(mlp.layers[l].weights == once.layers[l].weights);
    }
}

TEST_CASE("pretrain learns separable synthetic data and keeps the mask dense") {
    Eigen::MatrixXd xt, xv;
    Eigen::VectorXi yt, yv;
    separable(300, 1, xt, yt);
    separable(120, 2, xv, yv);
    auto mlp = nn::init_mlp<double>({6, 8, 2}, 7);
    growprune::pretrain(mlp, xt, yt, quick_config(), 9);
    CHECK(nn::accuracy(mlp, xv, yv) > 0.9);
    for (const auto& layer : mlp.layers) CHECK(layer.mask.minCoeff() == 1.0);
}

TEST_CASE("pretrain with zero epochs is a no-op") {
    auto mlp = nn::init_mlp<double>({6, 4, 2}, 8);
    const auto before = mlp;
    Eigen::MatrixXd x;
    Eigen::VectorXi y;
    separable(50, 3, x, y);
    auto cfg = quick_config();
    cfg.pretrain_epochs = 0;
    growprune::pretrain(mlp, x, y, cfg, 1);
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        CHECK(mlp.layers[l].weights == before.layers[l].weights);
    }
}

TEST_CASE("synthesize honours the iteration contract") {
    Eigen::MatrixXd xt, xv;
    Eigen::VectorXi yt, yv;
    separable(200, 4, xt, yt);
    separable(80, 5, xv, yv);
    auto mlp = nn::init_mlp<double>({6, 10, 2}, 11);
    auto cfg = quick_config();
    cfg.num_iterations = 5;
    const auto result = growprune::synthesize(mlp, xt, yt, xv, yv, cfg, 21);

    CHECK(result.history.size() == 6);  // initial + 5 iterations
    double best = 0.0;
    for (const auto& entry : result.history) best = std::max(best, entry.validation_accuracy);
    CHECK(result.best_validation_accuracy == best);
    CHECK(nn::accuracy(result.model, xv, yv) == best);
    CHECK(result.history.front().iteration == 0);
    CHECK(result.history.back().iteration == 5);
    // returned checkpoint beats or ties the initial pruned-and-trained model
    CHECK(result.best_validation_accuracy >= result.history.front().validation_accuracy);

    // every checkpoint follows a prune, so the active counts match k exactly
    for (std::size_t l = 0; l < result.model.layers.size(); ++l) {
        const auto& layer = result.model.layers[l];
        const auto total = static_cast<long long>(layer.weights.size());
        const auto k = static_cast<long long>(std::floor(cfg.alpha * static_cast<double>(total)));
        CHECK(static_cast<long long>(layer.mask.sum()) == total - k);
    }
    for (const auto& entry : result.history) {
        CHECK(entry.active_params == result.history.front().active_params);
    }
}

TEST_CASE("learning rate halves per iteration") {
    Eigen::MatrixXd xt, xv;
    Eigen::VectorXi yt, yv;
    separable(60, 6, xt, yt);
    separable(30, 7, xv, yv);
    auto cfg = quick_config();
    cfg.num_iterations = 3;
    cfg.initial_lr = 8e-3;
    const auto result =
        growprune::synthesize(nn::init_mlp<double>({6, 4, 2}, 12), xt, yt, xv, yv, cfg, 5);
    REQUIRE(result.history.size() == 4);
    CHECK(result.history[0].learning_rate == 8e-3);
    CHECK(result.history[1].learning_rate == 4e-3);
    CHECK(result.history[2].learning_rate == 2e-3);
    CHECK(result.history[3].learning_rate == 1e-3);

    cfg.lr_halving = false;
    const auto flat =
        growprune::synthesize(nn::init_mlp<double>({6, 4, 2}, 12), xt, yt, xv, yv, cfg, 5);
    for (const auto& entry : flat.history) CHECK(entry.learning_rate == 8e-3);
}

TEST_CASE("no-op configuration is the identity on weights") {
    Eigen::MatrixXd xt, xv;
    Eigen::VectorXi yt, yv;
    separable(40, 8, xt, yt);
    separable(20, 9, xv, yv);
    auto mlp = nn::init_mlp<double>({6, 4, 2}, 13);
    const auto before = mlp;
    GrowPruneConfig cfg;
    cfg.alpha = 1e-9;  // k = 0 everywhere
    cfg.num_iterations = 2;
    cfg.epochs_per_change = 3;
    cfg.initial_lr = 0.0;
    cfg.warmup_epochs = 3;
    cfg.warmup_lr = 0.0;
    const auto result = growprune::synthesize(mlp, xt, yt, xv, yv, cfg, 7);
    for (std::size_t l = 0; l < result.model.layers.size(); ++l) {
        CHECK(result.model.layers[l].weights == before.layers[l].weights);
        CHECK(result.model.layers[l].bias == before.layers[l].bias);
        CHECK(result.model.layers[l].mask == before.layers[l].mask);
    }
}

TEST_CASE("masked weights never revive during synthesis training") {
    Eigen::MatrixXd xt, xv;
    Eigen::VectorXi yt, yv;
    separable(120, 10, xt, yt);
    separable(60, 11, xv, yv);
    auto cfg = quick_config();
    cfg.warmup_epochs = 0;
    const auto result =
        growprune::synthesize(nn::init_mlp<double>({6, 8, 2}, 14), xt, yt, xv, yv, cfg, 3);
    for (const auto& layer : result.model.layers) {
        for (Eigen::Index r = 0; r < layer.mask.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.mask.cols(); ++c) {
                if (layer.mask(r, c) == 0.0) CHECK(layer.weights(r, c) == 0.0);
            }
        }
    }
}

TEST_CASE("config validation") {
    GrowPruneConfig cfg;
    cfg.alpha = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.alpha = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.num_iterations = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    auto mlp = nn::init_mlp<double>({4, 2}, 1);
    CHECK_THROWS_AS(growprune::prune(mlp, 1.5), ConfigError);
}

}  // TEST_SUITE
