#include <doctest.h>

#include <cmath>

#include "mhdeep/mlp.hpp"

using namespace mhdeep;
using Mlp = nn::MaskedMlp<double>;

namespace {

void random_batch(int n, int dim, std::uint64_t seed, Eigen::MatrixXd& x, Eigen::VectorXi& y) {
    Rng rng(seed);
    x.resize(n, dim);
    y.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < dim; ++j) x(i, j) = rng.normal();
        y(i) = static_cast<int>(rng.uniform_index(2));
    }
}

// central finite differences over every active parameter
double max_grad_rel_error(Mlp& mlp, const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                          double eps = 1e-5) {
    const auto grads = nn::backward(mlp, x, y);
    double worst = 0.0;
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        auto& layer = mlp.layers[l];
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
                if (layer.mask(r, c) == 0.0) continue;
                const double saved = layer.weights(r, c);
                layer.weights(r, c) = saved + eps;
                const double up = nn::loss(mlp, x, y);
                layer.weights(r, c) = saved - eps;
                const double down = nn::loss(mlp, x, y);
                layer.weights(r, c) = saved;
                const double fd = (up - down) / (2.0 * eps);
                const double denom = std::max({std::abs(fd), std::abs(grads.weights[l](r, c)), 1e-8});
                worst = std::max(worst, std::abs(fd - grads.weights[l](r, c)) / denom);
            }
        }
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
            const double saved = layer.bias(r);
            layer.bias(r) = saved + eps;
            const double up = nn::loss(mlp, x, y);
            layer.bias(r) = saved - eps;
            const double down = nn::loss(mlp, x, y);
            layer.bias(r) = saved;
            const double fd = (up - down) / (2.0 * eps);
            const double denom = std::max({std::abs(fd), std::abs(grads.bias[l](r)), 1e-8});
            worst = std::max(worst, std::abs(fd - grads.bias[l](r)) / denom);
        }
    }
    return worst;
}

void random_mask(Mlp& mlp, double keep_fraction, std::uint64_t seed) {
    Rng rng(seed);
    for (auto& layer : mlp.layers) {
        for (Eigen::Index r = 0; r < layer.mask.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.mask.cols(); ++c) {
                layer.mask(r, c) = rng.uniform() < keep_fraction ? 1.0 : 0.0;
            }
        }
    }
    nn::apply_masks(mlp);
}

// keeps pre-activations away from the ReLU kink, where central differences
// measure the average of the one-sided slopes instead of the subgradient
void randomize_biases(Mlp& mlp, std::uint64_t seed) {
    Rng rng(seed);
    for (auto& layer : mlp.layers) {
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
            layer.bias(r) = rng.uniform(0.05, 0.4) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        }
    }
}

}  // namespace

TEST_SUITE("network") {

TEST_CASE("parameter accounting") {
    // closed form: sum over layers of in*out + out
    const std::vector<int> sizes{2325, 256, 128, 128, 2};
    long long expected = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        expected += static_cast<long long>(sizes[l]) * sizes[l + 1] + sizes[l + 1];
    }
    CHECK(expected == 645'122);
    CHECK(nn::count_dense_params(sizes) == 645'122);
    const auto mlp = nn::init_mlp<double>(sizes, 1);
    CHECK(nn::count_params(mlp) == 645'122);
    CHECK(nn::compression_ratio(nn::count_dense_params(sizes), nn::count_params(mlp)) == 1.0);

    const auto tiny = nn::init_mlp<double>({2, 2}, 1);
    CHECK(nn::count_params(tiny) == 6);  // 4 weights + 2 biases
}

TEST_CASE("half-masked single layer") {
    // a bare 4x4 layer, assembled by hand since the classifier head is 2-wide
    Mlp mlp;
    mlp.sizes = {4, 4};
    Mlp::Layer layer;
    layer.weights = Eigen::MatrixXd::Random(4, 4);
    layer.bias = Eigen::VectorXd::Zero(4);
    layer.mask = Eigen::MatrixXd::Ones(4, 4);
    mlp.layers.push_back(layer);
    for (int i = 0; i < 8; ++i) mlp.layers[0].mask(i / 4, i % 4) = 0.0;  // mask half of 16
    nn::apply_masks(mlp);
    CHECK(nn::count_params(mlp) == 12);  // 8 active weights + 4 biases
    CHECK(nn::count_flops(mlp) == 2 * 8 + 4);
}

TEST_CASE("initialization is seed-deterministic") {
    const auto a = nn::init_mlp<double>({10, 8, 2}, 42);
    const auto b = nn::init_mlp<double>({10, 8, 2}, 42);
    const auto c = nn::init_mlp<double>({10, 8, 2}, 43);
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        CHECK(a.layers[l].weights == b.layers[l].weights);
        CHECK(a.layers[l].bias == b.layers[l].bias);
    }
    CHECK(a.layers[0].weights != c.layers[0].weights);

    // Glorot bounds
    const double limit = std::sqrt(6.0 / (10 + 8));
    CHECK(a.layers[0].weights.cwiseAbs().maxCoeff() <= limit);
    CHECK(a.layers[0].bias.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("init validation") {
    CHECK_THROWS_AS(nn::init_mlp<double>({5}, 0), ConfigError);
    CHECK_THROWS_AS(nn::init_mlp<double>({5, 0, 2}, 0), ConfigError);
    CHECK_THROWS_AS(nn::init_mlp<double>({5, 4, 3}, 0), ConfigError);  // output width must be 2
}

TEST_CASE("all-zero network outputs the uniform distribution") {
    auto mlp = nn::init_mlp<double>({6, 4, 2}, 5);
    for (auto& layer : mlp.layers) {
        layer.weights.setZero();
        layer.bias.setZero();
    }
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(7, 6);
    const auto probs = nn::forward(mlp, x);
    CHECK((probs.array() - 0.5).abs().maxCoeff() == 0.0);
}

TEST_CASE("softmax rows sum to one") {
    const auto mlp = nn::init_mlp<double>({12, 6, 2}, 9);
    Eigen::MatrixXd x;
    Eigen::VectorXi y;
    random_batch(40, 12, 10, x, y);
    const auto probs = nn::forward(mlp, x);
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        CHECK(std::abs(probs.row(i).sum() - 1.0) < 1e-9);
        CHECK(probs.row(i).minCoeff() >= 0.0);
    }
}

TEST_CASE("mask application is idempotent") {
    auto mlp = nn::init_mlp<double>({6, 5, 2}, 19);
    random_mask(mlp, 0.4, 7);
    const auto once = mlp;
    nn::apply_masks(mlp);
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        CHECK(mlp.layers[l].weights == once.layers[l].weights);
    }
}

TEST_CASE("masking a weight equals zeroing it") {
    auto masked = nn::init_mlp<double>({5, 4, 2}, 21);
    auto zeroed = masked;
    masked.layers[0].mask(2, 3) = 0.0;
    nn::apply_masks(masked);
    zeroed.layers[0].weights(2, 3) = 0.0;
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(9, 5);
    CHECK(nn::forward(masked, x) == nn::forward(zeroed, x));
}

TEST_CASE("gradients match central finite differences") {
    Eigen::MatrixXd x;
    Eigen::VectorXi y;
    random_batch(20, 10, 77, x, y);

    SUBCASE("dense") {
        auto mlp = nn::init_mlp<double>({10, 8, 4, 2}, 7);
        randomize_biases(mlp, 70);
        CHECK(max_grad_rel_error(mlp, x, y) < 1e-4);
    }
    SUBCASE("random half mask") {
        auto mlp = nn::init_mlp<double>({10, 8, 4, 2}, 8);
        random_mask(mlp, 0.5, 99);
        randomize_biases(mlp, 80);
        CHECK(max_grad_rel_error(mlp, x, y) < 1e-4);
        // masked entries carry exactly zero gradient
        const auto grads = nn::backward(mlp, x, y);
        for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
            for (Eigen::Index r = 0; r < grads.weights[l].rows(); ++r) {
                for (Eigen::Index c = 0; c < grads.weights[l].cols(); ++c) {
                    if (mlp.layers[l].mask(r, c) == 0.0) CHECK(grads.weights[l](r, c) == 0.0);
                }
            }
        }
    }
}

TEST_CASE("duplicated batch rows leave the mean gradient unchanged") {
    Eigen::MatrixXd x;
    Eigen::VectorXi y;
    random_batch(12, 6, 3, x, y);
    Eigen::MatrixXd xx(24, 6);
    Eigen::VectorXi yy(24);
    xx << x, x;
    yy << y, y;
    const auto mlp = nn::init_mlp<double>({6, 5, 2}, 4);
    const auto g1 = nn::backward(mlp, x, y);
    const auto g2 = nn::backward(mlp, xx, yy);
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        CHECK((g1.weights[l] - g2.weights[l]).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((g1.bias[l] - g2.bias[l]).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("zero learning rate leaves weights unchanged") {
    auto mlp = nn::init_mlp<double>({6, 4, 2}, 11);
    const auto before = mlp;
    Eigen::MatrixXd x;
    Eigen::VectorXi y;
    random_batch(30, 6, 12, x, y);
    nn::train_epochs(mlp, x, y, {0.0, 8, 3, 55});
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        CHECK(mlp.layers[l].weights == before.layers[l].weights);
        CHECK(mlp.layers[l].bias == before.layers[l].bias);
    }
}

TEST_CASE("one small step decreases the loss of a single sample") {
    auto mlp = nn::init_mlp<double>({6, 4, 2}, 13);
    Eigen::MatrixXd x(1, 6);
    x << 0.4, -0.2, 1.0, 0.3, -0.7, 0.1;
    Eigen::VectorXi y(1);
    y << 1;
    const double before = nn::loss(mlp, x, y);
    const auto grads = nn::backward(mlp, x, y);
    nn::sgd_step(mlp, grads, 1e-4);
    CHECK(nn::loss(mlp, x, y) < before);
}

TEST_CASE("training preserves the mask invariant") {
    auto mlp = nn::init_mlp<double>({8, 6, 2}, 17);
    random_mask(mlp, 0.5, 3);
    const Eigen::MatrixXd mask0 = mlp.layers[0].mask;
    Eigen::MatrixXd x;
    Eigen::VectorXi y;
    random_batch(50, 8, 18, x, y);
    nn::train_epochs(mlp, x, y, {1e-2, 16, 5, 9});
    for (const auto& layer : mlp.layers) {
        CHECK(layer.weights.cwiseProduct(Eigen::MatrixXd::Ones(layer.mask.rows(), layer.mask.cols()) -
                                         layer.mask)
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
    }
    CHECK(mlp.layers[0].mask == mask0);  // training never edits masks
}

TEST_CASE("loss is deterministic given weights and batch") {
    const auto mlp = nn::init_mlp<double>({7, 5, 2}, 23);
    Eigen::MatrixXd x;
    Eigen::VectorXi y;
    random_batch(25, 7, 24, x, y);
    CHECK(nn::loss(mlp, x, y) == nn::loss(mlp, x, y));
    auto copy = mlp;
    CHECK(nn::loss(copy, x, y) == nn::loss(mlp, x, y));
}

TEST_CASE("training separates separable data") {
    Rng rng(31);
    Eigen::MatrixXd x(200, 4);
    Eigen::VectorXi y(200);
    for (int i = 0; i < 200; ++i) {
        const int label = i % 2;
        for (int j = 0; j < 4; ++j) x(i, j) = (label ? 2.0 : -2.0) + rng.normal();
        y(i) = label;
    }
    auto mlp = nn::init_mlp<double>({4, 8, 2}, 32);
    const auto history = nn::train_epochs(mlp, x, y, {0.05, 32, 30, 33});
    CHECK(history.back() < history.front());
    CHECK(nn::accuracy(mlp, x, y) > 0.95);
}

TEST_CASE("float instantiation works") {
    const auto mlp = nn::init_mlp<float>({5, 3, 2}, 2);
    Eigen::MatrixXf x = Eigen::MatrixXf::Random(4, 5);
    const auto probs = nn::forward(mlp, x);
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        CHECK(std::abs(probs.row(i).sum() - 1.0f) < 1e-5f);
    }
}

TEST_CASE("flops accounting") {
    const std::vector<int> sizes{2325, 256, 128, 128, 2};
    const auto mlp = nn::init_mlp<double>(sizes, 1);
    CHECK(nn::count_flops(mlp) == nn::count_dense_flops(sizes));
    CHECK(nn::count_dense_flops(sizes) == 2LL * 644'608 + 514);
}

}  // TEST_SUITE
