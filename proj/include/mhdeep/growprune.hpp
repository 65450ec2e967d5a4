#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mhdeep/mlp.hpp"

namespace mhdeep::growprune {

struct GrowPruneConfig {
    double alpha = 0.5;          // per-layer fraction of weights pruned
    int num_iterations = 5;      // grow/prune rounds after the initial prune
    int epochs_per_change = 20;  // training epochs after each architecture change
    double initial_lr = 1e-4;
    bool lr_halving = true;      // halve the rate each succeeding iteration
    int batch_size = 256;

    // dense pre-training on labeled synthetic data
    int pretrain_epochs = 20;
    double pretrain_lr = 5e-4;

    // dense warm-up on real training data before the first prune
    int warmup_epochs = 20;
    double warmup_lr = 5e-4;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) {
            throw ConfigError("growprune.alpha must be in (0,1), got " + std::to_string(alpha));
        }
        if (num_iterations < 1) throw ConfigError("growprune.num_iterations must be >= 1");
        if (epochs_per_change < 0) throw ConfigError("growprune.epochs_per_change must be >= 0");
        if (batch_size < 1) throw ConfigError("growprune.batch_size must be >= 1");
        if (pretrain_epochs < 0) throw ConfigError("growprune.pretrain_epochs must be >= 0");
        if (warmup_epochs < 0) throw ConfigError("growprune.warmup_epochs must be >= 0");
        if (initial_lr < 0 || pretrain_lr < 0 || warmup_lr < 0) {
            throw ConfigError("growprune learning rates must be >= 0");
        }
    }
};

struct HistoryEntry {
    int iteration = 0;  // 0 = initial prune, then 1..num_iterations
    double learning_rate = 0.0;
    double validation_accuracy = 0.0;
    long long active_params = 0;
};

template <class Scalar>
struct SynthesisResult {
    nn::MaskedMlp<Scalar> model;  // checkpoint with the best validation accuracy
    std::vector<HistoryEntry> history;
    double best_validation_accuracy = 0.0;
};

// Dense pre-training on labeled synthetic data; masks must be (and stay)
// all ones.
template <class Scalar>
void pretrain(nn::MaskedMlp<Scalar>& mlp, const typename nn::MaskedMlp<Scalar>::Mat& x,
              const Eigen::VectorXi& y, const GrowPruneConfig& config, std::uint64_t seed) {
    config.validate();
    if (config.pretrain_epochs == 0) return;
    nn::TrainConfig<Scalar> tc;
    tc.learning_rate = static_cast<Scalar>(config.pretrain_lr);
    tc.batch_size = config.batch_size;
    tc.epochs = config.pretrain_epochs;
    tc.shuffle_seed = derive_seed(seed, "pretrain");
    nn::train_epochs(mlp, x, y, tc);
}

// Per layer, masks out the floor(alpha * M * N) smallest-magnitude weights;
// ties break by ascending (row, col). Biases are never pruned.
template <class Scalar>
void prune(nn::MaskedMlp<Scalar>& mlp, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ConfigError("pruning ratio must be in (0,1), got " + std::to_string(alpha));
    }
    for (auto& layer : mlp.layers) {
        const auto total = static_cast<long long>(layer.weights.size());
        const auto k = static_cast<long long>(std::floor(alpha * static_cast<double>(total)));
        if (k >= total) {
            throw NumericError("pruning would empty a layer (" + std::to_string(k) + " of " +
                               std::to_string(total) + " weights)");
        }
        if (k == 0) continue;
        struct Entry {
            Scalar magnitude;
            Eigen::Index row;
            Eigen::Index col;
        };
        std::vector<Entry> entries;
        entries.reserve(static_cast<std::size_t>(total));
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
                entries.push_back({std::abs(layer.weights(r, c)), r, c});
            }
        }
        std::nth_element(entries.begin(), entries.begin() + (k - 1), entries.end(),
                         [](const Entry& a, const Entry& b) {
                             if (a.magnitude != b.magnitude) return a.magnitude < b.magnitude;
                             if (a.row != b.row) return a.row < b.row;
                             return a.col < b.col;
                         });
        for (long long i = 0; i < k; ++i) {
            const auto& e = entries[static_cast<std::size_t>(i)];
            layer.mask(e.row, e.col) = Scalar(0);
            layer.weights(e.row, e.col) = Scalar(0);
        }
    }
}

// Restores every mask to one; previously pruned weights stay at zero and
// become trainable again.
template <class Scalar>
void grow(nn::MaskedMlp<Scalar>& mlp) {
    for (auto& layer : mlp.layers) {
        layer.mask.setOnes();
    }
}

// Iterative magnitude pruning with full growth. The initial prune + train
// counts as iteration 0, followed by num_iterations grow/prune rounds; the
// checkpoint with the highest validation accuracy wins.
template <class Scalar>
SynthesisResult<Scalar> synthesize(nn::MaskedMlp<Scalar> mlp,
                                   const typename nn::MaskedMlp<Scalar>::Mat& x_train,
                                   const Eigen::VectorXi& y_train,
                                   const typename nn::MaskedMlp<Scalar>::Mat& x_val,
                                   const Eigen::VectorXi& y_val, const GrowPruneConfig& config,
                                   std::uint64_t seed) {
    config.validate();
    if (x_train.rows() == 0 || x_val.rows() == 0) {
        throw DataError("synthesize needs non-empty train and validation sets");
    }

    const auto train_stage = [&](double lr, int iteration) {
        nn::TrainConfig<Scalar> tc;
        tc.learning_rate = static_cast<Scalar>(lr);
        tc.batch_size = config.batch_size;
        tc.epochs = config.epochs_per_change;
        tc.shuffle_seed = derive_seed(seed, "gp-train", {static_cast<std::uint64_t>(iteration)});
        nn::train_epochs(mlp, x_train, y_train, tc);
    };

    if (config.warmup_epochs > 0) {
        nn::TrainConfig<Scalar> tc;
        tc.learning_rate = static_cast<Scalar>(config.warmup_lr);
        tc.batch_size = config.batch_size;
        tc.epochs = config.warmup_epochs;
        tc.shuffle_seed = derive_seed(seed, "gp-warmup");
        nn::train_epochs(mlp, x_train, y_train, tc);
    }

    SynthesisResult<Scalar> result;
    bool have_best = false;
    const auto evaluate_and_keep = [&](int iteration, double lr) {
        const double acc = nn::accuracy(mlp, x_val, y_val);
        result.history.push_back({iteration, lr, acc, nn::count_params(mlp)});
        if (!have_best || acc > result.best_validation_accuracy) {
            have_best = true;
            result.best_validation_accuracy = acc;
            result.model = mlp;
        }
    };

    prune(mlp, config.alpha);
    train_stage(config.initial_lr, 0);
    evaluate_and_keep(0, config.initial_lr);

    for (int i = 1; i <= config.num_iterations; ++i) {
        grow(mlp);
        prune(mlp, config.alpha);
        const double lr =
            config.lr_halving ? config.initial_lr / std::pow(2.0, i) : config.initial_lr;
        train_stage(lr, i);
        evaluate_and_keep(i, lr);
    }
    return result;
}

}  // namespace mhdeep::growprune
