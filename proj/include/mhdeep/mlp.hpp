#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "mhdeep/errors.hpp"
#include "mhdeep/rng.hpp"

namespace mhdeep::nn {

// Fully-connected classifier with a binary mask per weight matrix. Hidden
// layers are ReLU; the output layer produces two logits fed to a softmax
// cross-entropy. The invariant W == W .* mask holds at all times: pruned
// weights are exactly zero and receive zero gradient.
template <class Scalar = double>
struct MaskedMlp {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    struct Layer {
        Mat weights;  // out x in
        Vec bias;     // out
        Mat mask;     // out x in, entries 0 or 1
    };

    std::vector<int> sizes;  // input, hidden..., output
    std::vector<Layer> layers;

    int input_dim() const { return sizes.front(); }
    int output_dim() const { return sizes.back(); }
    int depth() const { return static_cast<int>(layers.size()); }
};

template <class Scalar>
struct Gradients {
    std::vector<typename MaskedMlp<Scalar>::Mat> weights;
    std::vector<typename MaskedMlp<Scalar>::Vec> bias;
};

template <class Scalar = double>
struct TrainConfig {
    Scalar learning_rate = Scalar(5e-4);
    int batch_size = 256;
    int epochs = 20;
    std::uint64_t shuffle_seed = 0;
};

// Glorot-uniform weights, zero biases, all-ones masks.
template <class Scalar>
MaskedMlp<Scalar> init_mlp(const std::vector<int>& sizes, std::uint64_t seed) {
    if (sizes.size() < 2) throw ConfigError("network needs at least input and output widths");
    for (int s : sizes) {
        if (s < 1) throw ConfigError("network layer width must be positive, got " + std::to_string(s));
    }
    if (sizes.back() != 2) {
        throw ConfigError("output layer width must be 2, got " + std::to_string(sizes.back()));
    }
    MaskedMlp<Scalar> mlp;
    mlp.sizes = sizes;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        typename MaskedMlp<Scalar>::Layer layer;
        const int in = sizes[l];
        const int out = sizes[l + 1];
        const Scalar limit = std::sqrt(Scalar(6) / Scalar(in + out));
        layer.weights.resize(out, in);
        for (int r = 0; r < out; ++r) {
            for (int c = 0; c < in; ++c) {
                layer.weights(r, c) = static_cast<Scalar>(rng.uniform(-limit, limit));
            }
        }
        layer.bias = MaskedMlp<Scalar>::Vec::Zero(out);
        layer.mask = MaskedMlp<Scalar>::Mat::Ones(out, in);
        mlp.layers.push_back(std::move(layer));
    }
    return mlp;
}

// Re-applies every mask so pruned weights are exactly zero.
template <class Scalar>
void apply_masks(MaskedMlp<Scalar>& mlp) {
    for (auto& layer : mlp.layers) {
        layer.weights = layer.weights.cwiseProduct(layer.mask);
    }
}

namespace detail {

template <class Scalar>
void check_batch(const MaskedMlp<Scalar>& mlp, const typename MaskedMlp<Scalar>::Mat& batch) {
    if (batch.cols() != mlp.input_dim()) {
        throw DataError("batch dimension " + std::to_string(batch.cols()) +
                        " does not match network input " + std::to_string(mlp.input_dim()));
    }
}

// Activations after every layer; logits stay raw in the last entry.
template <class Scalar>
std::vector<typename MaskedMlp<Scalar>::Mat> forward_pass(
    const MaskedMlp<Scalar>& mlp, const typename MaskedMlp<Scalar>::Mat& batch) {
    check_batch(mlp, batch);
    std::vector<typename MaskedMlp<Scalar>::Mat> acts;
    acts.reserve(mlp.layers.size() + 1);
    acts.push_back(batch);
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        const auto& layer = mlp.layers[l];
        typename MaskedMlp<Scalar>::Mat z = acts.back() * layer.weights.transpose();
        z.rowwise() += layer.bias.transpose();
        if (l + 1 < mlp.layers.size()) z = z.cwiseMax(Scalar(0));  // ReLU on hidden layers
        acts.push_back(std::move(z));
    }
    return acts;
}

template <class Scalar>
typename MaskedMlp<Scalar>::Mat softmax_rows(const typename MaskedMlp<Scalar>::Mat& logits) {
    using Mat = typename MaskedMlp<Scalar>::Mat;
    const auto row_max = logits.rowwise().maxCoeff();
    Mat p = (logits.colwise() - row_max).array().exp();
    const auto row_sum = p.rowwise().sum();
    return p.array().colwise() / row_sum.array();
}

}  // namespace detail

// Class probabilities, rows summing to one.
template <class Scalar>
typename MaskedMlp<Scalar>::Mat forward(const MaskedMlp<Scalar>& mlp,
                                        const typename MaskedMlp<Scalar>::Mat& batch) {
    const auto acts = detail::forward_pass(mlp, batch);
    return detail::softmax_rows<Scalar>(acts.back());
}

// Mean cross-entropy of the batch under the current weights.
namespace detail {

inline void check_labels(const Eigen::VectorXi& labels, int n_classes) {
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels(i) < 0 || labels(i) >= n_classes) {
            throw DataError("label " + std::to_string(labels(i)) + " outside [0, " +
                            std::to_string(n_classes) + ")");
        }
    }
}

}  // namespace detail

template <class Scalar>
Scalar loss(const MaskedMlp<Scalar>& mlp, const typename MaskedMlp<Scalar>::Mat& batch,
            const Eigen::VectorXi& labels) {
    if (batch.rows() != labels.size()) throw DataError("batch/label size mismatch");
    detail::check_labels(labels, mlp.output_dim());
    const auto acts = detail::forward_pass(mlp, batch);
    const auto& logits = acts.back();
    const auto row_max = logits.rowwise().maxCoeff();
    const auto lse =
        ((logits.colwise() - row_max).array().exp().rowwise().sum().log() + row_max.array());
    Scalar total = 0;
    for (Eigen::Index i = 0; i < batch.rows(); ++i) {
        total += lse(i) - logits(i, labels(i));
    }
    return total / static_cast<Scalar>(batch.rows());
}

// Exact gradients of the mean cross-entropy; masked entries come back zero.
template <class Scalar>
Gradients<Scalar> backward(const MaskedMlp<Scalar>& mlp, const typename MaskedMlp<Scalar>::Mat& batch,
                           const Eigen::VectorXi& labels) {
    using Mat = typename MaskedMlp<Scalar>::Mat;
    if (batch.rows() != labels.size()) throw DataError("batch/label size mismatch");
    detail::check_labels(labels, mlp.output_dim());
    const auto acts = detail::forward_pass(mlp, batch);
    const auto rows = batch.rows();

    Gradients<Scalar> grads;
    grads.weights.resize(mlp.layers.size());
    grads.bias.resize(mlp.layers.size());

    // dL/dlogits = (softmax - onehot) / batch
    Mat delta = detail::softmax_rows<Scalar>(acts.back());
    for (Eigen::Index i = 0; i < rows; ++i) delta(i, labels(i)) -= Scalar(1);
    delta /= static_cast<Scalar>(rows);

    for (int l = static_cast<int>(mlp.layers.size()) - 1; l >= 0; --l) {
        const auto& layer = mlp.layers[static_cast<std::size_t>(l)];
        grads.weights[static_cast<std::size_t>(l)] =
            (delta.transpose() * acts[static_cast<std::size_t>(l)]).cwiseProduct(layer.mask);
        grads.bias[static_cast<std::size_t>(l)] = delta.colwise().sum().transpose();
        if (l > 0) {
            Mat upstream = delta * layer.weights;
            // ReLU gate on the previous activation
            delta = upstream.cwiseProduct(
                (acts[static_cast<std::size_t>(l)].array() > Scalar(0)).template cast<Scalar>().matrix());
        }
    }
    return grads;
}

template <class Scalar>
void sgd_step(MaskedMlp<Scalar>& mlp, const Gradients<Scalar>& grads, Scalar learning_rate) {
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
        mlp.layers[l].weights -= learning_rate * grads.weights[l];
        mlp.layers[l].bias -= learning_rate * grads.bias[l];
    }
    apply_masks(mlp);
}

// Seeded-shuffle minibatch SGD; the trailing partial batch is trained too.
// Returns the mean per-sample loss observed in each epoch.
template <class Scalar>
std::vector<Scalar> train_epochs(MaskedMlp<Scalar>& mlp, const typename MaskedMlp<Scalar>::Mat& x,
                                 const Eigen::VectorXi& y, const TrainConfig<Scalar>& config) {
    using Mat = typename MaskedMlp<Scalar>::Mat;
    if (x.rows() == 0) throw DataError("training set is empty");
    if (x.rows() != y.size()) throw DataError("training labels do not match the sample count");
    if (config.batch_size < 1) throw ConfigError("network.batch_size must be >= 1");
    if (config.learning_rate < Scalar(0)) throw ConfigError("network.learning_rate must be >= 0");
    detail::check_batch(mlp, x);

    Rng rng(config.shuffle_seed);
    const auto n = x.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    std::vector<Scalar> history;
    history.reserve(static_cast<std::size_t>(config.epochs));
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        Scalar epoch_loss = 0;
        for (Eigen::Index start = 0; start < n; start += config.batch_size) {
            const Eigen::Index size = std::min<Eigen::Index>(config.batch_size, n - start);
            Mat batch(size, x.cols());
            Eigen::VectorXi labels(size);
            for (Eigen::Index i = 0; i < size; ++i) {
                batch.row(i) = x.row(order[static_cast<std::size_t>(start + i)]);
                labels(i) = y(order[static_cast<std::size_t>(start + i)]);
            }
            epoch_loss += loss(mlp, batch, labels) * static_cast<Scalar>(size);
            const auto grads = backward(mlp, batch, labels);
            sgd_step(mlp, grads, config.learning_rate);
        }
        history.push_back(epoch_loss / static_cast<Scalar>(n));
    }
    return history;
}

template <class Scalar>
Eigen::VectorXi predict(const MaskedMlp<Scalar>& mlp, const typename MaskedMlp<Scalar>::Mat& x) {
    const auto probs = forward(mlp, x);
    Eigen::VectorXi out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        Eigen::Index arg;
        probs.row(i).maxCoeff(&arg);
        out(i) = static_cast<int>(arg);
    }
    return out;
}

template <class Scalar>
double accuracy(const MaskedMlp<Scalar>& mlp, const typename MaskedMlp<Scalar>::Mat& x,
                const Eigen::VectorXi& y) {
    if (x.rows() == 0) throw DataError("accuracy needs a non-empty set");
    const auto pred = predict(mlp, x);
    return (pred.array() == y.array()).template cast<double>().sum() / static_cast<double>(y.size());
}

// Active (unmasked) weights plus biases.
template <class Scalar>
long long count_params(const MaskedMlp<Scalar>& mlp) {
    long long total = 0;
    for (const auto& layer : mlp.layers) {
        total += static_cast<long long>(layer.mask.sum()) + layer.bias.size();
    }
    return total;
}

inline long long count_dense_params(const std::vector<int>& sizes) {
    long long total = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        total += static_cast<long long>(sizes[l]) * sizes[l + 1] + sizes[l + 1];
    }
    return total;
}

// Multiply + add per active weight, plus one add per bias.
template <class Scalar>
long long count_flops(const MaskedMlp<Scalar>& mlp) {
    long long total = 0;
    for (const auto& layer : mlp.layers) {
        total += 2 * static_cast<long long>(layer.mask.sum()) + layer.bias.size();
    }
    return total;
}

inline long long count_dense_flops(const std::vector<int>& sizes) {
    long long total = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        total += 2LL * sizes[l] * sizes[l + 1] + sizes[l + 1];
    }
    return total;
}

// Dense-to-active ratio, reported to one decimal place.
inline double compression_ratio(long long dense, long long active) {
    if (active <= 0) throw NumericError("compression ratio with no active parameters");
    return std::round(10.0 * static_cast<double>(dense) / static_cast<double>(active)) / 10.0;
}

}  // namespace mhdeep::nn
