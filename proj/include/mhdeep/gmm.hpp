#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mhdeep/errors.hpp"
#include "mhdeep/rng.hpp"

namespace mhdeep::gmm {

// Diagonal-covariance Gaussian mixture. Rows of `means`/`variances` are
// components, columns are features.
template <class Scalar = double>
struct Gmm {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Vec weights;
    Mat means;
    Mat variances;
    // Mean per-sample training log-likelihood after each EM iteration,
    // starting with the value under the initial parameters.
    std::vector<Scalar> log_likelihood_history;

    int components() const { return static_cast<int>(weights.size()); }
    Eigen::Index dim() const { return means.cols(); }
};

template <class Scalar = double>
struct FitOptions {
    int max_iter = 200;
    Scalar tol = Scalar(1e-4);        // stop when the mean LL improves by less
    Scalar variance_floor = Scalar(1e-6);
    int restarts = 3;                 // independent seeded inits, best final LL wins
};

namespace detail {

// Per-sample, per-component joint log densities log(w_k) + log N(x | mu_k, v_k).
template <class Scalar>
typename Gmm<Scalar>::Mat component_log_joint(const Gmm<Scalar>& model,
                                              const typename Gmm<Scalar>::Mat& x) {
    using Mat = typename Gmm<Scalar>::Mat;
    using Vec = typename Gmm<Scalar>::Vec;
    if (x.cols() != model.dim()) {
        throw DataError("gmm dimension mismatch: model has " + std::to_string(model.dim()) +
                        " features, data has " + std::to_string(x.cols()));
    }
    const Scalar log2pi = std::log(Scalar(2) * Scalar(EIGEN_PI));
    const Mat inv_var = model.variances.cwiseInverse();             // N x D
    const Mat mean_over_var = model.means.cwiseProduct(inv_var);    // N x D
    // constant per component: log w - 0.5 * sum(log(2 pi v)) - 0.5 * sum(mu^2 / v)
    Vec comp_const =
        model.weights.array().log().matrix() -
        Scalar(0.5) * (model.variances.array().log() + log2pi).matrix().rowwise().sum() -
        Scalar(0.5) * model.means.cwiseProduct(mean_over_var).rowwise().sum();
    // quadratic term: -0.5 x^2 / v + x mu / v
    Mat log_joint = x * mean_over_var.transpose() -
                    Scalar(0.5) * (x.cwiseProduct(x) * inv_var.transpose());
    log_joint.rowwise() += comp_const.transpose();
    return log_joint;
}

template <class Scalar>
typename Gmm<Scalar>::Vec logsumexp_rows(const typename Gmm<Scalar>::Mat& m) {
    using Vec = typename Gmm<Scalar>::Vec;
    const Vec row_max = m.rowwise().maxCoeff();
    return (row_max.array() +
            (m.colwise() - row_max).array().exp().rowwise().sum().log()).matrix();
}

}  // namespace detail

// Mean per-sample log-likelihood of `x` under the mixture.
template <class Scalar>
Scalar score(const Gmm<Scalar>& model, const typename Gmm<Scalar>::Mat& x) {
    if (x.rows() == 0) throw DataError("gmm score needs at least one sample");
    return detail::logsumexp_rows<Scalar>(detail::component_log_joint(model, x)).mean();
}

namespace detail {

// One EM run from a single random initialization.
template <class Scalar>
Gmm<Scalar> fit_gmm_single(const typename Gmm<Scalar>::Mat& x, int n_components,
                           std::uint64_t seed, const FitOptions<Scalar>& opts) {
    using Mat = typename Gmm<Scalar>::Mat;
    using Vec = typename Gmm<Scalar>::Vec;
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();

    Rng rng(seed);
    Gmm<Scalar> model;
    model.weights = Vec::Constant(n_components, Scalar(1) / Scalar(n_components));
    model.means.resize(n_components, d);

    // distinct random rows for the initial means
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(order);
    for (int k = 0; k < n_components; ++k) model.means.row(k) = x.row(order[static_cast<std::size_t>(k)]);

    const Vec col_mean = x.colwise().mean();
    Vec data_var = ((x.rowwise() - col_mean.transpose()).array().square().colwise().sum() /
                    Scalar(n)).matrix().transpose();
    data_var = data_var.cwiseMax(opts.variance_floor);
    model.variances = data_var.transpose().replicate(n_components, 1);

    Scalar prev_ll = -std::numeric_limits<Scalar>::infinity();
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        // E step
        Mat log_joint = detail::component_log_joint(model, x);
        const Vec row_lse = detail::logsumexp_rows<Scalar>(log_joint);
        const Scalar ll = row_lse.mean();
        model.log_likelihood_history.push_back(ll);
        if (ll - prev_ll < opts.tol && iter > 0) break;
        prev_ll = ll;

        Mat resp = (log_joint.colwise() - row_lse).array().exp().matrix();

        // M step
        Vec occupancy = resp.colwise().sum().transpose();  // N
        bool reseeded = false;
        for (int k = 0; k < n_components; ++k) {
            if (!(occupancy(k) > Scalar(n) * Scalar(1e-12)) || !std::isfinite(occupancy(k))) {
                // re-seed a starved component from a random data point
                model.means.row(k) = x.row(static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::size_t>(n))));
                model.variances.row(k) = data_var.transpose();
                model.weights(k) = Scalar(1) / Scalar(n);
                reseeded = true;
            }
        }
        if (reseeded) {
            model.weights /= model.weights.sum();
            prev_ll = -std::numeric_limits<Scalar>::infinity();
            continue;
        }

        model.weights = occupancy / Scalar(n);
        const Mat weighted_sum = resp.transpose() * x;                 // N x D
        model.means = (weighted_sum.array().colwise() / occupancy.array()).matrix();
        const Mat weighted_sq = resp.transpose() * x.cwiseProduct(x);  // N x D
        model.variances = ((weighted_sq.array().colwise() / occupancy.array()) -
                           model.means.array().square())
                              .matrix();
        model.variances = model.variances.cwiseMax(opts.variance_floor);
    }
    return model;
}

}  // namespace detail

// Expectation-maximization with means initialized from distinct random data
// rows; opts.restarts independent runs, the one with the best final training
// log-likelihood wins. Empty components are re-seeded from a random data
// point instead of aborting the fit.
template <class Scalar>
Gmm<Scalar> fit_gmm(const typename Gmm<Scalar>::Mat& x, int n_components, std::uint64_t seed,
                    const FitOptions<Scalar>& opts = {}) {
    const Eigen::Index n = x.rows();
    if (n == 0) throw DataError("gmm fit needs a non-empty sample matrix");
    if (n_components < 1) throw ConfigError("gmm component count must be >= 1");
    if (n_components > n) {
        throw DataError("gmm component count " + std::to_string(n_components) +
                        " exceeds the number of samples " + std::to_string(n));
    }
    if (opts.restarts < 1) throw ConfigError("gmm.restarts must be >= 1");

    Gmm<Scalar> best;
    for (int r = 0; r < opts.restarts; ++r) {
        auto candidate = detail::fit_gmm_single<Scalar>(
            x, n_components, derive_seed(seed, "gmm-restart", {static_cast<std::uint64_t>(r)}),
            opts);
        if (r == 0 ||
            candidate.log_likelihood_history.back() > best.log_likelihood_history.back()) {
            best = std::move(candidate);
        }
    }
    return best;
}

template <class Scalar>
struct ComponentChoice {
    int n_star = 1;
    std::vector<std::pair<int, Scalar>> validation_scores;  // one entry per candidate
};

// Fits one mixture per candidate on the training rows and keeps the count
// with the best validation score; ties go to the smaller count. Candidate
// fits are seeded by (seed, candidate), so the list order does not matter.
template <class Scalar>
ComponentChoice<Scalar> select_components(const typename Gmm<Scalar>::Mat& x_train,
                                          const typename Gmm<Scalar>::Mat& x_val,
                                          const std::vector<int>& candidates, std::uint64_t seed,
                                          const FitOptions<Scalar>& opts = {}) {
    if (candidates.empty()) throw ConfigError("gmm.candidates must be non-empty");
    ComponentChoice<Scalar> choice;
    bool have_best = false;
    Scalar best_score{};
    for (int n : candidates) {
        const auto model = fit_gmm<Scalar>(x_train, n, derive_seed(seed, "gmm-candidate", {static_cast<std::uint64_t>(n)}), opts);
        const Scalar s = score(model, x_val);
        choice.validation_scores.emplace_back(n, s);
        if (!have_best || s > best_score || (s == best_score && n < choice.n_star)) {
            have_best = true;
            best_score = s;
            choice.n_star = n;
        }
    }
    return choice;
}

// Draws rows from the mixture: component by weight, then independent
// per-feature Gaussians.
template <class Scalar>
typename Gmm<Scalar>::Mat sample(const Gmm<Scalar>& model, Eigen::Index n_samples,
                                 std::uint64_t seed) {
    using Mat = typename Gmm<Scalar>::Mat;
    if (n_samples < 1) throw ConfigError("sample count must be >= 1");
    Rng rng(seed);
    const int n_comp = model.components();
    std::vector<Scalar> cumulative(static_cast<std::size_t>(n_comp));
    Scalar acc = 0;
    for (int k = 0; k < n_comp; ++k) {
        acc += model.weights(k);
        cumulative[static_cast<std::size_t>(k)] = acc;
    }
    const typename Gmm<Scalar>::Mat stddev = model.variances.cwiseSqrt();
    Mat out(n_samples, model.dim());
    for (Eigen::Index i = 0; i < n_samples; ++i) {
        const Scalar u = static_cast<Scalar>(rng.uniform()) * acc;
        int k = 0;
        while (k + 1 < n_comp && u > cumulative[static_cast<std::size_t>(k)]) ++k;
        for (Eigen::Index j = 0; j < model.dim(); ++j) {
            out(i, j) = model.means(k, j) + stddev(k, j) * static_cast<Scalar>(rng.normal());
        }
    }
    return out;
}

// Refits the chosen mixture size on train + validation and samples from it.
template <class Scalar>
typename Gmm<Scalar>::Mat sample_synthetic(const typename Gmm<Scalar>::Mat& x_train,
                                           const typename Gmm<Scalar>::Mat& x_val, int n_star,
                                           Eigen::Index n_samples, std::uint64_t seed,
                                           const FitOptions<Scalar>& opts = {}) {
    using Mat = typename Gmm<Scalar>::Mat;
    if (x_train.cols() != x_val.cols()) throw DataError("train/validation dimension mismatch");
    Mat total(x_train.rows() + x_val.rows(), x_train.cols());
    total.topRows(x_train.rows()) = x_train;
    total.bottomRows(x_val.rows()) = x_val;
    const auto model = fit_gmm<Scalar>(total, n_star, derive_seed(seed, "gmm-refit"), opts);
    return sample(model, n_samples, derive_seed(seed, "gmm-sample"));
}

}  // namespace mhdeep::gmm
