#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mhdeep/errors.hpp"
#include "mhdeep/gmm.hpp"

using namespace mhdeep;

namespace {

// Draws n points from a known two-component generator, independent of the
// fitting code under test.
Eigen::MatrixXd two_blob_sample(int n, std::uint64_t seed, double separation = 5.0) {
    Rng rng(seed);
    Eigen::MatrixXd x(n, 2);
    for (int i = 0; i < n; ++i) {
        const double base = (i % 2 == 0) ? 0.0 : separation;
        x(i, 0) = base + rng.normal();
        x(i, 1) = base + rng.normal();
    }
    return x;
}

Eigen::MatrixXd three_blob_sample(int n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd x(n, 2);
    const double cx[3] = {0.0, 9.0, 0.0};
    const double cy[3] = {0.0, 0.0, 9.0};
    for (int i = 0; i < n; ++i) {
        const int k = i % 3;
        x(i, 0) = cx[k] + rng.normal();
        x(i, 1) = cy[k] + rng.normal();
    }
    return x;
}

void check_history_monotone(const std::vector<double>& history) {
    for (std::size_t i = 1; i < history.size(); ++i) {
        CHECK(history[i] - history[i - 1] >= -1e-9);
    }
}

}  // namespace

TEST_SUITE("gmm") {

TEST_CASE("single component recovers the sample mean") {
    Eigen::MatrixXd x(2, 2);
    x << 0.0, 0.0, 2.0, 2.0;
    const auto model = gmm::fit_gmm<double>(x, 1, 7);
    CHECK(model.weights(0) == doctest::Approx(1.0));
    CHECK(model.means(0, 0) == doctest::Approx(1.0));
    CHECK(model.means(0, 1) == doctest::Approx(1.0));
    CHECK(model.variances(0, 0) == doctest::Approx(1.0));  // population variance
}

TEST_CASE("score of the standard normal at the origin") {
    gmm::Gmm<double> model;
    model.weights = Eigen::VectorXd::Constant(1, 1.0);
    model.means = Eigen::MatrixXd::Zero(1, 1);
    model.variances = Eigen::MatrixXd::Ones(1, 1);
    Eigen::MatrixXd x(1, 1);
    x << 0.0;
    CHECK(gmm::score(model, x) == doctest::Approx(-0.5 * std::log(2.0 * EIGEN_PI)).epsilon(1e-12));
}

TEST_CASE("two-component recovery against the known generator") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        const auto x = two_blob_sample(2000, seed);
        const auto model = gmm::fit_gmm<double>(x, 2, seed * 100 + 1);
        check_history_monotone(model.log_likelihood_history);

        // match components to truth by the cheaper of the two assignments
        const Eigen::Vector2d t0(0.0, 0.0), t1(5.0, 5.0);
        const Eigen::Vector2d m0 = model.means.row(0), m1 = model.means.row(1);
        const double direct = (m0 - t0).norm() + (m1 - t1).norm();
        const double swapped = (m0 - t1).norm() + (m1 - t0).norm();
        if (direct <= swapped) {
            CHECK((m0 - t0).norm() < 0.15);
            CHECK((m1 - t1).norm() < 0.15);
        } else {
            CHECK((m0 - t1).norm() < 0.15);
            CHECK((m1 - t0).norm() < 0.15);
        }
        CHECK(model.weights.sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(model.variances.minCoeff() >= 1e-6);
    }
}

TEST_CASE("log-likelihood history is non-decreasing and ends at the final score") {
    const auto x = two_blob_sample(400, 11);
    const auto model = gmm::fit_gmm<double>(x, 3, 5);
    check_history_monotone(model.log_likelihood_history);
    REQUIRE(!model.log_likelihood_history.empty());
    // final history entry is the training score of the returned parameters
    CHECK(gmm::score(model, x) >= model.log_likelihood_history.back() - 1e-9);
    for (double ll : model.log_likelihood_history) {
        CHECK(gmm::score(model, x) >= ll - 1e-9);
    }
}

TEST_CASE("score decays monotonically as data shifts away") {
    const auto x = two_blob_sample(300, 3);
    const auto model = gmm::fit_gmm<double>(x, 2, 4);
    double prev = gmm::score(model, x);
    for (int shift = 1; shift <= 6; ++shift) {
        const Eigen::MatrixXd moved = x.array() + 2.0 * shift;
        const double s = gmm::score(model, moved);
        CHECK(s < prev);
        prev = s;
    }
}

TEST_CASE("component selection") {
    const auto train = three_blob_sample(900, 21);
    const auto val = three_blob_sample(600, 22);

    SUBCASE("single candidate") {
        const auto choice = gmm::select_components<double>(train, val, {1}, 9);
        CHECK(choice.n_star == 1);
        CHECK(choice.validation_scores.size() == 1);
    }
    SUBCASE("recovers the true component count") {
        const auto choice = gmm::select_components<double>(train, val, {1, 2, 3, 4, 5, 6}, 9);
        CHECK(choice.n_star == 3);
    }
    SUBCASE("candidate order does not matter") {
        const auto a = gmm::select_components<double>(train, val, {1, 2, 3, 4, 5, 6}, 9);
        const auto b = gmm::select_components<double>(train, val, {6, 3, 5, 1, 4, 2}, 9);
        CHECK(a.n_star == b.n_star);
    }
}

TEST_CASE("sampling shape and component occupancy") {
    const auto train = two_blob_sample(1000, 31);
    const auto val = two_blob_sample(400, 32);
    const auto synthetic = gmm::sample_synthetic<double>(train, val, 2, 5000, 77);
    REQUIRE(synthetic.rows() == 5000);
    REQUIRE(synthetic.cols() == 2);

    // attribute samples to the nearer blob; occupancy should match the
    // balanced weights within 3 multinomial sigmas
    int near_origin = 0;
    for (Eigen::Index i = 0; i < synthetic.rows(); ++i) {
        const double d0 = synthetic.row(i).norm();
        const double d1 = (synthetic.row(i) - Eigen::RowVector2d(5.0, 5.0)).norm();
        if (d0 < d1) ++near_origin;
    }
    const double expected = 2500.0;
    const double sigma = std::sqrt(5000.0 * 0.5 * 0.5);
    CHECK(std::abs(near_origin - expected) <= 3.0 * sigma);
}

TEST_CASE("large sample requests come back full size") {
    gmm::Gmm<double> model;
    model.weights = Eigen::Vector2d(0.5, 0.5);
    model.means = Eigen::MatrixXd::Zero(2, 3);
    model.means.row(1).setConstant(4.0);
    model.variances = Eigen::MatrixXd::Ones(2, 3);
    const auto drawn = gmm::sample(model, 100'000, 12);
    CHECK(drawn.rows() == 100'000);
    CHECK(drawn.cols() == 3);
}

TEST_CASE("refit recovers mixture weights within multinomial bounds") {
    gmm::Gmm<double> truth;
    truth.weights = Eigen::Vector2d(0.3, 0.7);
    truth.means = Eigen::MatrixXd(2, 2);
    truth.means << 0.0, 0.0, 8.0, 8.0;
    truth.variances = Eigen::MatrixXd::Ones(2, 2);
    const auto sampled = gmm::sample(truth, 50'000, 5);
    const auto refit = gmm::fit_gmm<double>(sampled, 2, 6);
    std::array<double, 2> w{refit.weights(0), refit.weights(1)};
    std::sort(w.begin(), w.end());
    const double sigma = std::sqrt(0.3 * 0.7 / 50'000.0);
    CHECK(std::abs(w[0] - 0.3) <= 3.0 * sigma);
    CHECK(std::abs(w[1] - 0.7) <= 3.0 * sigma);
}

TEST_CASE("degenerate variance clusters samples at the mean") {
    Eigen::MatrixXd x(50, 2);
    for (int i = 0; i < 50; ++i) x.row(i) << 1.5, -2.5;  // identical rows
    const auto model = gmm::fit_gmm<double>(x, 1, 3);
    CHECK(model.variances(0, 0) == doctest::Approx(1e-6));
    const auto drawn = gmm::sample(model, 200, 9);
    const double radius = 3.0 * std::sqrt(1e-6) * 2.0;  // loose 2D bound
    for (Eigen::Index i = 0; i < drawn.rows(); ++i) {
        CHECK((drawn.row(i) - x.row(0)).norm() < radius);
    }
}

TEST_CASE("error paths") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 2);
    CHECK_THROWS_AS(gmm::fit_gmm<double>(x, 6, 0), DataError);   // more components than samples
    CHECK_THROWS_AS(gmm::fit_gmm<double>(x, 0, 0), ConfigError);
    CHECK_THROWS_AS((gmm::fit_gmm<double>(Eigen::MatrixXd(0, 2), 1, 0)), DataError);
    const auto model = gmm::fit_gmm<double>(x, 2, 0);
    Eigen::MatrixXd wrong = Eigen::MatrixXd::Random(4, 3);
    CHECK_THROWS_AS(gmm::score(model, wrong), DataError);
    CHECK_THROWS_AS(gmm::select_components<double>(x, x, {}, 0), ConfigError);
}

TEST_CASE("fit is deterministic in the seed") {
    const auto x = two_blob_sample(300, 8);
    const auto a = gmm::fit_gmm<double>(x, 2, 42);
    const auto b = gmm::fit_gmm<double>(x, 2, 42);
    CHECK(a.means == b.means);
    CHECK(a.weights == b.weights);
    CHECK(a.variances == b.variances);
}

}  // TEST_SUITE
