#include <doctest.h>

#include <algorithm>

#include "mhdeep/labeler.hpp"
#include "mhdeep/rng.hpp"

using namespace mhdeep;
using labeler::LabelerSpec;
using labeler::SplitCriterion;

namespace {

// linearly separable 2-D blobs
void make_blobs(int n, std::uint64_t seed, Eigen::MatrixXd& x, Eigen::VectorXi& y,
                double gap = 4.0) {
    Rng rng(seed);
    x.resize(n, 2);
    y.resize(n);
    for (int i = 0; i < n; ++i) {
        const int label = i % 2;
        x(i, 0) = label * gap + 0.5 * rng.normal();
        x(i, 1) = label * gap + 0.5 * rng.normal();
        y(i) = label;
    }
}

double accuracy(const Eigen::VectorXi& pred, const Eigen::VectorXi& truth) {
    return (pred.array() == truth.array()).cast<double>().sum() / static_cast<double>(truth.size());
}

}  // namespace

TEST_SUITE("labeler") {

TEST_CASE("separable blobs reach perfect validation accuracy at depth 1") {
    Eigen::MatrixXd xt, xv;
    Eigen::VectorXi yt, yv;
    make_blobs(200, 1, xt, yt);
    make_blobs(100, 2, xv, yv);
    for (int depth : {1, 4, -1}) {
        labeler::DecisionTree tree;
        tree.fit(xt, yt, {SplitCriterion::Gini, depth});
        CHECK(accuracy(tree.predict(xv), yv) == doctest::Approx(1.0));
    }
}

TEST_CASE("unlimited depth memorizes distinct training rows") {
    Rng rng(7);
    Eigen::MatrixXd x(64, 3);
    Eigen::VectorXi y(64);
    for (int i = 0; i < 64; ++i) {
        for (int j = 0; j < 3; ++j) x(i, j) = rng.normal();
        y(i) = static_cast<int>(rng.uniform_index(2));  // random labels
    }
    labeler::DecisionTree tree;
    tree.fit(x, y, {SplitCriterion::Entropy, -1});
    CHECK(accuracy(tree.predict(x), y) == doctest::Approx(1.0));

    // depth-limited stump cannot memorize random labels
    labeler::DecisionTree stump;
    stump.fit(x, y, {SplitCriterion::Entropy, 1});
    CHECK(accuracy(stump.predict(x), y) < 1.0);
}

TEST_CASE("gini and entropy agree on an obvious split") {
    Eigen::MatrixXd x(6, 1);
    x << 0.0, 0.1, 0.2, 5.0, 5.1, 5.2;
    Eigen::VectorXi y(6);
    y << 0, 0, 0, 1, 1, 1;
    for (SplitCriterion c : {SplitCriterion::Gini, SplitCriterion::Entropy}) {
        labeler::DecisionTree tree;
        tree.fit(x, y, {c, -1});
        CHECK(tree.node_count() == 3);  // one split, two leaves
        Eigen::MatrixXd probe(2, 1);
        probe << 1.0, 4.0;
        const auto pred = tree.predict(probe);
        CHECK(pred(0) == 0);
        CHECK(pred(1) == 1);
    }
}

TEST_CASE("random forest fits and predicts deterministically") {
    Eigen::MatrixXd xt, xv;
    Eigen::VectorXi yt, yv;
    make_blobs(150, 3, xt, yt);
    make_blobs(60, 4, xv, yv);
    labeler::RandomForest a, b;
    a.fit(xt, yt, {10, {SplitCriterion::Gini, -1}}, 99);
    b.fit(xt, yt, {10, {SplitCriterion::Gini, -1}}, 99);
    CHECK(a.predict(xv) == b.predict(xv));
    CHECK(accuracy(a.predict(xv), yv) > 0.95);
}

TEST_CASE("grid of one returns that model") {
    Eigen::MatrixXd xt, xv;
    Eigen::VectorXi yt, yv;
    make_blobs(80, 5, xt, yt);
    make_blobs(40, 6, xv, yv);
    const std::vector<LabelerSpec> grid{{LabelerSpec::Kind::DecisionTree, SplitCriterion::Entropy, 8, 0}};
    const auto fit = labeler::fit_labeler(xt, yt, xv, yv, grid, 1);
    CHECK(fit.grid.size() == 1);
    CHECK(fit.best.spec.kind == LabelerSpec::Kind::DecisionTree);
    CHECK(fit.best.spec.max_depth == 8);
}

TEST_CASE("chosen model dominates the logged grid") {
    Rng rng(17);
    const int n = 240;
    Eigen::MatrixXd xt(n, 4), xv(n / 2, 4);
    Eigen::VectorXi yt(n), yv(n / 2);
    // noisy, partially separable data keeps the grid from all tying at 1.0
    for (int i = 0; i < n; ++i) {
        const int label = i % 2;
        for (int j = 0; j < 4; ++j) xt(i, j) = label * 1.0 + rng.normal();
        yt(i) = label;
    }
    for (int i = 0; i < n / 2; ++i) {
        const int label = i % 2;
        for (int j = 0; j < 4; ++j) xv(i, j) = label * 1.0 + rng.normal();
        yv(i) = label;
    }
    const auto fit = labeler::fit_labeler(xt, yt, xv, yv, labeler::default_grid(), 5);
    CHECK(fit.grid.size() == 10);  // 8 trees + 2 forests
    for (const auto& entry : fit.grid) {
        CHECK(fit.best_accuracy >= entry.validation_accuracy);
    }
    // and the reported best accuracy is attained by some grid entry
    const bool attained = std::any_of(fit.grid.begin(), fit.grid.end(), [&](const auto& e) {
        return e.validation_accuracy == fit.best_accuracy;
    });
    CHECK(attained);
}

TEST_CASE("label_synthetic contract") {
    Eigen::MatrixXd xt, xv;
    Eigen::VectorXi yt, yv;
    make_blobs(100, 8, xt, yt);
    make_blobs(50, 9, xv, yv);
    const std::vector<LabelerSpec> grid{{LabelerSpec::Kind::DecisionTree, SplitCriterion::Gini, -1, 0}};
    const auto fit = labeler::fit_labeler(xt, yt, xv, yv, grid, 2);

    // the unlimited tree reproduces its own training labels
    const auto relabeled = labeler::label_synthetic(fit.best, xt);
    CHECK(relabeled == yt);

    // labels are binary and identical rows get identical labels
    Eigen::MatrixXd dup(2, 2);
    dup.row(0) << 1.7, 2.9;
    dup.row(1) << 1.7, 2.9;
    const auto pair = labeler::label_synthetic(fit.best, dup);
    CHECK(pair(0) == pair(1));
    CHECK((pair.array() == 0 || pair.array() == 1).all());

    Eigen::MatrixXd wrong(1, 5);
    CHECK_THROWS_AS(labeler::label_synthetic(fit.best, wrong), DataError);
}

TEST_CASE("single-class training set is rejected") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 2);
    Eigen::VectorXi y = Eigen::VectorXi::Zero(10);
    CHECK_THROWS_WITH_AS(labeler::fit_labeler(x, y, x, y, labeler::default_grid(), 0),
                         doctest::Contains("single-class"), DataError);
}

TEST_CASE("spec descriptions") {
    CHECK(LabelerSpec{LabelerSpec::Kind::DecisionTree, SplitCriterion::Gini, -1, 0}.describe() ==
          "decision_tree criterion=gini max_depth=unlimited");
    CHECK(LabelerSpec{LabelerSpec::Kind::RandomForest, SplitCriterion::Gini, -1, 50}.describe() ==
          "random_forest n_trees=50 criterion=gini");
}

}  // TEST_SUITE
