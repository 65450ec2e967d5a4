#include "mhdeep/labeler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mhdeep/rng.hpp"

namespace mhdeep::labeler {

namespace {

double impurity(double c0, double c1, SplitCriterion criterion) {
    const double n = c0 + c1;
    if (n <= 0.0) return 0.0;
    const double p0 = c0 / n;
    const double p1 = c1 / n;
    if (criterion == SplitCriterion::Gini) return 1.0 - p0 * p0 - p1 * p1;
    double h = 0.0;
    if (p0 > 0.0) h -= p0 * std::log2(p0);
    if (p1 > 0.0) h -= p1 * std::log2(p1);
    return h;
}

int majority_label(Eigen::Index c0, Eigen::Index c1) {
    return c1 >= c0 ? 1 : 0;  // ties go to the disorder class
}

}  // namespace

std::string_view criterion_name(SplitCriterion c) {
    return c == SplitCriterion::Gini ? "gini" : "entropy";
}

int DecisionTree::build(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                        std::vector<Eigen::Index>& rows, int depth, const TreeParams& params,
                        int features_per_split, Rng* rng) {
    Eigen::Index c0 = 0, c1 = 0;
    for (Eigen::Index r : rows) (y(r) == 0 ? c0 : c1)++;

    const auto make_leaf = [&] {
        Node leaf;
        leaf.label = majority_label(c0, c1);
        nodes_.push_back(leaf);
        return static_cast<int>(nodes_.size()) - 1;
    };

    if (c0 == 0 || c1 == 0 || rows.size() < 2 ||
        (params.max_depth >= 0 && depth >= params.max_depth)) {
        return make_leaf();
    }

    // candidate features, optionally subsampled without replacement
    std::vector<int> features;
    const int dims = static_cast<int>(x.cols());
    if (features_per_split > 0 && features_per_split < dims && rng != nullptr) {
        std::vector<int> pool(static_cast<std::size_t>(dims));
        std::iota(pool.begin(), pool.end(), 0);
        for (int i = 0; i < features_per_split; ++i) {
            const auto j = i + static_cast<int>(rng->uniform_index(static_cast<std::size_t>(dims - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        }
        features.assign(pool.begin(), pool.begin() + features_per_split);
        std::sort(features.begin(), features.end());
    } else {
        features.resize(static_cast<std::size_t>(dims));
        std::iota(features.begin(), features.end(), 0);
    }

    const double parent = impurity(static_cast<double>(c0), static_cast<double>(c1), params.criterion);
    const auto n = static_cast<double>(rows.size());

    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::pair<double, int>> column(rows.size());
    for (int f : features) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            column[i] = {x(rows[i], f), y(rows[i])};
        }
        std::sort(column.begin(), column.end());
        double l0 = 0.0, l1 = 0.0;
        for (std::size_t i = 0; i + 1 < column.size(); ++i) {
            (column[i].second == 0 ? l0 : l1) += 1.0;
            const double v = column[i].first;
            const double next = column[i + 1].first;
            if (!(v < next)) continue;
            double mid = v + (next - v) * 0.5;
            if (!(mid > v)) continue;  // adjacent doubles
            const double r0 = static_cast<double>(c0) - l0;
            const double r1 = static_cast<double>(c1) - l1;
            const double child =
                ((l0 + l1) * impurity(l0, l1, params.criterion) +
                 (r0 + r1) * impurity(r0, r1, params.criterion)) / n;
            const double gain = parent - child;
            if (gain > best_gain) {
                best_gain = gain;
                best_feature = f;
                best_threshold = mid;
            }
        }
    }

    if (best_feature < 0) return make_leaf();

    std::vector<Eigen::Index> left, right;
    left.reserve(rows.size());
    right.reserve(rows.size());
    for (Eigen::Index r : rows) {
        (x(r, best_feature) < best_threshold ? left : right).push_back(r);
    }
    if (left.empty() || right.empty()) return make_leaf();
    rows.clear();
    rows.shrink_to_fit();

    const auto index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[static_cast<std::size_t>(index)].feature = best_feature;
    nodes_[static_cast<std::size_t>(index)].threshold = best_threshold;
    const int left_id = build(x, y, left, depth + 1, params, features_per_split, rng);
    const int right_id = build(x, y, right, depth + 1, params, features_per_split, rng);
    nodes_[static_cast<std::size_t>(index)].left = left_id;
    nodes_[static_cast<std::size_t>(index)].right = right_id;
    return index;
}

void DecisionTree::fit(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                       const TreeParams& params) {
    fit_subsampled(x, y, params, 0, 0);
}

void DecisionTree::fit_subsampled(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                                  const TreeParams& params, int features_per_split,
                                  std::uint64_t seed) {
    if (x.rows() == 0 || x.rows() != y.size()) {
        throw DataError("decision tree needs matching non-empty samples and labels");
    }
    nodes_.clear();
    input_dim_ = x.cols();
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(x.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    if (features_per_split > 0) {
        Rng rng(seed);
        build(x, y, rows, 0, params, features_per_split, &rng);
    } else {
        build(x, y, rows, 0, params, 0, nullptr);
    }
}

int DecisionTree::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    if (nodes_.empty()) throw DataError("decision tree used before fitting");
    int i = 0;
    while (nodes_[static_cast<std::size_t>(i)].feature >= 0) {
        const auto& node = nodes_[static_cast<std::size_t>(i)];
        i = row(node.feature) < node.threshold ? node.left : node.right;
    }
    return nodes_[static_cast<std::size_t>(i)].label;
}

Eigen::VectorXi DecisionTree::predict(const Eigen::MatrixXd& x) const {
    if (x.cols() != input_dim_) {
        throw DataError("decision tree input dimension mismatch: expected " +
                        std::to_string(input_dim_) + ", got " + std::to_string(x.cols()));
    }
    Eigen::VectorXi out(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) out(r) = predict_row(x.row(r));
    return out;
}

void RandomForest::fit(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                       const ForestParams& params, std::uint64_t seed) {
    if (params.n_trees < 1) throw ConfigError("random forest needs n_trees >= 1");
    if (x.rows() == 0 || x.rows() != y.size()) {
        throw DataError("random forest needs matching non-empty samples and labels");
    }
    trees_.assign(static_cast<std::size_t>(params.n_trees), DecisionTree{});
    const auto n = static_cast<std::size_t>(x.rows());
    const int features_per_split =
        std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(x.cols())))));
    for (int t = 0; t < params.n_trees; ++t) {
        Rng boot(derive_seed(seed, "forest-bootstrap", {static_cast<std::uint64_t>(t)}));
        std::vector<Eigen::Index> rows(n);
        for (auto& r : rows) r = static_cast<Eigen::Index>(boot.uniform_index(n));
        auto& tree = trees_[static_cast<std::size_t>(t)];
        tree.nodes_.clear();
        tree.input_dim_ = x.cols();
        Rng splits(derive_seed(seed, "forest-splits", {static_cast<std::uint64_t>(t)}));
        tree.build(x, y, rows, 0, params.tree, features_per_split, &splits);
    }
}

int RandomForest::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    if (trees_.empty()) throw DataError("random forest used before fitting");
    int votes = 0;
    for (const auto& tree : trees_) votes += tree.predict_row(row);
    return 2 * votes >= static_cast<int>(trees_.size()) ? 1 : 0;
}

Eigen::VectorXi RandomForest::predict(const Eigen::MatrixXd& x) const {
    if (x.cols() != input_dim()) {
        throw DataError("random forest input dimension mismatch: expected " +
                        std::to_string(input_dim()) + ", got " + std::to_string(x.cols()));
    }
    Eigen::VectorXi out(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) out(r) = predict_row(x.row(r));
    return out;
}

std::string LabelerSpec::describe() const {
    if (kind == Kind::DecisionTree) {
        return "decision_tree criterion=" + std::string(criterion_name(criterion)) +
               " max_depth=" + (max_depth < 0 ? std::string("unlimited") : std::to_string(max_depth));
    }
    return "random_forest n_trees=" + std::to_string(n_trees) +
           " criterion=" + std::string(criterion_name(criterion));
}

std::vector<LabelerSpec> default_grid() {
    std::vector<LabelerSpec> grid;
    for (SplitCriterion c : {SplitCriterion::Gini, SplitCriterion::Entropy}) {
        for (int depth : {4, 8, 16, -1}) {
            grid.push_back({LabelerSpec::Kind::DecisionTree, c, depth, 0});
        }
    }
    for (int n_trees : {10, 50}) {
        grid.push_back({LabelerSpec::Kind::RandomForest, SplitCriterion::Gini, -1, n_trees});
    }
    return grid;
}

Eigen::VectorXi Labeler::predict(const Eigen::MatrixXd& x) const {
    return std::visit([&](const auto& m) { return m.predict(x); }, model);
}

Eigen::Index Labeler::input_dim() const {
    return std::visit([](const auto& m) { return m.input_dim(); }, model);
}

LabelerFit fit_labeler(const Eigen::MatrixXd& x_train, const Eigen::VectorXi& y_train,
                       const Eigen::MatrixXd& x_val, const Eigen::VectorXi& y_val,
                       const std::vector<LabelerSpec>& grid, std::uint64_t seed) {
    if (grid.empty()) throw ConfigError("labeler grid must be non-empty");
    if (x_train.rows() == 0 || x_val.rows() == 0) {
        throw DataError("labeler needs non-empty train and validation sets");
    }
    const int first = y_train(0);
    bool single_class = true;
    for (Eigen::Index i = 1; i < y_train.size(); ++i) {
        if (y_train(i) != first) {
            single_class = false;
            break;
        }
    }
    if (single_class) {
        throw DataError("degenerate single-class training set; cannot fit a labeler");
    }

    LabelerFit result;
    bool have_best = false;
    int index = 0;
    for (const auto& spec : grid) {
        Labeler candidate;
        candidate.spec = spec;
        if (spec.kind == LabelerSpec::Kind::DecisionTree) {
            DecisionTree tree;
            tree.fit(x_train, y_train, {spec.criterion, spec.max_depth});
            candidate.model = std::move(tree);
        } else {
            RandomForest forest;
            forest.fit(x_train, y_train, {spec.n_trees, {spec.criterion, spec.max_depth}},
                       derive_seed(seed, "labeler-forest", {static_cast<std::uint64_t>(index)}));
            candidate.model = std::move(forest);
        }
        const Eigen::VectorXi pred = candidate.predict(x_val);
        const double accuracy =
            (pred.array() == y_val.array()).cast<double>().sum() / static_cast<double>(y_val.size());
        result.grid.push_back({spec, accuracy});
        if (!have_best || accuracy > result.best_accuracy) {
            have_best = true;
            result.best = std::move(candidate);
            result.best_accuracy = accuracy;
        }
        ++index;
    }
    return result;
}

Eigen::VectorXi label_synthetic(const Labeler& labeler, const Eigen::MatrixXd& x) {
    if (x.cols() != labeler.input_dim()) {
        throw DataError("synthetic data dimension " + std::to_string(x.cols()) +
                        " does not match the labeler (" + std::to_string(labeler.input_dim()) + ")");
    }
    return labeler.predict(x);
}

}  // namespace mhdeep::labeler
