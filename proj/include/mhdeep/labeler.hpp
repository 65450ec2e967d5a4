#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "mhdeep/errors.hpp"

namespace mhdeep {
class Rng;
}

namespace mhdeep::labeler {

enum class SplitCriterion { Gini, Entropy };

std::string_view criterion_name(SplitCriterion c);

struct TreeParams {
    SplitCriterion criterion = SplitCriterion::Gini;
    int max_depth = -1;  // -1 = unlimited
};

// CART-style binary classification tree with exact best-split search.
// Splits scan features in canonical order and thresholds ascending, so the
// fitted tree is deterministic for a given sample matrix.
class DecisionTree {
  public:
    void fit(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const TreeParams& params);

    // Feature subsampling hook used by random forests: `feature_pool` lists
    // the candidate features per split; empty means all features.
    void fit_subsampled(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                        const TreeParams& params, int features_per_split, std::uint64_t seed);

    int predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    Eigen::VectorXi predict(const Eigen::MatrixXd& x) const;

    bool fitted() const { return !nodes_.empty(); }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    Eigen::Index input_dim() const { return input_dim_; }

  private:
    struct Node {
        int feature = -1;        // -1 marks a leaf
        double threshold = 0.0;  // go left when x[feature] < threshold
        int left = -1;
        int right = -1;
        int label = 0;
    };
    std::vector<Node> nodes_;
    Eigen::Index input_dim_ = 0;

    int build(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, std::vector<Eigen::Index>& rows,
              int depth, const TreeParams& params, int features_per_split, Rng* rng);
    friend class RandomForest;
};

struct ForestParams {
    int n_trees = 10;
    TreeParams tree;  // criterion/depth shared by all trees
};

// Bagged trees with sqrt(D) feature subsampling per split; majority vote,
// ties to the disorder class.
class RandomForest {
  public:
    void fit(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const ForestParams& params,
             std::uint64_t seed);
    int predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    Eigen::VectorXi predict(const Eigen::MatrixXd& x) const;
    bool fitted() const { return !trees_.empty(); }
    Eigen::Index input_dim() const { return trees_.empty() ? 0 : trees_.front().input_dim(); }

  private:
    std::vector<DecisionTree> trees_;
};

struct LabelerSpec {
    enum class Kind { DecisionTree, RandomForest };
    Kind kind = Kind::DecisionTree;
    SplitCriterion criterion = SplitCriterion::Gini;
    int max_depth = -1;  // trees only
    int n_trees = 0;     // forests only

    std::string describe() const;
};

// Candidate grid: trees over {gini, entropy} x depths {4, 8, 16, unlimited},
// then forests with 10 and 50 trees.
std::vector<LabelerSpec> default_grid();

struct Labeler {
    LabelerSpec spec;
    std::variant<DecisionTree, RandomForest> model;

    Eigen::VectorXi predict(const Eigen::MatrixXd& x) const;
    Eigen::Index input_dim() const;
};

struct GridEntry {
    LabelerSpec spec;
    double validation_accuracy = 0.0;
};

struct LabelerFit {
    Labeler best;
    double best_accuracy = 0.0;
    std::vector<GridEntry> grid;  // in evaluation order
};

// Trains every candidate on the training rows, scores accuracy on the
// validation rows and returns the winner (ties keep the earlier candidate).
LabelerFit fit_labeler(const Eigen::MatrixXd& x_train, const Eigen::VectorXi& y_train,
                       const Eigen::MatrixXd& x_val, const Eigen::VectorXi& y_val,
                       const std::vector<LabelerSpec>& grid, std::uint64_t seed);

// One binary label per synthetic row; purely a dimension-checked predict.
Eigen::VectorXi label_synthetic(const Labeler& labeler, const Eigen::MatrixXd& x);

}  // namespace mhdeep::labeler
