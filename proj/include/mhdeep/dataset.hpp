#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mhdeep/cohort.hpp"

namespace mhdeep::dataset {

enum class Split : int { Train = 0, Val = 1, Test = 2 };

std::string_view split_name(Split s);

// Subject-disjoint assignment. Subjects of each class are shuffled once by
// the seed; the three partitions rotate the val/test blocks over that fixed
// order and train takes the remainder.
struct PartitionScheme {
    int partition_index = 1;
    std::map<std::string, Split> assignment;
    std::map<ClassLabel, std::array<int, 3>> counts;  // train/val/test per class

    Split split_of(const std::string& participant_id) const;
};

// Block size used for val and test: round(0.2 * n), at least 1. On the
// reference cohort sizes (25/23/10/16) this yields 15/5/5, 13/5/5, 6/2/2
// and 10/3/3.
int holdout_block(int n_subjects);

PartitionScheme partition(const std::vector<std::pair<std::string, ClassLabel>>& subjects,
                          int partition_index, std::uint64_t seed);

void write_partition(const PartitionScheme& scheme, const std::filesystem::path& path,
                     std::uint64_t config_hash, std::uint64_t seed);
PartitionScheme read_partition(const std::filesystem::path& path);

// Per-feature z-score statistics fitted on training data only.
struct NormStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd stdev;             // floored at kStdFloor
    std::vector<std::uint8_t> degenerate;  // 1 where the raw std was below the floor
    int floored_features = 0;

    Eigen::Index dim() const { return mean.size(); }
};

inline constexpr double kStdFloor = 1e-8;

NormStats normalize_fit(const Eigen::MatrixXd& train);

// Z-scores every row in place; degenerate features map to exactly 0.
void normalize_apply(const NormStats& stats, Eigen::MatrixXd& features);

// Classic minority oversampling: returns the input rows followed by
// (target_count - rows) synthetic points, each drawn on the segment between
// a minority point and one of its k nearest minority neighbours.
Eigen::MatrixXd smote(const Eigen::MatrixXd& minority, Eigen::Index target_count, int k,
                      std::uint64_t seed);

// Exact k-nearest-neighbour indices among the rows themselves (self excluded),
// ties broken by row index.
std::vector<std::vector<Eigen::Index>> nearest_neighbors(const Eigen::MatrixXd& points, int k);

}  // namespace mhdeep::dataset
