#include "mhdeep/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>

#include "mhdeep/errors.hpp"
#include "mhdeep/rng.hpp"

namespace mhdeep::dataset {

std::string_view split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

Split PartitionScheme::split_of(const std::string& participant_id) const {
    const auto it = assignment.find(participant_id);
    if (it == assignment.end()) {
        throw DataError("participant " + participant_id + " is not covered by the partition scheme");
    }
    return it->second;
}

int holdout_block(int n_subjects) {
    return std::max(1, static_cast<int>(std::floor(0.2 * n_subjects + 0.5)));
}

PartitionScheme partition(const std::vector<std::pair<std::string, ClassLabel>>& subjects,
                          int partition_index, std::uint64_t seed) {
    if (partition_index < 1 || partition_index > 3) {
        throw ConfigError("partition index must be 1, 2 or 3, got " + std::to_string(partition_index));
    }
    std::map<ClassLabel, std::vector<std::string>> by_class;
    for (const auto& [id, label] : subjects) {
        auto& ids = by_class[label];
        if (std::find(ids.begin(), ids.end(), id) != ids.end()) {
            throw DataError("duplicate participant id " + id);
        }
        ids.push_back(id);
    }

    PartitionScheme scheme;
    scheme.partition_index = partition_index;
    for (auto& [label, ids] : by_class) {
        const int n = static_cast<int>(ids.size());
        const int block = holdout_block(n);
        const int train = n - 2 * block;
        if (train < 1) {
            throw DataError("class " + std::string(class_name(label)) + " has only " +
                            std::to_string(n) + " subjects; need at least 3 for disjoint splits");
        }
        // one fixed shuffle per (seed, class); the partitions are rotations
        std::sort(ids.begin(), ids.end());
        Rng rng(derive_seed(seed, "partition-shuffle", {static_cast<std::uint64_t>(label)}));
        rng.shuffle(ids);

        const int test_start = (partition_index - 1) * block % n;
        const int val_start = partition_index * block % n;
        std::vector<Split> split(static_cast<std::size_t>(n), Split::Train);
        for (int i = 0; i < block; ++i) {
            split[static_cast<std::size_t>((test_start + i) % n)] = Split::Test;
            split[static_cast<std::size_t>((val_start + i) % n)] = Split::Val;
        }
        for (int i = 0; i < n; ++i) scheme.assignment[ids[static_cast<std::size_t>(i)]] = split[static_cast<std::size_t>(i)];
        scheme.counts[label] = {train, block, block};
    }
    return scheme;
}

void write_partition(const PartitionScheme& scheme, const std::filesystem::path& path,
                     std::uint64_t config_hash, std::uint64_t seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write partition file " + path.string());
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(config_hash));
    out << "# mhdeep-partition v1\n";
    out << "# config_hash " << hash << "\n";
    out << "# seed " << seed << "\n";
    out << "# partition " << scheme.partition_index << "\n";
    for (const auto& [id, split] : scheme.assignment) {
        out << id << " " << split_name(split) << "\n";
    }
}

PartitionScheme read_partition(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read partition file " + path.string());
    PartitionScheme scheme;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.front() == '#') {
            const auto pos = line.find("# partition ");
            if (pos == 0) scheme.partition_index = std::stoi(line.substr(12));
            continue;
        }
        const auto space = line.find(' ');
        if (space == std::string::npos) throw DataError(path.string() + ": malformed line '" + line + "'");
        const std::string id = line.substr(0, space);
        const std::string split = line.substr(space + 1);
        if (split == "train") scheme.assignment[id] = Split::Train;
        else if (split == "val") scheme.assignment[id] = Split::Val;
        else if (split == "test") scheme.assignment[id] = Split::Test;
        else throw DataError(path.string() + ": unknown split '" + split + "'");
    }
    return scheme;
}

NormStats normalize_fit(const Eigen::MatrixXd& train) {
    if (train.rows() == 0) throw DataError("normalize_fit needs a non-empty training set");
    NormStats stats;
    const auto n = static_cast<double>(train.rows());
    stats.mean = train.colwise().mean();
    const Eigen::MatrixXd centered = train.rowwise() - stats.mean.transpose();
    stats.stdev = (centered.array().square().colwise().sum() / n).sqrt();
    stats.degenerate.assign(static_cast<std::size_t>(train.cols()), 0);
    for (Eigen::Index j = 0; j < train.cols(); ++j) {
        if (stats.stdev(j) < kStdFloor) {
            stats.stdev(j) = kStdFloor;
            stats.degenerate[static_cast<std::size_t>(j)] = 1;
            ++stats.floored_features;
        }
    }
    if (stats.floored_features > 0) {
        std::cerr << "warning: " << stats.floored_features
                  << " zero-variance feature(s) floored to " << kStdFloor << "\n";
    }
    return stats;
}

void normalize_apply(const NormStats& stats, Eigen::MatrixXd& features) {
    if (features.cols() != stats.dim()) {
        throw DataError("feature dimension " + std::to_string(features.cols()) +
                        " does not match normalization stats (" + std::to_string(stats.dim()) + ")");
    }
    features.rowwise() -= stats.mean.transpose();
    features.array().rowwise() /= stats.stdev.transpose().array();
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        if (stats.degenerate[static_cast<std::size_t>(j)]) features.col(j).setZero();
    }
}

std::vector<std::vector<Eigen::Index>> nearest_neighbors(const Eigen::MatrixXd& points, int k) {
    const Eigen::Index m = points.rows();
    if (k < 1) throw ConfigError("smote.k must be >= 1");
    if (k >= m) {
        throw DataError("smote k (" + std::to_string(k) + ") must be smaller than the minority count (" +
                        std::to_string(m) + ")");
    }
    const Eigen::VectorXd sq_norms = points.rowwise().squaredNorm();
    std::vector<std::vector<Eigen::Index>> knn(static_cast<std::size_t>(m));

    const Eigen::Index block = 256;
    std::vector<std::pair<double, Eigen::Index>> cand;
    for (Eigen::Index r0 = 0; r0 < m; r0 += block) {
        const Eigen::Index rows = std::min(block, m - r0);
        // squared distances via the gram expansion
        Eigen::MatrixXd d2 = (-2.0 * points.middleRows(r0, rows) * points.transpose());
        d2.colwise() += sq_norms.segment(r0, rows);
        d2.rowwise() += sq_norms.transpose();
        for (Eigen::Index r = 0; r < rows; ++r) {
            const Eigen::Index i = r0 + r;
            cand.clear();
            cand.reserve(static_cast<std::size_t>(m - 1));
            for (Eigen::Index j = 0; j < m; ++j) {
                if (j != i) cand.emplace_back(d2(r, j), j);
            }
            std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
            auto& out = knn[static_cast<std::size_t>(i)];
            out.reserve(static_cast<std::size_t>(k));
            for (int t = 0; t < k; ++t) out.push_back(cand[static_cast<std::size_t>(t)].second);
        }
    }
    return knn;
}

Eigen::MatrixXd smote(const Eigen::MatrixXd& minority, Eigen::Index target_count, int k,
                      std::uint64_t seed) {
    const Eigen::Index m = minority.rows();
    if (m < 2) throw DataError("smote needs at least 2 minority instances, got " + std::to_string(m));
    if (target_count < m) {
        throw DataError("smote target count " + std::to_string(target_count) +
                        " is below the current minority count " + std::to_string(m));
    }
    if (target_count == m) return minority;

    const auto knn = nearest_neighbors(minority, k);
    Rng rng(seed);
    Eigen::MatrixXd out(target_count, minority.cols());
    out.topRows(m) = minority;
    for (Eigen::Index s = 0; s < target_count - m; ++s) {
        const Eigen::Index i = s % m;  // cycle through parents
        const auto& nn = knn[static_cast<std::size_t>(i)];
        const Eigen::Index j = nn[rng.uniform_index(nn.size())];
        const double lambda = rng.uniform();
        out.row(m + s) = minority.row(i) + lambda * (minority.row(j) - minority.row(i));
    }
    return out;
}

}  // namespace mhdeep::dataset
