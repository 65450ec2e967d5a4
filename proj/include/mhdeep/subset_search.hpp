#pragma once

#include <string>
#include <vector>

#include "mhdeep/pipeline.hpp"

namespace mhdeep::search {

// All 255 non-empty category subsets in ascending-bitmask order.
std::vector<CategorySet> enumerate_subsets();

struct PartitionOutcome {
    int partition_index = 1;
    eval::InstanceMetrics metrics;
    long long params = 0;
    long long flops = 0;
    double compression_params = 1.0;
    double compression_flops = 1.0;
};

struct SubsetResult {
    CategorySet categories;
    std::vector<PartitionOutcome> partitions;
    double average_accuracy = 0.0;
};

struct SearchOutcome {
    std::vector<SubsetResult> ranked;  // descending average accuracy
    std::vector<std::pair<CategorySet, std::string>> failures;
    std::vector<int> partitions;
};

// Picks the subsets to sweep: the explicit config list, the full 255 when
// full_sweep is set, otherwise a seeded random sample of sample_count.
std::vector<CategorySet> select_subsets(const cfg::RunConfig& config);

// Trains one model per (subset, partition) with a bounded worker pool and
// merges the results in canonical order; per-subset failures are logged and
// excluded from the ranking, never fatal.
SearchOutcome run_search(const std::vector<ParticipantRecording>& cohort,
                         const cfg::RunConfig& config);

std::string results_csv(const SearchOutcome& outcome, std::uint64_t config_hash,
                        std::uint64_t seed);
std::string results_text(const SearchOutcome& outcome, int top_k, std::uint64_t config_hash,
                         std::uint64_t seed);

}  // namespace mhdeep::search
