#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mhdeep/cohort.hpp"
#include "mhdeep/growprune.hpp"
#include "mhdeep/simulate.hpp"

namespace mhdeep::cfg {

struct DatasetConfig {
    int smote_k = 5;
};

struct GmmConfig {
    std::vector<int> candidates{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    int max_iter = 200;
    double tol = 1e-4;
    double variance_floor = 1e-6;
    long long synthetic_samples = 10'000;
};

struct LabelerConfig {
    std::vector<int> tree_depths{4, 8, 16, -1};  // -1 = unlimited
    std::vector<int> forest_trees{10, 50};
};

struct NetworkConfig {
    std::vector<int> hidden_mdd{256, 128, 128};
    std::vector<int> hidden_schizo{256, 128, 128};
    std::vector<int> hidden_bipolar{256, 128, 64, 32};
};

struct EvaluateConfig {
    double sweep_step_minutes = 2.0;
};

struct SearchConfig {
    std::vector<std::string> subsets;  // explicit list; empty = sampled or full
    int sample_count = 8;              // seeded random subsets when not full
    bool full_sweep = false;
    std::vector<int> partitions{1, 2, 3};
    int top_k = 3;
};

// Resolved run configuration. Every artifact embeds hash() of the canonical
// dump plus the seed, so outputs are traceable to the exact settings.
struct RunConfig {
    std::uint64_t seed = 0;
    bool seed_provided = false;
    Task task = Task::Mdd;
    std::string cohort_dir;
    std::string out_dir = "out";
    int partition_index = 1;
    CategorySet subset = CategorySet::all();
    int workers = 1;

    sim::CohortSpec simulate;
    DatasetConfig dataset;
    GmmConfig gmm;
    LabelerConfig labeler;
    NetworkConfig network;
    growprune::GrowPruneConfig growprune;
    EvaluateConfig evaluate;
    SearchConfig search;

    std::vector<int> architecture(Task t, int input_dim) const;
    void validate() const;           // throws ConfigError naming the field
    std::string canonical_dump() const;
    std::uint64_t hash() const;

    // seed is mandatory for anything stochastic; no wall-clock fallback
    void require_seed() const;
};

RunConfig parse_config_json(const std::string& text, const std::string& display_name);
RunConfig load_config(const std::filesystem::path& path);

// Pretty JSON with the hash, the environment paths and the resolved
// computation settings; written next to every command's artifacts.
std::string resolved_config_text(const RunConfig& config);

}  // namespace mhdeep::cfg
