#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mhdeep/cohort.hpp"
#include "mhdeep/dataset.hpp"
#include "mhdeep/mlp.hpp"

namespace mhdeep::io {

// Everything needed to run inference later: the masked network, the
// train-split normalization statistics, and the category subset the
// features were built from.
struct TrainedModel {
    nn::MaskedMlp<double> net;
    dataset::NormStats stats;
    CategorySet categories;
    Task task = Task::Mdd;
    int partition_index = 1;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
};

// Versioned text checkpoint; reals are written with 17 significant digits,
// which round-trips IEEE doubles exactly.
void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_checkpoint(const std::filesystem::path& path);

// Instance CSV: provenance comments, then `participant_id,window_index,label,f0,...`.
void write_instances(const InstanceSet& instances, const std::filesystem::path& path,
                     const std::vector<std::string>& provenance);
InstanceSet read_instances(const std::filesystem::path& path);

std::string hash_hex(std::uint64_t hash);

}  // namespace mhdeep::io
