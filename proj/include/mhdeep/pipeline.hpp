#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mhdeep/checkpoint.hpp"
#include "mhdeep/config.hpp"
#include "mhdeep/dataset.hpp"
#include "mhdeep/evaluate.hpp"
#include "mhdeep/growprune.hpp"
#include "mhdeep/labeler.hpp"

namespace mhdeep::pipeline {

// Per-task splits after windowing, normalization and train-only SMOTE.
struct TaskData {
    InstanceSet train;
    InstanceSet val;
    InstanceSet test;
    dataset::NormStats stats;
    int dims = 0;
    Eigen::Index smote_added = 0;
};

// Provenance of the synthetic-data stage.
struct SynthInfo {
    int n_star = 1;
    std::vector<std::pair<int, double>> gmm_scores;
    std::string labeler_description;
    double labeler_accuracy = 0.0;
    std::vector<labeler::GridEntry> labeler_grid;
    Eigen::Index synthetic_count = 0;
};

struct PipelineResult {
    io::TrainedModel model;
    eval::InstanceMetrics test_metrics;
    std::vector<eval::PatientVoteResult> votes;
    eval::DurationSweep sweep;
    std::vector<growprune::HistoryEntry> history;
    double best_validation_accuracy = 0.0;
    SynthInfo synth;
    long long params = 0;
    long long flops = 0;
    long long dense_params = 0;
    long long dense_flops = 0;
    double compression_params = 1.0;
    double compression_flops = 1.0;
};

// Seed every run stage derives from; a function of (seed, subset, partition)
// so a search job and a direct run agree bit for bit.
std::uint64_t run_seed(std::uint64_t global_seed, const CategorySet& subset, int partition_index);

TaskData build_task_data(const std::vector<ParticipantRecording>& cohort, Task task,
                         const CategorySet& subset, const dataset::PartitionScheme& scheme,
                         int smote_k, std::uint64_t seed);

std::vector<std::pair<std::string, ClassLabel>> cohort_subjects(
    const std::vector<ParticipantRecording>& cohort);

// The full training pipeline for one (task, subset, partition) cell:
// window -> partition -> normalize -> SMOTE -> GMM synthesis -> labeler ->
// pre-train -> grow-and-prune -> evaluate on the held-out test subjects.
PipelineResult run_pipeline(const std::vector<ParticipantRecording>& cohort,
                            const cfg::RunConfig& config, Task task, const CategorySet& subset,
                            int partition_index);

// Chronological per-patient prediction series for the test split.
std::vector<eval::PatientSeries> patient_series(const InstanceSet& test,
                                                const Eigen::VectorXi& predictions);

std::vector<labeler::LabelerSpec> labeler_grid_from_config(const cfg::LabelerConfig& config);

}  // namespace mhdeep::pipeline
