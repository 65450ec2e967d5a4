#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mhdeep/cohort.hpp"

namespace mhdeep::sim {

// Synthetic cohort description. Signals are i.i.d. Gaussian around
// per-subject baselines; the disorder classes get a mean shift expressed in
// noise-std units. This is pipeline test data, not physiology.
struct CohortSpec {
    std::array<int, kNumClasses> class_counts{0, 0, 0, 0};  // indexed by ClassLabel
    double recording_minutes = 90.0;
    // Scalar sigma-units, or one entry per canonical channel (16).
    Eigen::VectorXd class_shift = Eigen::VectorXd::Constant(1, 2.0);
    // Scalar, or one entry per canonical channel; must be > 0.
    Eigen::VectorXd noise_std = Eigen::VectorXd::Constant(1, 1.0);
    // Spread of the per-subject channel offsets, in noise-std units.
    double subject_offset_std = 0.3;
    // Streams start at base + U{0..jitter} ms each, so synchronization matters.
    double start_jitter_ms = 2000.0;
    std::uint64_t seed = 0;

    void validate() const;  // throws ConfigError naming the bad field
};

// Per-channel baseline means in canonical channel order.
Eigen::VectorXd channel_baselines();

// One participant, deterministic in (spec.seed, label, index); cohort
// generation and the parallel CLI path both build on this.
ParticipantRecording generate_participant(const CohortSpec& spec, ClassLabel label, int index);

// Deterministic given CohortSpec::seed; participants draw independent streams.
std::vector<ParticipantRecording> generate_cohort(const CohortSpec& spec);

// Writes one participant directory (manifest + per-sensor CSVs) in the same
// format load_participant reads. Extra manifest keys record provenance.
void write_participant(const ParticipantRecording& rec, const std::filesystem::path& dir,
                       std::uint64_t config_hash, std::uint64_t seed);

void write_cohort(const std::vector<ParticipantRecording>& cohort, const std::filesystem::path& dir,
                  std::uint64_t config_hash, std::uint64_t seed);

}  // namespace mhdeep::sim
