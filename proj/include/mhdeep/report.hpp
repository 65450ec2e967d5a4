#pragma once

#include <string>

#include "mhdeep/config.hpp"
#include "mhdeep/pipeline.hpp"

namespace mhdeep::report {

// Human-readable run report; with_training adds the synthesis provenance
// (GMM components, labeler, best validation accuracy).
std::string run_report(const pipeline::PipelineResult& result, const cfg::RunConfig& config,
                       Task task, const CategorySet& subset, int partition, bool with_training);

// `minutes,instances_per_patient,patient_accuracy` rows with provenance.
std::string curve_csv(const eval::DurationSweep& sweep, const cfg::RunConfig& config);

// One line per grow/prune evaluation.
std::string history_log(const std::vector<growprune::HistoryEntry>& history,
                        const cfg::RunConfig& config);

std::string provenance_line(const cfg::RunConfig& config);

}  // namespace mhdeep::report
