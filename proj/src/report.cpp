#include "mhdeep/report.hpp"

#include <cstdio>

#include "mhdeep/checkpoint.hpp"

namespace mhdeep::report {

std::string provenance_line(const cfg::RunConfig& config) {
    return "config_hash " + io::hash_hex(config.hash()) + " seed " + std::to_string(config.seed);
}

std::string curve_csv(const eval::DurationSweep& sweep, const cfg::RunConfig& config) {
    std::string out;
    out += "# mhdeep-curve v1\n";
    out += "# " + provenance_line(config) + "\n";
    out += "minutes,instances_per_patient,patient_accuracy\n";
    char line[96];
    for (const auto& point : sweep.curve) {
        std::snprintf(line, sizeof(line), "%g,%d,%.6f\n", point.minutes,
                      point.instances_per_patient, point.accuracy);
        out += line;
    }
    return out;
}

std::string history_log(const std::vector<growprune::HistoryEntry>& history,
                        const cfg::RunConfig& config) {
    std::string out;
    out += "# mhdeep-history v1\n";
    out += "# " + provenance_line(config) + "\n";
    out += "iteration learning_rate val_accuracy active_params\n";
    char line[96];
    for (const auto& entry : history) {
        std::snprintf(line, sizeof(line), "%d %.10g %.6f %lld\n", entry.iteration,
                      entry.learning_rate, entry.validation_accuracy, entry.active_params);
        out += line;
    }
    return out;
}

std::string run_report(const pipeline::PipelineResult& result, const cfg::RunConfig& config,
                       Task task, const CategorySet& subset, int partition, bool with_training) {
    std::string out;
    char line[256];
    out += "mhdeep report\n";
    out += provenance_line(config) + "\n";
    out += "task " + std::string(task_name(task)) + "\n";
    out += "partition " + std::to_string(partition) + "\n";
    out += "subset " + subset.to_string() + " (bitmask " + std::to_string(subset.bits()) + ")\n";
    out += "feature_dims " + std::to_string(category_dims(subset)) + "\n\n";

    const auto& m = result.test_metrics;
    out += "instance metrics (test)\n";
    std::snprintf(line, sizeof(line), "  instances %lld\n  accuracy %.6f\n", m.counts.total(),
                  m.accuracy);
    out += line;
    out += "  fpr " + eval::format_ratio(m.fpr) + "\n";
    out += "  fnr " + eval::format_ratio(m.fnr) + "\n";
    out += "  f1 " + eval::format_ratio(m.f1) + "\n";
    std::snprintf(line, sizeof(line), "  confusion tp %lld fp %lld tn %lld fn %lld\n", m.counts.tp,
                  m.counts.fp, m.counts.tn, m.counts.fn);
    out += line;

    out += "\nmodel cost\n";
    std::snprintf(line, sizeof(line), "  params %lld of %lld dense (%.1fx)\n", result.params,
                  result.dense_params, result.compression_params);
    out += line;
    std::snprintf(line, sizeof(line), "  flops %lld of %lld dense (%.1fx)\n", result.flops,
                  result.dense_flops, result.compression_flops);
    out += line;

    if (with_training) {
        out += "\ntraining\n";
        std::snprintf(line, sizeof(line), "  best_validation_accuracy %.6f\n",
                      result.best_validation_accuracy);
        out += line;
        out += "  gmm_components " + std::to_string(result.synth.n_star) + "\n";
        std::snprintf(line, sizeof(line), "  synthetic_samples %lld\n",
                      static_cast<long long>(result.synth.synthetic_count));
        out += line;
        std::snprintf(line, sizeof(line), "  labeler %s (val accuracy %.6f)\n",
                      result.synth.labeler_description.c_str(), result.synth.labeler_accuracy);
        out += line;
    }

    out += "\npatient votes (full span)\n";
    for (const auto& vote : result.votes) {
        std::snprintf(line, sizeof(line), "  %s label %d vote %d%s\n", vote.participant_id.c_str(),
                      vote.label, vote.vote, vote.label == vote.vote ? "" : "  [miss]");
        out += line;
    }
    std::snprintf(line, sizeof(line),
                  "\nduration sweep\n  saturation_minutes %g\n  final_patient_accuracy %.6f\n",
                  result.sweep.saturation_minutes, result.sweep.final_accuracy);
    out += line;
    out += "  curve in duration_curve.csv\n";
    return out;
}

}  // namespace mhdeep::report
