#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mhdeep::eval {

struct ConfusionCounts {
    long long tp = 0;  // disorder predicted disorder
    long long fp = 0;  // healthy predicted disorder
    long long tn = 0;
    long long fn = 0;

    long long total() const { return tp + fp + tn + fn; }
};

// Ratios with an empty denominator are reported as absent, never as 0.
struct InstanceMetrics {
    ConfusionCounts counts;
    double accuracy = 0.0;
    std::optional<double> fpr;
    std::optional<double> fnr;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};

// Positive class is the disorder (label 1).
InstanceMetrics instance_metrics(const Eigen::VectorXi& predictions, const Eigen::VectorXi& labels);

// Majority over the first floor(duration * 60 / 15) chronological instance
// predictions, capped at what the patient has; ties go to the disorder class.
int patient_vote(std::span<const int> predictions, double duration_minutes);

// Chronological per-patient predictions plus the true label.
struct PatientSeries {
    std::string participant_id;
    int label = 0;
    std::vector<int> predictions;
};

struct DurationPoint {
    double minutes = 0.0;
    int instances_per_patient = 0;  // vote window size at this duration
    double accuracy = 0.0;          // patient-level
};

struct DurationSweep {
    std::vector<DurationPoint> curve;
    // Smallest sweep duration from which the accuracy never changes again.
    double saturation_minutes = 0.0;
    double final_accuracy = 0.0;
};

// Evaluates patient-level accuracy at durations step, 2*step, ... up to the
// shortest patient span.
DurationSweep duration_sweep(const std::vector<PatientSeries>& patients, double step_minutes = 2.0);

struct PatientVoteResult {
    std::string participant_id;
    int label = 0;
    int vote = 0;
};

// Full-span votes for every patient.
std::vector<PatientVoteResult> full_span_votes(const std::vector<PatientSeries>& patients);

std::string format_ratio(const std::optional<double>& value);  // "n/a" when absent

}  // namespace mhdeep::eval
