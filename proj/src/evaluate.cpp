#include "mhdeep/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mhdeep/errors.hpp"

namespace mhdeep::eval {

InstanceMetrics instance_metrics(const Eigen::VectorXi& predictions, const Eigen::VectorXi& labels) {
    if (predictions.size() == 0) throw DataError("instance_metrics needs at least one prediction");
    if (predictions.size() != labels.size()) {
        throw DataError("predictions and labels differ in length");
    }
    InstanceMetrics m;
    for (Eigen::Index i = 0; i < predictions.size(); ++i) {
        const int p = predictions(i);
        const int y = labels(i);
        if ((p != 0 && p != 1) || (y != 0 && y != 1)) {
            throw DataError("instance_metrics expects binary values");
        }
        if (y == 1) {
            (p == 1 ? m.counts.tp : m.counts.fn)++;
        } else {
            (p == 1 ? m.counts.fp : m.counts.tn)++;
        }
    }
    m.accuracy = static_cast<double>(m.counts.tp + m.counts.tn) / static_cast<double>(m.counts.total());
    if (m.counts.fp + m.counts.tn > 0) {
        m.fpr = static_cast<double>(m.counts.fp) / static_cast<double>(m.counts.fp + m.counts.tn);
    }
    if (m.counts.fn + m.counts.tp > 0) {
        m.fnr = static_cast<double>(m.counts.fn) / static_cast<double>(m.counts.fn + m.counts.tp);
        m.recall = static_cast<double>(m.counts.tp) / static_cast<double>(m.counts.tp + m.counts.fn);
    }
    if (m.counts.tp + m.counts.fp > 0) {
        m.precision = static_cast<double>(m.counts.tp) / static_cast<double>(m.counts.tp + m.counts.fp);
    }
    if (m.precision && m.recall && *m.precision + *m.recall > 0.0) {
        m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    }
    return m;
}

int patient_vote(std::span<const int> predictions, double duration_minutes) {
    if (predictions.empty()) throw DataError("patient_vote needs at least one instance");
    auto window = static_cast<std::size_t>(std::floor(duration_minutes * 60.0 / 15.0));
    if (window < 1) {
        throw DataError("vote duration " + std::to_string(duration_minutes) +
                        " min is shorter than one 15 s instance");
    }
    window = std::min(window, predictions.size());
    long long disorder = 0;
    for (std::size_t i = 0; i < window; ++i) disorder += predictions[i];
    return 2 * disorder >= static_cast<long long>(window) ? 1 : 0;
}

DurationSweep duration_sweep(const std::vector<PatientSeries>& patients, double step_minutes) {
    if (patients.empty()) throw DataError("duration_sweep needs at least one patient");
    if (step_minutes <= 0.0) throw ConfigError("sweep step must be positive");
    std::size_t min_instances = patients.front().predictions.size();
    for (const auto& p : patients) {
        if (p.predictions.empty()) {
            throw DataError("patient " + p.participant_id + " has no instances");
        }
        min_instances = std::min(min_instances, p.predictions.size());
    }
    const double max_minutes = static_cast<double>(min_instances) * 15.0 / 60.0;

    DurationSweep sweep;
    for (int step = 1; static_cast<double>(step) * step_minutes <= max_minutes + 1e-9; ++step) {
        DurationPoint point;
        const double minutes = static_cast<double>(step) * step_minutes;
        point.minutes = minutes;
        point.instances_per_patient = static_cast<int>(std::floor(minutes * 60.0 / 15.0));
        int correct = 0;
        for (const auto& p : patients) {
            if (patient_vote(p.predictions, minutes) == p.label) ++correct;
        }
        point.accuracy = static_cast<double>(correct) / static_cast<double>(patients.size());
        sweep.curve.push_back(point);
    }
    if (sweep.curve.empty()) {
        throw DataError("shortest patient span (" + std::to_string(max_minutes) +
                        " min) is below one sweep step");
    }
    sweep.final_accuracy = sweep.curve.back().accuracy;
    sweep.saturation_minutes = sweep.curve.back().minutes;
    for (auto it = sweep.curve.rbegin(); it != sweep.curve.rend(); ++it) {
        if (it->accuracy != sweep.final_accuracy) break;
        sweep.saturation_minutes = it->minutes;
    }
    return sweep;
}

std::vector<PatientVoteResult> full_span_votes(const std::vector<PatientSeries>& patients) {
    std::vector<PatientVoteResult> votes;
    votes.reserve(patients.size());
    for (const auto& p : patients) {
        const double full_minutes = static_cast<double>(p.predictions.size()) * 15.0 / 60.0;
        votes.push_back({p.participant_id, p.label, patient_vote(p.predictions, full_minutes)});
    }
    return votes;
}

std::string format_ratio(const std::optional<double>& value) {
    if (!value) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", *value);
    return buf;
}

}  // namespace mhdeep::eval
