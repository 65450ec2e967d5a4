#include "mhdeep/cohort.hpp"

#include "mhdeep/errors.hpp"

namespace mhdeep {

std::string_view class_name(ClassLabel c) {
    switch (c) {
        case ClassLabel::Healthy: return "healthy";
        case ClassLabel::Bipolar: return "bipolar";
        case ClassLabel::Mdd: return "mdd";
        case ClassLabel::Schizoaffective: return "schizoaffective";
    }
    return "?";
}

std::optional<ClassLabel> class_from_name(std::string_view name) {
    if (name == "healthy") return ClassLabel::Healthy;
    if (name == "bipolar") return ClassLabel::Bipolar;
    if (name == "mdd") return ClassLabel::Mdd;
    if (name == "schizoaffective" || name == "schizo") return ClassLabel::Schizoaffective;
    return std::nullopt;
}

std::string_view task_name(Task t) {
    switch (t) {
        case Task::Bipolar: return "bipolar";
        case Task::Mdd: return "mdd";
        case Task::Schizo: return "schizo";
    }
    return "?";
}

std::optional<Task> task_from_name(std::string_view name) {
    if (name == "bipolar") return Task::Bipolar;
    if (name == "mdd") return Task::Mdd;
    if (name == "schizo" || name == "schizoaffective") return Task::Schizo;
    return std::nullopt;
}

ClassLabel task_disorder(Task t) {
    switch (t) {
        case Task::Bipolar: return ClassLabel::Bipolar;
        case Task::Mdd: return ClassLabel::Mdd;
        case Task::Schizo: return ClassLabel::Schizoaffective;
    }
    return ClassLabel::Healthy;
}

InstanceSet InstanceSet::select(const std::vector<Eigen::Index>& row_ids) const {
    InstanceSet out;
    out.features.resize(static_cast<Eigen::Index>(row_ids.size()), features.cols());
    out.labels.resize(static_cast<Eigen::Index>(row_ids.size()));
    out.participants.reserve(row_ids.size());
    out.window_indices.reserve(row_ids.size());
    Eigen::Index r = 0;
    for (Eigen::Index id : row_ids) {
        out.features.row(r) = features.row(id);
        out.labels(r) = labels(id);
        out.participants.push_back(participants[static_cast<std::size_t>(id)]);
        out.window_indices.push_back(window_indices[static_cast<std::size_t>(id)]);
        ++r;
    }
    return out;
}

InstanceSet InstanceSet::pack(const std::vector<DataInstance>& items) {
    InstanceSet out;
    if (items.empty()) return out;
    const Eigen::Index dim = items.front().features.size();
    out.features.resize(static_cast<Eigen::Index>(items.size()), dim);
    out.labels.resize(static_cast<Eigen::Index>(items.size()));
    out.participants.reserve(items.size());
    out.window_indices.reserve(items.size());
    Eigen::Index r = 0;
    for (const auto& inst : items) {
        if (inst.features.size() != dim) {
            throw DataError("inconsistent feature dimension while packing instances");
        }
        out.features.row(r) = inst.features.transpose();
        out.labels(r) = inst.label;
        out.participants.push_back(inst.participant_id);
        out.window_indices.push_back(inst.window_index);
        ++r;
    }
    return out;
}

InstanceSet InstanceSet::concat(const InstanceSet& a, const InstanceSet& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    if (a.dim() != b.dim()) throw DataError("feature dimension mismatch in concat");
    InstanceSet out;
    out.features.resize(a.rows() + b.rows(), a.dim());
    out.features.topRows(a.rows()) = a.features;
    out.features.bottomRows(b.rows()) = b.features;
    out.labels.resize(a.rows() + b.rows());
    out.labels.head(a.rows()) = a.labels;
    out.labels.tail(b.rows()) = b.labels;
    out.participants = a.participants;
    out.participants.insert(out.participants.end(), b.participants.begin(), b.participants.end());
    out.window_indices = a.window_indices;
    out.window_indices.insert(out.window_indices.end(), b.window_indices.begin(), b.window_indices.end());
    return out;
}

}  // namespace mhdeep
