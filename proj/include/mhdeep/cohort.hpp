#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mhdeep/sensors.hpp"

namespace mhdeep {

enum class ClassLabel : int { Healthy = 0, Bipolar, Mdd, Schizoaffective };
inline constexpr int kNumClasses = 4;

// Binary tasks, each disorder class against healthy.
enum class Task : int { Bipolar = 0, Mdd, Schizo };

std::string_view class_name(ClassLabel c);
std::optional<ClassLabel> class_from_name(std::string_view name);
std::string_view task_name(Task t);
std::optional<Task> task_from_name(std::string_view name);
ClassLabel task_disorder(Task t);

// One timestamped channel group at its nominal rate. Rate and channel count
// come from the sensor table; the stream only stores start time and samples.
struct SensorStream {
    SensorId id = SensorId::GSR;
    double start_ms = 0.0;
    Eigen::MatrixXd samples;  // rows = time, cols = channels

    int rate_hz() const { return sensor_info(id).rate_hz; }
    int channels() const { return sensor_info(id).channels; }
    double period_ms() const { return 1000.0 / rate_hz(); }
    // Exclusive end of the sampled span.
    double end_ms() const { return start_ms + static_cast<double>(samples.rows()) * period_ms(); }
    double duration_s() const { return (end_ms() - start_ms) / 1000.0; }
};

struct ParticipantRecording {
    std::string participant_id;
    ClassLabel label = ClassLabel::Healthy;
    std::array<SensorStream, kNumSensors> streams;  // canonical order by SensorId

    const SensorStream& stream(SensorId id) const { return streams[static_cast<std::size_t>(id)]; }
    SensorStream& stream(SensorId id) { return streams[static_cast<std::size_t>(id)]; }
};

// One flattened window: the features of a 15-second multi-sensor slice.
struct DataInstance {
    std::string participant_id;
    int window_index = 0;
    Eigen::VectorXd features;
    int label = 0;  // 0 healthy, 1 disorder
};

// Column-aligned batch of instances; rows line up across all members.
struct InstanceSet {
    Eigen::MatrixXd features;  // rows x dim
    Eigen::VectorXi labels;
    std::vector<std::string> participants;
    std::vector<int> window_indices;

    Eigen::Index rows() const { return features.rows(); }
    Eigen::Index dim() const { return features.cols(); }
    bool empty() const { return features.rows() == 0; }

    InstanceSet select(const std::vector<Eigen::Index>& row_ids) const;
    static InstanceSet pack(const std::vector<DataInstance>& items);
    static InstanceSet concat(const InstanceSet& a, const InstanceSet& b);
};

}  // namespace mhdeep
