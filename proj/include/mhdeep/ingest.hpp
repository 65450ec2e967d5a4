#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "mhdeep/cohort.hpp"

namespace mhdeep::ingest {

// Stream file: a header line `sensor_id,rate_hz,channels,start_ms`, then one
// sample per line with `channels` comma-separated real values. Rates and
// channel counts must match the sensor table exactly.
SensorStream parse_stream(const std::filesystem::path& file);
SensorStream parse_stream_text(std::string_view content, std::string_view display_name);

// Participant directory: `manifest` (participant_id, label key/value lines)
// plus one CSV per sensor named after its file stem.
ParticipantRecording load_participant(const std::filesystem::path& dir);

// All participant directories under `dir`, sorted by directory name.
std::vector<ParticipantRecording> load_cohort(const std::filesystem::path& dir);

// Manifest-only scan: participant ids and labels without touching the
// stream files.
std::vector<std::pair<std::string, ClassLabel>> load_manifests(const std::filesystem::path& dir);

// Index of the first grid point start + j*period that is at or after t.
Eigen::Index grid_index_at_or_after(double start_ms, double period_ms, double t_ms);

// Trims every stream to the common span [max(start), min(end)); each stream
// keeps the samples on its own nominal grid from the first one at or after
// the common start. Throws DataError when the overlap is under one window.
ParticipantRecording synchronize(ParticipantRecording rec);

// Cuts the synchronized recording into consecutive full windows and flattens
// each into one instance: categories in canonical order, channels within a
// category, time within a channel. The trailing partial window is dropped.
std::vector<DataInstance> window_and_flatten(const ParticipantRecording& rec,
                                             const CategorySet& categories,
                                             double window_s = kWindowSeconds);

}  // namespace mhdeep::ingest
