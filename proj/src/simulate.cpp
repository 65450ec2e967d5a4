#include "mhdeep/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mhdeep/errors.hpp"
#include "mhdeep/rng.hpp"

namespace mhdeep::sim {

namespace {

constexpr double kEpochBaseMs = 1'700'000'000'000.0;

// Resolves a scalar-or-vector parameter to one value per canonical channel.
Eigen::VectorXd per_channel(const Eigen::VectorXd& v, const char* field) {
    if (v.size() == 1) return Eigen::VectorXd::Constant(kTotalChannels, v(0));
    if (v.size() == kTotalChannels) return v;
    throw ConfigError(std::string("simulate.") + field + " must be a scalar or have " +
                      std::to_string(kTotalChannels) + " entries, got " + std::to_string(v.size()));
}

char class_prefix(ClassLabel c) {
    switch (c) {
        case ClassLabel::Healthy: return 'H';
        case ClassLabel::Bipolar: return 'B';
        case ClassLabel::Mdd: return 'M';
        case ClassLabel::Schizoaffective: return 'S';
    }
    return 'X';
}

void write_real(std::FILE* f, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    std::fputs(buf, f);
}

}  // namespace

void CohortSpec::validate() const {
    for (int c = 0; c < kNumClasses; ++c) {
        if (class_counts[static_cast<std::size_t>(c)] < 0) {
            throw ConfigError("simulate.counts must be >= 0");
        }
    }
    if (recording_minutes <= 0.0) throw ConfigError("simulate.recording_minutes must be > 0");
    const Eigen::VectorXd noise = per_channel(noise_std, "noise_std");
    if ((noise.array() <= 0.0).any()) throw ConfigError("simulate.noise_std must be > 0");
    per_channel(class_shift, "class_shift");
    if (subject_offset_std < 0.0) throw ConfigError("simulate.subject_offset_std must be >= 0");
    if (start_jitter_ms < 0.0) throw ConfigError("simulate.start_jitter_ms must be >= 0");
}

Eigen::VectorXd channel_baselines() {
    Eigen::VectorXd base(kTotalChannels);
    base.segment(channel_offset(SensorId::GSR), 1) << 2.0;     // microsiemens
    base.segment(channel_offset(SensorId::ST), 1) << 33.0;     // skin temperature, C
    base.segment(channel_offset(SensorId::IBI), 1) << 800.0;   // ms between beats
    base.segment(channel_offset(SensorId::AccW), 3) << 0.0, 0.0, 1.0;
    base.segment(channel_offset(SensorId::Temp), 1) << 22.0;
    base.segment(channel_offset(SensorId::Grav), 3) << 0.0, 0.0, 9.81;
    base.segment(channel_offset(SensorId::AccP), 3) << 0.0, 0.0, 0.0;
    base.segment(channel_offset(SensorId::Vel), 3) << 0.0, 0.0, 0.0;
    return base;
}

ParticipantRecording generate_participant(const CohortSpec& spec, ClassLabel label, int index) {
    const Eigen::VectorXd baselines = channel_baselines();
    const Eigen::VectorXd noise = per_channel(spec.noise_std, "noise_std");
    const Eigen::VectorXd shift = per_channel(spec.class_shift, "class_shift");

    Rng rng(derive_seed(spec.seed, "participant",
                        {static_cast<std::uint64_t>(label), static_cast<std::uint64_t>(index)}));
    ParticipantRecording rec;
    char id[16];
    std::snprintf(id, sizeof(id), "%c%04d", class_prefix(label), index + 1);
    rec.participant_id = id;
    rec.label = label;

    Eigen::VectorXd mean(kTotalChannels);
    for (int ch = 0; ch < kTotalChannels; ++ch) {
        mean(ch) = baselines(ch) + spec.subject_offset_std * noise(ch) * rng.normal();
        if (label != ClassLabel::Healthy) mean(ch) += shift(ch) * noise(ch);
    }

    // All streams cover [start_i, end_target); jittered starts leave
    // exactly floor(recording_minutes * 4) full windows after sync.
    // The 1500 ms slack absorbs the grid alignment loss (< 1 s for
    // the coarsest sensor) without adding a whole extra window.
    const double target_ms = std::round(spec.recording_minutes * 60'000.0);
    const double end_target = kEpochBaseMs + spec.start_jitter_ms + target_ms + 1500.0;
    for (const auto& info : kSensors) {
        SensorStream s;
        s.id = info.id;
        const double jitter =
            spec.start_jitter_ms > 0.0
                ? static_cast<double>(rng.uniform_index(static_cast<std::size_t>(spec.start_jitter_ms) + 1))
                : 0.0;
        s.start_ms = kEpochBaseMs + jitter;
        const auto rows = static_cast<Eigen::Index>(
            std::ceil((end_target - s.start_ms) * info.rate_hz / 1000.0));
        s.samples.resize(rows, info.channels);
        const int ch0 = channel_offset(info.id);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (int c = 0; c < info.channels; ++c) {
                s.samples(r, c) = mean(ch0 + c) + noise(ch0 + c) * rng.normal();
            }
        }
        rec.streams[static_cast<std::size_t>(info.id)] = std::move(s);
    }
    return rec;
}

std::vector<ParticipantRecording> generate_cohort(const CohortSpec& spec) {
    spec.validate();
    std::vector<ParticipantRecording> cohort;
    for (int ci = 0; ci < kNumClasses; ++ci) {
        const auto label = static_cast<ClassLabel>(ci);
        for (int i = 0; i < spec.class_counts[static_cast<std::size_t>(ci)]; ++i) {
            cohort.push_back(generate_participant(spec, label, i));
        }
    }
    return cohort;
}

void write_participant(const ParticipantRecording& rec, const std::filesystem::path& dir,
                       std::uint64_t config_hash, std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream manifest(dir / "manifest", std::ios::binary);
        if (!manifest) throw DataError("cannot write manifest in " + dir.string());
        manifest << "participant_id = " << rec.participant_id << "\n";
        manifest << "label = " << class_name(rec.label) << "\n";
        char hash[32];
        std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(config_hash));
        manifest << "config_hash = " << hash << "\n";
        manifest << "seed = " << seed << "\n";
    }
    for (const auto& info : kSensors) {
        const SensorStream& s = rec.stream(info.id);
        const auto path = dir / (std::string(info.file_stem) + ".csv");
        std::FILE* f = std::fopen(path.string().c_str(), "wb");
        if (!f) throw DataError("cannot write stream file " + path.string());
        std::fprintf(f, "%s,%d,%d,%.0f\n", std::string(info.name).c_str(), info.rate_hz,
                     info.channels, s.start_ms);
        for (Eigen::Index r = 0; r < s.samples.rows(); ++r) {
            for (int c = 0; c < info.channels; ++c) {
                if (c > 0) std::fputc(',', f);
                write_real(f, s.samples(r, c));
            }
            std::fputc('\n', f);
        }
        std::fclose(f);
    }
}

void write_cohort(const std::vector<ParticipantRecording>& cohort, const std::filesystem::path& dir,
                  std::uint64_t config_hash, std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    for (const auto& rec : cohort) {
        write_participant(rec, dir / rec.participant_id, config_hash, seed);
    }
}

}  // namespace mhdeep::sim
