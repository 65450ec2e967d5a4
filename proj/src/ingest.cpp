#include "mhdeep/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "mhdeep/errors.hpp"

namespace mhdeep::ingest {

namespace {

[[noreturn]] void parse_fail(std::string_view file, std::size_t line, const std::string& what) {
    throw DataError(std::string(file) + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

double parse_real(std::string_view token, std::string_view file, std::size_t line) {
    std::string buf(token);
    char* end = nullptr;
    const double v = std::strtod(buf.c_str(), &end);
    if (end == buf.c_str() || *end != '\0' || !std::isfinite(v)) {
        parse_fail(file, line, "non-numeric sample '" + buf + "'");
    }
    return v;
}

long long parse_int(std::string_view token, std::string_view file, std::size_t line,
                    const std::string& what) {
    std::string buf(token);
    char* end = nullptr;
    const long long v = std::strtoll(buf.c_str(), &end, 10);
    if (end == buf.c_str() || *end != '\0') {
        parse_fail(file, line, "malformed header: bad " + what + " '" + buf + "'");
    }
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

SensorStream parse_stream_text(std::string_view content, std::string_view display_name) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    auto next_line = [&](std::string_view& line) {
        if (pos >= content.size()) return false;
        std::size_t nl = content.find('\n', pos);
        if (nl == std::string_view::npos) nl = content.size();
        line = trim(content.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        return true;
    };

    std::string_view header;
    if (!next_line(header) || header.empty()) {
        throw DataError(std::string(display_name) + ":1: malformed header: empty file");
    }
    const auto fields = split_fields(header);
    if (fields.size() != 4) {
        parse_fail(display_name, line_no, "malformed header: expected sensor_id,rate_hz,channels,start_ms");
    }
    const auto id = sensor_from_name(trim(fields[0]));
    if (!id) {
        parse_fail(display_name, line_no,
                   "malformed header: unknown sensor_id '" + std::string(trim(fields[0])) + "'");
    }
    const SensorInfo& info = sensor_info(*id);
    const long long rate = parse_int(trim(fields[1]), display_name, line_no, "rate_hz");
    const long long channels = parse_int(trim(fields[2]), display_name, line_no, "channels");
    const double start_ms = parse_real(trim(fields[3]), display_name, line_no);
    if (rate != info.rate_hz) {
        parse_fail(display_name, line_no,
                   "rate mismatch for " + std::string(info.name) + ": expected " +
                       std::to_string(info.rate_hz) + " Hz, got " + std::to_string(rate));
    }
    if (channels != info.channels) {
        parse_fail(display_name, line_no,
                   "channel-count mismatch: expected " + std::to_string(info.channels));
    }

    std::vector<double> values;
    std::size_t rows = 0;
    std::string_view line;
    while (next_line(line)) {
        if (line.empty()) continue;
        const auto cells = split_fields(line);
        if (cells.size() != static_cast<std::size_t>(info.channels)) {
            parse_fail(display_name, line_no,
                       "channel-count mismatch: expected " + std::to_string(info.channels));
        }
        for (const auto& cell : cells) values.push_back(parse_real(trim(cell), display_name, line_no));
        ++rows;
    }

    SensorStream stream;
    stream.id = *id;
    stream.start_ms = start_ms;
    stream.samples.resize(static_cast<Eigen::Index>(rows), info.channels);
    for (std::size_t r = 0; r < rows; ++r) {
        for (int c = 0; c < info.channels; ++c) {
            stream.samples(static_cast<Eigen::Index>(r), c) = values[r * info.channels + c];
        }
    }
    return stream;
}

SensorStream parse_stream(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DataError("cannot open stream file " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_stream_text(buf.str(), file.filename().string());
}

namespace {

std::pair<std::string, ClassLabel> read_manifest(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest";
    std::ifstream manifest(manifest_path);
    if (!manifest) throw DataError("missing manifest in " + dir.string());

    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(manifest, line)) {
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw DataError(manifest_path.string() + ": malformed line '" + std::string(text) + "'");
        }
        kv[std::string(trim(text.substr(0, eq)))] = std::string(trim(text.substr(eq + 1)));
    }
    if (!kv.count("participant_id")) throw DataError(manifest_path.string() + ": missing participant_id");
    if (!kv.count("label")) throw DataError(manifest_path.string() + ": missing label");
    const auto label = class_from_name(kv["label"]);
    if (!label) throw DataError(manifest_path.string() + ": unknown label '" + kv["label"] + "'");
    return {kv["participant_id"], *label};
}

std::vector<std::filesystem::path> participant_dirs(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw DataError("cohort directory not found: " + dir.string());
    }
    std::vector<std::filesystem::path> subdirs;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_directory() && std::filesystem::exists(entry.path() / "manifest")) {
            subdirs.push_back(entry.path());
        }
    }
    std::sort(subdirs.begin(), subdirs.end());
    if (subdirs.empty()) throw DataError("no participant directories under " + dir.string());
    return subdirs;
}

}  // namespace

ParticipantRecording load_participant(const std::filesystem::path& dir) {
    const auto [id, label] = read_manifest(dir);
    ParticipantRecording rec;
    rec.participant_id = id;
    rec.label = label;
    for (const auto& info : kSensors) {
        const auto file = dir / (std::string(info.file_stem) + ".csv");
        if (!std::filesystem::exists(file)) {
            throw DataError("missing stream file " + file.string());
        }
        SensorStream s = parse_stream(file);
        if (s.id != info.id) {
            throw DataError(file.string() + ": sensor_id " + std::string(sensor_info(s.id).name) +
                            " does not match file name");
        }
        rec.streams[static_cast<std::size_t>(info.id)] = std::move(s);
    }
    return rec;
}

std::vector<ParticipantRecording> load_cohort(const std::filesystem::path& dir) {
    const auto subdirs = participant_dirs(dir);
    std::vector<ParticipantRecording> cohort;
    cohort.reserve(subdirs.size());
    for (const auto& sub : subdirs) cohort.push_back(load_participant(sub));
    return cohort;
}

std::vector<std::pair<std::string, ClassLabel>> load_manifests(const std::filesystem::path& dir) {
    const auto subdirs = participant_dirs(dir);
    std::vector<std::pair<std::string, ClassLabel>> manifests;
    manifests.reserve(subdirs.size());
    for (const auto& sub : subdirs) manifests.push_back(read_manifest(sub));
    return manifests;
}

Eigen::Index grid_index_at_or_after(double start_ms, double period_ms, double t_ms) {
    const double delta = t_ms - start_ms;
    if (delta <= 0.0) return 0;
    auto j = static_cast<Eigen::Index>(std::ceil(delta / period_ms));
    while (j > 0 && start_ms + static_cast<double>(j - 1) * period_ms >= t_ms) --j;
    while (start_ms + static_cast<double>(j) * period_ms < t_ms) ++j;
    return j;
}

ParticipantRecording synchronize(ParticipantRecording rec) {
    double common_start = rec.streams.front().start_ms;
    double common_end = rec.streams.front().end_ms();
    for (const auto& s : rec.streams) {
        common_start = std::max(common_start, s.start_ms);
        common_end = std::min(common_end, s.end_ms());
    }
    if (common_end - common_start < kWindowSeconds * 1000.0) {
        throw DataError("insufficient overlap: streams of participant " + rec.participant_id +
                        " share " + std::to_string((common_end - common_start) / 1000.0) +
                        " s, need at least " + std::to_string(kWindowSeconds) + " s");
    }
    for (auto& s : rec.streams) {
        const double period = s.period_ms();
        const Eigen::Index first = grid_index_at_or_after(s.start_ms, period, common_start);
        Eigen::Index last = grid_index_at_or_after(s.start_ms, period, common_end);
        last = std::min(last, s.samples.rows());
        const Eigen::Index kept = std::max<Eigen::Index>(0, last - first);
        const Eigen::MatrixXd trimmed = s.samples.middleRows(first, kept);
        s.samples = trimmed;
        s.start_ms += static_cast<double>(first) * period;
    }
    return rec;
}

std::vector<DataInstance> window_and_flatten(const ParticipantRecording& rec,
                                             const CategorySet& categories,
                                             double window_s) {
    const int dims = category_dims(categories, window_s);  // validates non-empty set
    double common_start = rec.streams.front().start_ms;
    double common_end = rec.streams.front().end_ms();
    for (const auto& s : rec.streams) {
        common_start = std::max(common_start, s.start_ms);
        common_end = std::min(common_end, s.end_ms());
    }
    const double window_ms = window_s * 1000.0;
    const auto n_windows = static_cast<Eigen::Index>(std::floor((common_end - common_start) / window_ms));
    if (n_windows <= 0) {
        throw DataError("recording too short: participant " + rec.participant_id + " has no full " +
                        std::to_string(window_s) + " s window");
    }

    const auto selected = categories.to_vector();
    const int binary_label = rec.label == ClassLabel::Healthy ? 0 : 1;

    std::vector<DataInstance> instances;
    instances.reserve(static_cast<std::size_t>(n_windows));
    for (Eigen::Index w = 0; w < n_windows; ++w) {
        DataInstance inst;
        inst.participant_id = rec.participant_id;
        inst.window_index = static_cast<int>(w);
        inst.label = binary_label;
        inst.features.resize(dims);
        const double w_start = common_start + static_cast<double>(w) * window_ms;
        Eigen::Index offset = 0;
        for (SensorId id : selected) {
            const SensorStream& s = rec.stream(id);
            const int m = sensor_window_samples(id, window_s);
            const Eigen::Index j0 = grid_index_at_or_after(s.start_ms, s.period_ms(), w_start);
            if (j0 + m > s.samples.rows()) {
                throw DataError("window " + std::to_string(w) + " of participant " +
                                rec.participant_id + " is not fully covered by sensor " +
                                std::string(sensor_info(id).name) + "; synchronize the recording first");
            }
            for (int c = 0; c < s.channels(); ++c) {
                inst.features.segment(offset, m) = s.samples.col(c).segment(j0, m);
                offset += m;
            }
        }
        instances.push_back(std::move(inst));
    }
    return instances;
}

}  // namespace mhdeep::ingest
