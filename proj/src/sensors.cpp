#include "mhdeep/sensors.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>

namespace mhdeep {

const SensorInfo& sensor_info(SensorId id) {
    return kSensors[static_cast<std::size_t>(id)];
}

std::optional<SensorId> sensor_from_name(std::string_view name) {
    for (const auto& s : kSensors) {
        if (s.name == name) return s.id;
    }
    return std::nullopt;
}

int sensor_window_samples(SensorId id, double window_s) {
    const double n = sensor_info(id).rate_hz * window_s;
    const double rounded = std::round(n);
    if (std::abs(n - rounded) > 1e-9 || rounded < 1.0) {
        throw ConfigError("window length " + std::to_string(window_s) +
                          "s is not a whole number of samples for sensor " +
                          std::string(sensor_info(id).name));
    }
    return static_cast<int>(rounded);
}

int sensor_window_dims(SensorId id, double window_s) {
    return sensor_window_samples(id, window_s) * sensor_info(id).channels;
}

int channel_offset(SensorId id) {
    int off = 0;
    for (const auto& s : kSensors) {
        if (s.id == id) return off;
        off += s.channels;
    }
    return off;
}

CategorySet CategorySet::from_bits(unsigned bits) {
    if (bits > 0xFF) {
        throw ConfigError("category bitmask out of range: " + std::to_string(bits));
    }
    CategorySet set;
    set.bits_ = static_cast<std::uint8_t>(bits);
    return set;
}

CategorySet CategorySet::of(std::initializer_list<SensorId> ids) {
    CategorySet set;
    for (SensorId id : ids) set.insert(id);
    return set;
}

CategorySet CategorySet::parse(std::string_view text) {
    if (text.empty()) throw ConfigError("empty category subset");
    const bool numeric = text.find_first_not_of("0123456789") == std::string_view::npos;
    if (numeric) {
        return from_bits(static_cast<unsigned>(std::strtoul(std::string(text).c_str(), nullptr, 10)));
    }
    CategorySet set;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        std::string_view token = text.substr(pos, comma - pos);
        while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
        while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
        if (!token.empty()) {
            auto id = sensor_from_name(token);
            if (!id) throw ConfigError("unknown data category '" + std::string(token) + "'");
            set.insert(*id);
        }
        if (comma == text.size()) break;
        pos = comma + 1;
    }
    if (set.empty()) throw ConfigError("empty category subset");
    return set;
}

int CategorySet::count() const {
    return std::popcount(static_cast<unsigned>(bits_));
}

std::vector<SensorId> CategorySet::to_vector() const {
    std::vector<SensorId> out;
    for (const auto& s : kSensors) {
        if (contains(s.id)) out.push_back(s.id);
    }
    return out;
}

std::string CategorySet::to_string() const {
    std::string out;
    for (const auto& s : kSensors) {
        if (!contains(s.id)) continue;
        if (!out.empty()) out += ',';
        out += s.name;
    }
    return out;
}

int category_dims(const CategorySet& categories, double window_s) {
    if (categories.empty()) throw ConfigError("category subset must be non-empty");
    int dims = 0;
    for (SensorId id : categories.to_vector()) dims += sensor_window_dims(id, window_s);
    return dims;
}

CategorySet watch_categories() {
    CategorySet set;
    for (const auto& s : kSensors) {
        if (s.source == Source::Watch) set.insert(s.id);
    }
    return set;
}

CategorySet phone_categories() {
    CategorySet set;
    for (const auto& s : kSensors) {
        if (s.source == Source::Phone) set.insert(s.id);
    }
    return set;
}

}  // namespace mhdeep
